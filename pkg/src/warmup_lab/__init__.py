"""warmup-lab: loss-aware curvature models, step-size rules, and diagnostics.

The package is organized around one idea: on many objectives the Hessian
norm is controlled by the *loss* rather than by the gradient, via
``||H(w)|| <= h0 + h1 * (f(w) - baseline)**rho``.  Modules:

- ``core``: parameter points, objective bundles, finite-difference probes.
- ``problems``: objective constructors with analytic certificates/witnesses.
- ``schedules``: warm-up step-size rules derived from (h0, h1) constants.
- ``optimize``: deterministic and stochastic gradient loops with logging.
- ``smoothness``: trajectory-based estimation of (h0, h1) from runs.
- ``theory``: certified constants, bound predictions, and lemma checkers.
- ``harness``: config-driven experiment runner, CSV/report output, CLI.
"""

from .core import EvalRecord, Objective, ParamPoint

__version__ = "0.1.0"

__all__ = ["EvalRecord", "Objective", "ParamPoint", "__version__"]
