"""Shared test fixtures: the certified problem zoo and sampling helpers."""

from __future__ import annotations

import numpy as np
import pytest

from warmup_lab.harness.config import build_problem

# One small instance of every problem kind that ships a curvature
# certificate.  Several suites sweep this table; instance sizes are kept
# small enough that finite-difference Hessians stay cheap.
CERTIFIED_CASES = [
    ("exp_quadratic", {"name": "exp_quadratic", "h1": 1.0}),
    ("runway", {"name": "runway", "h0": 1.0, "h1": 4.0, "delta": 0.005}),
    ("pl_lower_bound",
     {"name": "pl_lower_bound", "c0": 1.0, "mu": 0.5, "h1": 1.0}),
    ("pl_sin_quadratic", {"name": "pl_sin_quadratic"}),
    ("least_squares",
     {"name": "interpolating_least_squares", "n": 10, "d": 20,
      "dataset_seed": 7}),
    ("two_layer_mse", {"name": "two_layer_mse", "d": 3, "hidden": 4, "m": 10}),
    ("two_layer_ce", {"name": "two_layer_ce", "d": 3, "hidden": 4, "m": 10}),
    ("deep_linear",
     {"name": "deep_linear", "layer_dims": [2, 2, 2], "f_star": 0.0}),
    ("semi_linear", {"name": "semi_linear", "layer_dims": [2, 2, 2], "h": 1.0}),
    ("deep_leaky", {"name": "deep_leaky", "layer_dims": [2, 2, 2, 2]}),
]

CASE_IDS = [case_id for case_id, _ in CERTIFIED_CASES]


def sample_points(sampler, n, seed=0):
    """Draw ``n`` points from a region sampler with a fixed generator."""
    rng = np.random.Generator(np.random.PCG64(seed))
    return [sampler(rng) for _ in range(n)]


@pytest.fixture(params=[table for _, table in CERTIFIED_CASES], ids=CASE_IDS)
def certified_problem(request):
    """(objective, start point, region sampler) for one zoo instance."""
    return build_problem(dict(request.param))
