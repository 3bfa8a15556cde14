"""TOML experiment configs: parsing, validation, serialization, sweeps.

A config names a problem and a step policy from the registries below, plus a
stop rule, a seed, and an output root.  An optional ``[sweep]`` table maps
dotted field paths (``"policy.eta"``, ``"problem.h1"``, ``"seed"``) to value
lists; the cross product (capped at ``SWEEP_CAP``) expands into concrete
single-run configs.

Serialization is deliberately tiny and deterministic (sorted keys, stable
float repr) so identical configs hash to identical run ids; ``parse ->
serialize -> parse`` is the identity on validated configs.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Callable

import numpy as np
import tomli

from ..core import Objective, ParamPoint
from ..errors import ConfigError
from ..optimize import StopRule
from ..problems import (
    activation,
    make_balanced_init,
    make_dataset,
    make_deep_leaky,
    make_deep_linear,
    make_exp_quadratic,
    make_interpolating_least_squares,
    make_pl_lower_bound,
    make_pl_sin_quadratic,
    make_runway,
    make_semi_linear,
    make_two_layer_ce_l2,
    make_two_layer_mse_l2,
)
from ..schedules import (
    WSD,
    Constant,
    Cosine,
    LinearWarmup,
    PracticalClipped,
    StepPolicy,
    TheoreticalAdaptive,
)
from ..smoothness import (
    Sampler,
    balanced_sampler,
    box_sampler,
    floor_sampler,
    gaussian_sampler,
)
from ..theory import (
    deep_leaky_constants,
    deep_linear_constants,
    semi_linear_constants,
    two_layer_ce_constants,
    two_layer_mse_constants,
)

__all__ = [
    "ExperimentConfig",
    "SWEEP_CAP",
    "PROBLEM_BUILDERS",
    "POLICY_BUILDERS",
    "parse_config",
    "load_config",
    "serialize_config",
    "expand_sweep",
    "build_problem",
    "build_policy",
]

# Hard ceiling on the sweep cross-product size.
SWEEP_CAP = 10_000

_SCALARS = (str, bool, int, float)


@dataclass(frozen=True)
class ExperimentConfig:
    """One validated experiment description.

    ``problem`` and ``policy`` are name + parameter tables (kept as plain
    dicts so they serialize verbatim); ``sweep`` maps dotted paths to value
    lists and is empty on concrete (single-run) configs.
    """

    problem: dict[str, Any]
    policy: dict[str, Any]
    stop: StopRule
    seed: int
    outputs: str = "runs"
    sweep: dict[str, list] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        stop: dict[str, Any] = {"max_iters": self.stop.max_iters}
        if self.stop.grad_tol is not None:
            stop["grad_tol"] = self.stop.grad_tol
        if self.stop.loss_tol is not None:
            stop["loss_tol"] = self.stop.loss_tol
        stop["divergence_guard"] = self.stop.divergence_guard
        out: dict[str, Any] = {
            "seed": self.seed,
            "outputs": self.outputs,
            "problem": dict(self.problem),
            "policy": dict(self.policy),
            "stop": stop,
        }
        if self.sweep:
            out["sweep"] = {k: list(v) for k, v in self.sweep.items()}
        return out


# ---------------------------------------------------------------------------
# Problem registry.  Builders return (objective, start point, region sampler).
# ---------------------------------------------------------------------------

ProblemBuild = tuple[Objective, ParamPoint, Sampler]


def _num(table: dict, key: str, default=None, required=False) -> float:
    if key not in table:
        if required:
            raise ConfigError(f"problem table is missing {key!r}")
        return default
    v = table[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{key!r} must be a number, got {v!r}")
    return float(v)


def _int(table: dict, key: str, default=None, required=False) -> int:
    if key not in table:
        if required:
            raise ConfigError(f"problem table is missing {key!r}")
        return default
    v = table[key]
    if isinstance(v, bool) or not isinstance(v, int):
        raise ConfigError(f"{key!r} must be an integer, got {v!r}")
    return v


def _dims(table: dict) -> list[int]:
    dims = table.get("layer_dims")
    if (not isinstance(dims, list) or len(dims) < 2
            or any(isinstance(n, bool) or not isinstance(n, int) or n < 1
                   for n in dims)):
        raise ConfigError("'layer_dims' must be a list of >= 2 positive ints")
    return list(dims)


def _network_dataset(table: dict):
    """Shared dataset block for the matrix-factorization problems.

    dataset = "identity" (X = Y = I_dim) or "random" (planted interpolating
    target, n >= d samples so the Gram matrix stays nonsingular).
    """
    kind = table.get("dataset", "identity")
    dims = _dims(table)
    d_in, d_out = dims[-1], dims[0]
    if kind == "identity":
        if d_in != d_out:
            raise ConfigError("identity dataset needs equal first/last dims")
        eye = np.eye(d_in)
        return make_dataset(eye, np.eye(d_out)), dims
    if kind == "random":
        n = _int(table, "n_samples", default=2 * d_in)
        if n < d_in:
            raise ConfigError(f"need n_samples >= input dim {d_in}, got {n}")
        rng = np.random.Generator(np.random.PCG64(
            _int(table, "dataset_seed", default=0)))
        x = rng.standard_normal((d_in, n))
        w = rng.standard_normal((d_out, d_in)) / math.sqrt(d_in)
        return make_dataset(x, w @ x), dims
    raise ConfigError(f"unknown dataset kind {kind!r}")


def _build_exp_quadratic(t: dict) -> ProblemBuild:
    obj = make_exp_quadratic(h1=_num(t, "h1", required=True),
                             m_value=_num(t, "m_value"))
    w0 = ParamPoint.scalar(_num(t, "w0", default=3.0))
    return obj, w0, box_sampler(obj)


def _build_runway(t: dict) -> ProblemBuild:
    obj = make_runway(h0=_num(t, "h0", required=True),
                      h1=_num(t, "h1", required=True),
                      delta=_num(t, "delta", required=True))
    w0 = _num(t, "w0", default=obj.info["x2"])
    return obj, ParamPoint.scalar(w0), box_sampler(obj)


def _build_pl_lower_bound(t: dict) -> ProblemBuild:
    obj = make_pl_lower_bound(c0=_num(t, "c0", required=True),
                              mu=_num(t, "mu", required=True),
                              h1=_num(t, "h1", required=True))
    w0 = ParamPoint.scalar(_num(t, "w0", default=3.0))
    return obj, w0, box_sampler(obj)


def _build_pl_sin_quadratic(t: dict) -> ProblemBuild:
    obj = make_pl_sin_quadratic()
    w0 = ParamPoint.scalar(_num(t, "w0", default=3.0))
    return obj, w0, box_sampler(obj)


def _build_least_squares(t: dict) -> ProblemBuild:
    obj = make_interpolating_least_squares(
        n=_int(t, "n", required=True), d=_int(t, "d", required=True),
        seed=_int(t, "dataset_seed", default=0))
    w0 = ParamPoint.from_arrays([("w", np.zeros(int(obj.dim)))])
    return obj, w0, gaussian_sampler(obj)


def _two_layer_data(t: dict):
    """Teacher-generated two-layer dataset; the draw order (X, teacher W1,
    teacher W2, label noise, init W1, init W2) is part of the contract."""
    d = _int(t, "d", required=True)
    hidden = _int(t, "hidden", required=True)
    m = _int(t, "m", required=True)
    c = _int(t, "c", default=2)
    noise = _num(t, "noise", default=0.1)
    init_scale = _num(t, "init_scale", default=1.5)
    rng = np.random.Generator(np.random.PCG64(
        _int(t, "dataset_seed", default=3)))
    x = rng.standard_normal((d, m))
    w1_t = rng.standard_normal((c, hidden)) / math.sqrt(hidden)
    w2_t = rng.standard_normal((hidden, d)) / math.sqrt(d)
    y = w1_t @ np.tanh(w2_t @ x) + noise * rng.standard_normal((c, m))
    w1 = init_scale * rng.standard_normal((c, hidden))
    w2 = init_scale * rng.standard_normal((hidden, d))
    w0 = ParamPoint.from_arrays([("W1", w1), ("W2", w2)])
    return x, y, w0, hidden


def _build_two_layer_mse(t: dict) -> ProblemBuild:
    x, y, w0, hidden = _two_layer_data(t)
    data = make_dataset(x, y)
    act = activation(t.get("act", "tanh"))
    lam1 = _num(t, "lam1", default=1e-3)
    lam2 = _num(t, "lam2", default=1e-3)
    obj = make_two_layer_mse_l2(data, act, hidden=hidden, lam1=lam1, lam2=lam2)
    obj = obj.with_overrides(certificate=two_layer_mse_constants(
        act, data.x_spectral, lam1, lam2))
    return obj, w0, gaussian_sampler(obj)


def _build_two_layer_ce(t: dict) -> ProblemBuild:
    t = dict(t)
    t.setdefault("c", 1)
    if t["c"] != 1:
        raise ConfigError("binary cross-entropy needs c = 1")
    x, y, w0, hidden = _two_layer_data(t)
    labels = (y > 0.0).astype(np.float64)
    data = make_dataset(x, labels)
    act = activation(t.get("act", "tanh"))
    lam1 = _num(t, "lam1", default=1e-3)
    lam2 = _num(t, "lam2", default=1e-3)
    obj = make_two_layer_ce_l2(data, act, hidden=hidden, lam1=lam1, lam2=lam2)
    obj = obj.with_overrides(certificate=two_layer_ce_constants(
        act, data.x_spectral, lam1, lam2))
    return obj, w0, gaussian_sampler(obj)


def _build_deep_linear(t: dict) -> ProblemBuild:
    data, dims = _network_dataset(t)
    f_star = _num(t, "f_star")
    obj = make_deep_linear(data, dims, f_star=f_star)
    obj = obj.with_overrides(
        certificate=deep_linear_constants(data, dims, f_star=f_star))
    w0 = make_balanced_init(dims, mode="strong",
                            scale=_num(t, "init_scale", default=1.0),
                            seed=_int(t, "init_seed", default=0))
    return obj, w0, balanced_sampler(dims)


def _build_semi_linear(t: dict) -> ProblemBuild:
    data, dims = _network_dataset(t)
    h = _num(t, "h", required=True)
    slope = _num(t, "slope", default=0.5)
    obj = make_semi_linear(data, dims, slope=slope)
    obj = obj.with_overrides(
        certificate=semi_linear_constants(data, dims, b=slope, h=h))
    sampler = floor_sampler(dims, [h])
    rng = np.random.Generator(np.random.PCG64(_int(t, "init_seed", default=0)))
    return obj, sampler(rng), sampler


def _build_deep_leaky(t: dict) -> ProblemBuild:
    data, dims = _network_dataset(t)
    depth = len(dims) - 1
    slopes = t.get("slopes", [0.5] * (depth - 1))
    h_list = t.get("h_list", [1.0] * (depth - 1))
    obj = make_deep_leaky(data, dims, slopes=slopes)
    obj = obj.with_overrides(certificate=deep_leaky_constants(
        data, dims, slopes=slopes, h_list=h_list))
    sampler = floor_sampler(dims, list(h_list))
    rng = np.random.Generator(np.random.PCG64(_int(t, "init_seed", default=0)))
    return obj, sampler(rng), sampler


PROBLEM_BUILDERS: dict[str, Callable[[dict], ProblemBuild]] = {
    "exp_quadratic": _build_exp_quadratic,
    "runway": _build_runway,
    "pl_lower_bound": _build_pl_lower_bound,
    "pl_sin_quadratic": _build_pl_sin_quadratic,
    "interpolating_least_squares": _build_least_squares,
    "two_layer_mse": _build_two_layer_mse,
    "two_layer_ce": _build_two_layer_ce,
    "deep_linear": _build_deep_linear,
    "semi_linear": _build_semi_linear,
    "deep_leaky": _build_deep_leaky,
}


def build_problem(table: dict[str, Any]) -> ProblemBuild:
    """Build (objective, start point, region sampler) from a problem table."""
    name = table.get("name")
    if name not in PROBLEM_BUILDERS:
        known = ", ".join(sorted(PROBLEM_BUILDERS))
        raise ConfigError(f"unknown problem {name!r}; known: {known}")
    return PROBLEM_BUILDERS[name]({k: v for k, v in table.items()
                                   if k != "name"})


# ---------------------------------------------------------------------------
# Policy registry.  Builders may consult the objective (for certificates).
# ---------------------------------------------------------------------------

def _build_constant(t: dict, obj: Objective) -> StepPolicy:
    return Constant(eta=_num(t, "eta", required=True))


def _build_adaptive(t: dict, obj: Objective) -> StepPolicy:
    if t.get("from_certificate", False):
        cert = obj.certificate
        if cert is None:
            raise ConfigError(
                f"{obj.name} ships no certificate; pass h0/h1 explicitly")
        if cert.rho != 1.0:
            raise ConfigError(
                f"{obj.name}'s certificate has rho = {cert.rho:g}; reduce it "
                "to a rho = 1 pair at your start gap (rho_reduction) and "
                "pass h0/h1 explicitly")
        h0, h1, fs = cert.h0, cert.h1, cert.f_star
    else:
        h0 = _num(t, "h0", required=True)
        h1 = _num(t, "h1", required=True)
        fs = _num(t, "f_star", default=0.0)
    return TheoreticalAdaptive(h0=h0, h1=h1,
                               theta=_num(t, "theta", default=1.0), f_star=fs)


def _build_practical_clipped(t: dict, obj: Objective) -> StepPolicy:
    base = t.get("base")
    if not isinstance(base, dict):
        raise ConfigError("practical_clipped needs a [policy.base] table")
    return PracticalClipped(base=build_policy(base, obj),
                            c=_num(t, "c", required=True))


def _build_linear_warmup(t: dict, obj: Objective) -> StepPolicy:
    return LinearWarmup(peak=_num(t, "peak", required=True),
                        warmup_iters=_int(t, "warmup_iters", required=True),
                        total_iters=_int(t, "total_iters", required=True),
                        floor=_num(t, "floor", required=True))


def _build_wsd(t: dict, obj: Objective) -> StepPolicy:
    return WSD(peak=_num(t, "peak", required=True),
               warmup_iters=_int(t, "warmup_iters", required=True),
               decay_iters=_int(t, "decay_iters", required=True),
               total_iters=_int(t, "total_iters", required=True),
               floor=_num(t, "floor"))


def _build_cosine(t: dict, obj: Objective) -> StepPolicy:
    return Cosine(peak=_num(t, "peak", required=True),
                  total_iters=_int(t, "total_iters", required=True),
                  floor=_num(t, "floor", required=True))


POLICY_BUILDERS: dict[str, Callable[[dict, Objective], StepPolicy]] = {
    "constant": _build_constant,
    "adaptive": _build_adaptive,
    "practical_clipped": _build_practical_clipped,
    "linear_warmup": _build_linear_warmup,
    "wsd": _build_wsd,
    "cosine": _build_cosine,
}


def build_policy(table: dict[str, Any], obj: Objective) -> StepPolicy:
    """Build a step policy from its table (``adaptive`` may pull constants
    from the objective's certificate via ``from_certificate = true``)."""
    name = table.get("name")
    if name not in POLICY_BUILDERS:
        known = ", ".join(sorted(POLICY_BUILDERS))
        raise ConfigError(f"unknown policy {name!r}; known: {known}")
    return POLICY_BUILDERS[name]({k: v for k, v in table.items()
                                  if k != "name"}, obj)


# ---------------------------------------------------------------------------
# Parse / validate / serialize.
# ---------------------------------------------------------------------------

def _validate_table(raw: Any, key: str, source: str) -> dict:
    if key not in raw:
        raise ConfigError(f"{source}: missing [{key}] table")
    if not isinstance(raw[key], dict):
        raise ConfigError(f"{source}: [{key}] must be a table")
    table = raw[key]
    if "name" not in table or not isinstance(table["name"], str):
        raise ConfigError(f"{source}: [{key}] needs a string 'name'")
    return table


def _sweep_target_exists(cfg_dict: dict, path: str) -> bool:
    parts = path.split(".")
    node: Any = cfg_dict
    for p in parts[:-1]:
        if not isinstance(node, dict) or p not in node:
            return False
        node = node[p]
    return isinstance(node, dict) and parts[-1] in node \
        and isinstance(node[parts[-1]], _SCALARS)


def parse_config(text: str, source: str = "<string>") -> ExperimentConfig:
    """Parse and validate a TOML experiment config.

    Raises ConfigError with the source name (and the parser's line/column
    for syntax errors).
    """
    try:
        raw = tomli.loads(text)
    except tomli.TOMLDecodeError as e:
        raise ConfigError(f"{source}: {e}") from e

    problem = _validate_table(raw, "problem", source)
    policy = _validate_table(raw, "policy", source)

    unknown_top = set(raw) - {"problem", "policy", "stop", "seed", "outputs",
                              "sweep"}
    if unknown_top:
        raise ConfigError(
            f"{source}: unknown top-level keys: "
            f"{', '.join(sorted(unknown_top))}")

    stop_raw = raw.get("stop")
    if not isinstance(stop_raw, dict) or "max_iters" not in stop_raw:
        raise ConfigError(f"{source}: [stop] table with max_iters is required")
    unknown_stop = set(stop_raw) - {"max_iters", "grad_tol", "loss_tol",
                                    "divergence_guard"}
    if unknown_stop:
        raise ConfigError(
            f"{source}: unknown [stop] keys: "
            f"{', '.join(sorted(unknown_stop))}")
    try:
        stop = StopRule(
            max_iters=stop_raw["max_iters"],
            grad_tol=stop_raw.get("grad_tol"),
            loss_tol=stop_raw.get("loss_tol"),
            divergence_guard=stop_raw.get("divergence_guard", 1e12),
        )
    except Exception as e:
        raise ConfigError(f"{source}: invalid [stop]: {e}") from e

    seed = raw.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int) or seed < 0:
        raise ConfigError(f"{source}: 'seed' must be a non-negative integer")
    outputs = raw.get("outputs", "runs")
    if not isinstance(outputs, str):
        raise ConfigError(f"{source}: 'outputs' must be a string path")

    sweep_raw = raw.get("sweep", {})
    if not isinstance(sweep_raw, dict):
        raise ConfigError(f"{source}: [sweep] must be a table")
    cfg = ExperimentConfig(problem=problem, policy=policy, stop=stop,
                           seed=seed, outputs=outputs, sweep={})

    sweep: dict[str, list] = {}
    size = 1
    base = cfg.to_dict()
    for key in sorted(sweep_raw):
        vals = sweep_raw[key]
        if not isinstance(vals, list) or not vals:
            raise ConfigError(
                f"{source}: sweep.{key} must be a non-empty list")
        if any(not isinstance(v, _SCALARS) for v in vals):
            raise ConfigError(f"{source}: sweep.{key} must hold scalars")
        if not _sweep_target_exists(base, key) and key != "seed":
            raise ConfigError(
                f"{source}: sweep path {key!r} does not name an existing "
                "scalar field")
        sweep[key] = list(vals)
        size *= len(vals)
    if size > SWEEP_CAP:
        raise ConfigError(
            f"{source}: sweep size {size} exceeds the cap {SWEEP_CAP}")
    cfg = replace(cfg, sweep=sweep)

    # registry names must exist (parameters are validated at build time)
    if problem["name"] not in PROBLEM_BUILDERS:
        known = ", ".join(sorted(PROBLEM_BUILDERS))
        raise ConfigError(
            f"{source}: unknown problem {problem['name']!r}; known: {known}")
    if policy["name"] not in POLICY_BUILDERS:
        known = ", ".join(sorted(POLICY_BUILDERS))
        raise ConfigError(
            f"{source}: unknown policy {policy['name']!r}; known: {known}")
    return cfg


def load_config(path: str | Path) -> ExperimentConfig:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as e:
        raise ConfigError(f"{p}: cannot read config: {e}") from e
    return parse_config(text, source=str(p))


def _toml_key(key: str) -> str:
    if key and all(c.isalnum() or c in "-_" for c in key):
        return key
    escaped = key.replace("\\", "\\\\").replace('"', '\\"')
    return f'"{escaped}"'


def _toml_value(v: Any) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        if not math.isfinite(v):
            return "inf" if v > 0 else ("-inf" if v < 0 else "nan")
        r = repr(v)
        return r if ("e" in r or "." in r or "inf" in r or "nan" in r) \
            else r + ".0"
    if isinstance(v, str):
        return '"' + v.replace("\\", "\\\\").replace('"', '\\"') + '"'
    if isinstance(v, list):
        return "[" + ", ".join(_toml_value(x) for x in v) + "]"
    raise ConfigError(f"cannot serialize value of type {type(v).__name__}")


def _emit_table(lines: list[str], prefix: str, table: dict) -> None:
    scalars = {k: v for k, v in table.items() if not isinstance(v, dict)}
    subtables = {k: v for k, v in table.items() if isinstance(v, dict)}
    if prefix:
        lines.append(f"[{prefix}]")
    for k in sorted(scalars):
        lines.append(f"{_toml_key(k)} = {_toml_value(scalars[k])}")
    for k in sorted(subtables):
        if lines and lines[-1] != "":
            lines.append("")
        name = f"{prefix}.{_toml_key(k)}" if prefix else _toml_key(k)
        _emit_table(lines, name, subtables[k])


def serialize_config(cfg: ExperimentConfig) -> str:
    """Deterministic TOML for a validated config (sorted keys, stable float
    repr); ``parse_config(serialize_config(c))`` equals ``c``."""
    d = cfg.to_dict()
    lines: list[str] = []
    _emit_table(lines, "", d)
    return "\n".join(lines) + "\n"


def _set_path(d: dict, path: str, value: Any) -> None:
    parts = path.split(".")
    node = d
    for p in parts[:-1]:
        node = node.setdefault(p, {})
    node[parts[-1]] = value


def expand_sweep(cfg: ExperimentConfig) -> list[ExperimentConfig]:
    """Concrete configs from the sweep cross product, in sorted-key order.

    A config without sweeps expands to itself.  Each result has an empty
    sweep table and the swept values substituted.
    """
    if not cfg.sweep:
        return [cfg]
    keys = sorted(cfg.sweep)
    combos = itertools.product(*(cfg.sweep[k] for k in keys))
    out: list[ExperimentConfig] = []
    for combo in combos:
        d = cfg.to_dict()
        d.pop("sweep", None)
        for k, v in zip(keys, combo):
            _set_path(d, k, v)
        out.append(parse_config(_dict_to_toml(d), source="<sweep>"))
    if len(out) > SWEEP_CAP:
        raise ConfigError(f"sweep size {len(out)} exceeds the cap {SWEEP_CAP}")
    return out


def _dict_to_toml(d: dict) -> str:
    lines: list[str] = []
    _emit_table(lines, "", d)
    return "\n".join(lines) + "\n"
