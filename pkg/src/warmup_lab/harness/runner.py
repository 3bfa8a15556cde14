"""Deterministic experiment runner with on-disk artifacts.

Each concrete config (after sweep expansion) becomes one run directory
``<out_root>/<run-id>/`` holding:

- ``trajectory.csv``   — columns (iter, f, grad_norm, step_size,
  dist_to_solution), in that order; dist cells are empty when the problem
  has no solution projector.  Byte-for-byte reproducible for identical
  config + seed on the same build.
- ``summary.json``     — metadata, final stats, and the config snapshot.
- ``smoothness_trace.csv`` — per-step secant smoothness vs loss gap (header
  only when the trajectory is too short to give secants).
- ``config.toml``      — the concrete config snapshot that produced the run.

The run id is a hash of (config snapshot, seed, tool version), so rerunning
the same experiment overwrites the same directory instead of accumulating
near-duplicates.  Sweeps run in a thread pool (``jobs`` workers); runs share
no mutable state.
"""

from __future__ import annotations

import hashlib
import json
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Any

from .. import __version__
from ..core import Objective
from ..errors import CapabilityError
from ..optimize import PRNG_ID, Trajectory, attach_distance_tracking, run_gd
from ..smoothness import local_smoothness_trace
from .config import (
    ExperimentConfig,
    build_policy,
    build_problem,
    expand_sweep,
    serialize_config,
)

__all__ = [
    "RunRecord",
    "TOOL_VERSION",
    "TRAJECTORY_COLUMNS",
    "resolve_out_root",
    "run_id_for",
    "run_from_config",
    "write_run_artifacts",
]

TOOL_VERSION = __version__

TRAJECTORY_COLUMNS = ("iter", "f", "grad_norm", "step_size",
                      "dist_to_solution")

OUT_ENV_VAR = "WARMUP_LAB_OUT"


@dataclass(frozen=True)
class RunRecord:
    """Everything needed to audit or reproduce one finished run."""

    run_id: str
    config: ExperimentConfig
    summary: dict[str, Any]
    paths: dict[str, str]
    tool_version: str
    prng_id: str
    duration_s: float


def resolve_out_root(configured: str) -> Path:
    """Output root: the WARMUP_LAB_OUT env var wins over the config value."""
    env = os.environ.get(OUT_ENV_VAR)
    return Path(env) if env else Path(configured)


def run_id_for(cfg: ExperimentConfig) -> str:
    """Hash of (config snapshot, seed, tool version) — seed is part of the
    snapshot, and the version goes in explicitly."""
    snapshot = serialize_config(cfg)
    digest = hashlib.sha256(
        (snapshot + "\x00" + TOOL_VERSION).encode()).hexdigest()
    return digest[:12]


def _fmt(v: float) -> str:
    return repr(float(v))


def trajectory_csv_text(traj: Trajectory) -> str:
    """Render a trajectory as CSV with the fixed column order."""
    lines = [",".join(TRAJECTORY_COLUMNS)]
    for r in traj.records:
        dist = "" if r.dist_to_solution is None else _fmt(r.dist_to_solution)
        lines.append(",".join([
            str(r.iter), _fmt(r.f), _fmt(r.grad_norm), _fmt(r.step_size), dist,
        ]))
    return "\n".join(lines) + "\n"


def smoothness_csv_text(obj: Objective, traj: Trajectory) -> str:
    lines = ["iter,loss_gap,smoothness,method"]
    try:
        trace = local_smoothness_trace(obj, traj)
    except CapabilityError:
        trace = []
    for s in trace:
        lines.append(
            f"{s.iter},{_fmt(s.loss_gap)},{_fmt(s.smoothness)},{s.method}")
    return "\n".join(lines) + "\n"


def write_run_artifacts(run_dir: Path, cfg: ExperimentConfig, obj: Objective,
                        traj: Trajectory, duration_s: float,
                        extra_summary: dict[str, Any] | None = None,
                        ) -> tuple[dict[str, Any], dict[str, str]]:
    """Write the three artifact files plus the config snapshot; returns
    (summary dict, path map).  Shared by the runner and the canned
    experiments so every run directory looks the same."""
    run_dir.mkdir(parents=True, exist_ok=True)
    if obj.project_solution is not None and traj.snapshots:
        traj = attach_distance_tracking(traj, obj)

    (run_dir / "trajectory.csv").write_text(trajectory_csv_text(traj))
    (run_dir / "smoothness_trace.csv").write_text(
        smoothness_csv_text(obj, traj))
    (run_dir / "config.toml").write_text(serialize_config(cfg))

    final = traj.final
    summary: dict[str, Any] = {
        "run_id": run_dir.name,
        "problem": cfg.problem.get("name"),
        "policy": cfg.policy.get("name"),
        "seed": cfg.seed,
        "stop_reason": traj.stop_reason,
        "n_steps": traj.n_steps,
        "final_iter": final.iter,
        "final_f": final.f,
        "final_grad_norm": final.grad_norm,
        "tool_version": TOOL_VERSION,
        "prng_id": PRNG_ID,
        "duration_s": duration_s,
        "config": cfg.to_dict(),
        "artifacts": ["config.toml", "smoothness_trace.csv", "summary.json",
                      "trajectory.csv"],
    }
    if extra_summary:
        summary.update(extra_summary)
    (run_dir / "summary.json").write_text(
        json.dumps(summary, sort_keys=True, indent=2) + "\n")
    paths = {name: str(run_dir / name) for name in summary["artifacts"]}
    return summary, paths


def _execute_one(cfg: ExperimentConfig, out_root: Path) -> RunRecord:
    start = time.monotonic()
    obj, w0, _sampler = build_problem(cfg.problem)
    policy = build_policy(cfg.policy, obj)
    traj = run_gd(obj, w0, policy, cfg.stop)
    duration = time.monotonic() - start
    rid = run_id_for(cfg)
    summary, paths = write_run_artifacts(out_root / rid, cfg, obj, traj,
                                         duration)
    return RunRecord(run_id=rid, config=cfg, summary=summary, paths=paths,
                     tool_version=TOOL_VERSION, prng_id=PRNG_ID,
                     duration_s=duration)


def run_from_config(cfg: ExperimentConfig, out_root: str | Path | None = None,
                    jobs: int | None = None) -> list[RunRecord]:
    """Execute a config (expanding sweeps) and persist every run.

    Divergence is a recorded outcome (stop_reason ``diverged``), never an
    exception.  Results come back in sweep order regardless of scheduling.
    """
    root = Path(out_root) if out_root is not None \
        else resolve_out_root(cfg.outputs)
    concrete = expand_sweep(cfg)
    if len(concrete) == 1:
        return [_execute_one(concrete[0], root)]
    workers = jobs if jobs and jobs > 0 else (os.cpu_count() or 1)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda c: _execute_one(c, root), concrete))
