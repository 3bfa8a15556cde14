"""Experiment harness: TOML configs, a deterministic runner with CSV/JSON
artifacts, canned desk-scale experiments, and report aggregation."""

from .config import (
    ExperimentConfig,
    PROBLEM_BUILDERS,
    POLICY_BUILDERS,
    SWEEP_CAP,
    build_policy,
    build_problem,
    expand_sweep,
    load_config,
    parse_config,
    serialize_config,
)
from .runner import RunRecord, TOOL_VERSION, resolve_out_root, run_from_config
from .experiments import EXPERIMENTS, run_experiment
from .report import emit_report

__all__ = [
    "ExperimentConfig",
    "PROBLEM_BUILDERS",
    "POLICY_BUILDERS",
    "SWEEP_CAP",
    "build_policy",
    "build_problem",
    "expand_sweep",
    "load_config",
    "parse_config",
    "serialize_config",
    "RunRecord",
    "TOOL_VERSION",
    "resolve_out_root",
    "run_from_config",
    "EXPERIMENTS",
    "run_experiment",
    "emit_report",
]
