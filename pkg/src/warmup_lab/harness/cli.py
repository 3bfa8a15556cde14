"""Command-line entry point.

Subcommands:

- ``run <config.toml> [--jobs N]``      execute a config (sweeps in parallel)
- ``experiment <name> [--out DIR]``     run one canned experiment
- ``constants <problem.toml>``          print a problem's analytic certificate
- ``verify <problem.toml> [--cert ..]`` sample-check a curvature certificate
- ``lemmas <problem.toml>``             sample-check the core inequalities
- ``report <ids...> [--root DIR]``      aggregate persisted runs (read-only)

Exit codes: 0 success, 1 a requested check found violations, 2 bad usage or
a config that failed to parse/validate.  A diverged run is a recorded
outcome, not an error exit.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np
import tomli

from ..errors import WarmupLabError
from ..problems.types import SmoothnessCertificate
from ..theory import check_descent_step, check_gradient_bound
from .config import build_problem, load_config
from .experiments import EXPERIMENTS, run_experiment
from .report import emit_report
from .runner import resolve_out_root, run_from_config

__all__ = ["main"]


def _load_problem(path: str):
    """(objective, start point, region sampler) from a TOML [problem] table."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise WarmupLabError(f"{path}: {exc}") from exc
    try:
        doc = tomli.loads(text)
    except tomli.TOMLDecodeError as exc:
        raise WarmupLabError(f"{path}: TOML parse error: {exc}") from exc
    table = doc.get("problem")
    if not isinstance(table, dict) or "name" not in table:
        raise WarmupLabError(
            f"{path}: expected a [problem] table with a 'name' key")
    return build_problem(table)


def _cmd_run(args: argparse.Namespace) -> int:
    cfg = load_config(args.config)
    records = run_from_config(cfg, jobs=args.jobs)
    for rec in records:
        print(f"{rec.run_id}  {rec.summary['problem']}/{rec.summary['policy']}"
              f"  stop={rec.summary['stop_reason']}"
              f"  n_steps={rec.summary['n_steps']}"
              f"  final_f={rec.summary['final_f']:.6g}"
              f"  -> {Path(rec.paths['summary.json']).parent}")
    return 0


def _cmd_experiment(args: argparse.Namespace) -> int:
    if args.name not in EXPERIMENTS:
        print(f"unknown experiment {args.name!r}; available:", file=sys.stderr)
        for name in sorted(EXPERIMENTS):
            print(f"  {name}", file=sys.stderr)
        return 2
    report = run_experiment(args.name, out_root=args.out, jobs=args.jobs)
    print(report.markdown)
    print(f"[report written to {report.report_path}]", file=sys.stderr)
    return 0


def _cmd_constants(args: argparse.Namespace) -> int:
    obj, _w0, _sampler = _load_problem(args.problem)
    print(f"problem: {obj.name} (dim {obj.dim})")
    if obj.f_star is not None:
        print(f"optimal value: {obj.f_star!r}")
    cert = obj.certificate
    if cert is None:
        print("no analytic certificate available")
        return 1
    print(f"h0: {cert.h0!r}")
    print(f"h1: {cert.h1!r}")
    print(f"rho: {cert.rho!r}")
    print(f"bound baseline f_star: {cert.f_star!r}")
    print(f"region: {cert.region}")
    return 0


def _parse_cert(text: str) -> SmoothnessCertificate:
    parts = [p.strip() for p in text.split(",")]
    if not 2 <= len(parts) <= 4:
        raise WarmupLabError(
            "--cert expects 'h0,h1[,rho[,f_star]]' (2 to 4 numbers)")
    try:
        vals = [float(p) for p in parts]
    except ValueError as exc:
        raise WarmupLabError(f"--cert: {exc}") from exc
    h0, h1 = vals[0], vals[1]
    rho = vals[2] if len(vals) >= 3 else 1.0
    f_star = vals[3] if len(vals) == 4 else 0.0
    return SmoothnessCertificate(h0=h0, h1=h1, f_star=f_star, rho=rho,
                                 region="cli override")


def _cmd_verify(args: argparse.Namespace) -> int:
    from ..smoothness import verify_certificate

    obj, _w0, sampler = _load_problem(args.problem)
    cert = _parse_cert(args.cert) if args.cert else obj.certificate
    if cert is None:
        print("problem carries no certificate; pass one with --cert",
              file=sys.stderr)
        return 2
    report = verify_certificate(obj, cert, sampler, n_points=args.points,
                                seed=args.seed)
    status = "PASS" if report.passed else "FAIL"
    print(f"{status}: {len(report.violations)} violation(s) over "
          f"{report.n_points} points (tol {report.tol:.3g}, "
          f"worst margin {report.worst_margin:.6g})")
    for v in report.violations[:10]:
        print(f"  point {v.index}: smoothness {v.smoothness:.6g} > "
              f"bound {v.bound:.6g} (excess {v.excess:.3g})")
    return 0 if report.passed else 1


def _cmd_lemmas(args: argparse.Namespace) -> int:
    obj, _w0, sampler = _load_problem(args.problem)
    cert = obj.certificate
    if cert is None:
        print("problem carries no certificate; lemma checks need one",
              file=sys.stderr)
        return 2
    rng = np.random.Generator(np.random.PCG64(args.seed))
    points = [sampler(rng) for _ in range(args.points)]

    reports = [check_gradient_bound(obj, cert, points)]
    for w in points:
        gap = max(obj.value(w) - cert.f_star, 0.0)
        eta = 1.0 / (10.0 * (cert.h0 + cert.h1 * gap ** cert.rho))
        reports.append(check_descent_step(obj, cert, w, eta))

    n_checked = sum(r.n_checked for r in reports)
    n_skipped = sum(r.n_out_of_scope for r in reports)
    violations = [v for r in reports for v in r.violations]
    worst = max(r.worst_margin for r in reports)
    ok = not violations
    print(f"{'PASS' if ok else 'FAIL'}: gradient-bound + descent lemmas; "
          f"{n_checked} checks, {n_skipped} out of scope, "
          f"{len(violations)} violation(s), worst margin {worst:.6g}")
    return 0 if ok else 1


def _cmd_report(args: argparse.Namespace) -> int:
    root = args.root if args.root is not None else str(resolve_out_root("runs"))
    markdown, csv = emit_report(args.ids, out_root=root)
    print(markdown)
    if args.csv:
        Path(args.csv).write_text(csv)
        print(f"[csv written to {args.csv}]", file=sys.stderr)
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="warmup-lab",
        description="Loss-adaptive step-size laboratory: certified curvature "
                    "bounds, iteration predictors, and a deterministic "
                    "experiment runner.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="execute a TOML experiment config")
    p.add_argument("config", help="path to config.toml")
    p.add_argument("--jobs", type=int, default=None,
                   help="parallel sweep workers (default: hardware threads)")
    p.set_defaults(fn=_cmd_run)

    p = sub.add_parser("experiment", help="run a canned experiment")
    p.add_argument("name", help="experiment name")
    p.add_argument("--out", default=None, help="output root directory")
    p.add_argument("--jobs", type=int, default=None)
    p.set_defaults(fn=_cmd_experiment)

    p = sub.add_parser("constants",
                       help="print a problem's analytic certificate")
    p.add_argument("problem", help="TOML file with a [problem] table")
    p.set_defaults(fn=_cmd_constants)

    p = sub.add_parser("verify", help="sample-check a curvature certificate")
    p.add_argument("problem", help="TOML file with a [problem] table")
    p.add_argument("--cert", default=None,
                   help="override certificate as 'h0,h1[,rho[,f_star]]'")
    p.add_argument("--points", type=int, default=500)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(fn=_cmd_verify)

    p = sub.add_parser("lemmas",
                       help="sample-check gradient-bound and descent lemmas")
    p.add_argument("problem", help="TOML file with a [problem] table")
    p.add_argument("--points", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(fn=_cmd_lemmas)

    p = sub.add_parser("report", help="aggregate persisted runs (read-only)")
    p.add_argument("ids", nargs="*", help="run ids under the output root")
    p.add_argument("--root", default=None,
                   help="output root (default: WARMUP_LAB_OUT or ./runs)")
    p.add_argument("--csv", default=None, help="also write the CSV here")
    p.set_defaults(fn=_cmd_report)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except WarmupLabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
