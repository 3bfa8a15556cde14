"""Read-only reporting over persisted run directories.

``emit_report`` loads each run's ``summary.json`` and ``trajectory.csv``
from under the output root and renders one comparison row per run, as both
a markdown table and a CSV.  It never writes into the run directories and
never recomputes anything: missing or unreadable runs are skipped with a
warning line in the markdown.
"""

from __future__ import annotations

import json
import warnings
from pathlib import Path
from typing import Sequence

__all__ = ["emit_report", "REPORT_COLUMNS"]

REPORT_COLUMNS = (
    "run_id", "problem", "policy", "seed", "stop_reason", "n_steps",
    "final_f", "final_grad_norm", "first_step", "peak_step", "final_step",
)


def _step_trace(traj_path: Path) -> tuple[float, float, float] | None:
    """(first, peak, final) effective step sizes from a trajectory CSV.

    The terminal record's step is 0.0 by convention (no step leaves it) and
    is excluded; ``final`` is the last step actually taken.
    """
    try:
        lines = traj_path.read_text().splitlines()
    except OSError:
        return None
    header, rows = lines[0].split(","), lines[1:]
    col = header.index("step_size")
    steps = [float(r.split(",")[col]) for r in rows[:-1]] if len(rows) > 1 \
        else []
    if not steps:
        return None
    return steps[0], max(steps), steps[-1]


def _load_row(run_dir: Path) -> dict[str, str]:
    summary = json.loads((run_dir / "summary.json").read_text())
    row = {k: str(summary[k]) for k in
           ("run_id", "problem", "policy", "seed", "stop_reason", "n_steps")}
    row["final_f"] = f"{summary['final_f']:.6g}"
    row["final_grad_norm"] = f"{summary['final_grad_norm']:.6g}"
    trace = _step_trace(run_dir / "trajectory.csv")
    for key, v in zip(("first_step", "peak_step", "final_step"),
                      trace if trace else ("", "", "")):
        row[key] = f"{v:.6g}" if v != "" else ""
    return row


def emit_report(run_ids: Sequence[str],
                out_root: str | Path = "runs") -> tuple[str, str]:
    """Render (markdown, csv) comparing the named runs under ``out_root``.

    Purely read-only: consumes ``summary.json`` and ``trajectory.csv`` as
    written by the runner.  Unknown or unreadable run ids are listed as
    skipped (with a ``UserWarning``) rather than failing the report; an
    empty id list yields an empty table.
    """
    root = Path(out_root)
    rows: list[dict[str, str]] = []
    skipped: list[str] = []
    for rid in run_ids:
        run_dir = root / rid
        try:
            rows.append(_load_row(run_dir))
        except (OSError, KeyError, ValueError, json.JSONDecodeError):
            skipped.append(rid)
    if skipped:
        warnings.warn(f"skipped unreadable runs: {', '.join(skipped)}",
                      UserWarning, stacklevel=2)

    md_lines = ["# Run report", "",
                "| " + " | ".join(REPORT_COLUMNS) + " |",
                "|" + "|".join("---" for _ in REPORT_COLUMNS) + "|"]
    md_lines += ["| " + " | ".join(r[c] for c in REPORT_COLUMNS) + " |"
                 for r in rows]
    if skipped:
        md_lines += ["", "Skipped (missing or unreadable): "
                     + ", ".join(f"`{rid}`" for rid in skipped)]
    markdown = "\n".join(md_lines) + "\n"

    csv_lines = [",".join(REPORT_COLUMNS)]
    csv_lines += [",".join(r[c] for c in REPORT_COLUMNS) for r in rows]
    csv = "\n".join(csv_lines) + "\n"
    return markdown, csv
