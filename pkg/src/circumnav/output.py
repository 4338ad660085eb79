"""Run artefacts: trajectory CSV, summary JSON and optional SVG figures."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .config import to_dict
from .errors import OutputError
from .metrics import ErrorSummary

FMT = ".9g"

BASE_COLUMNS = ("t", "c_x", "c_y", "r", "c_hat_x", "c_hat_y", "r_hat",
                "c_hat_dot_x", "c_hat_dot_y", "r_hat_dot")
AGENT_COLUMNS = ("p{i}_x", "p{i}_y", "beta_{i}", "Dc_{i}", "Db_{i}",
                 "u{i}_x", "u{i}_y", "U{i}_x", "U{i}_y")


@dataclass
class OutputBundle:
    directory: Path
    trajectory: Path
    summary: Path
    plots: list = field(default_factory=list)


def header(n: int) -> list[str]:
    """CSV header; agent columns are numbered by ring position from 1."""
    cols = list(BASE_COLUMNS)
    for i in range(1, n + 1):
        cols += [c.format(i=i) for c in AGENT_COLUMNS]
    return cols


def trajectory_rows(rec) -> np.ndarray:
    n = rec.n
    base = np.column_stack([rec.t, rec.c, rec.r, rec.c_hat, rec.r_hat,
                            rec.c_hat_dot, rec.r_hat_dot])
    per = [np.column_stack([rec.p[:, i], rec.beta[:, i], rec.Dc[:, i], rec.Db[:, i],
                            rec.u[:, i], rec.U[:, i]]) for i in range(n)]
    return np.column_stack([base, *per])


def trajectory_csv(rec) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header(rec.n))
    for row in trajectory_rows(rec):
        w.writerow([format(float(v) + 0.0, FMT) for v in row])
    return buf.getvalue()


def summary_document(rec, summary: ErrorSummary, pe: dict | None = None) -> dict:
    return {
        "config": to_dict(rec.config),
        "ring_order": list(rec.order.perm),
        "satellite": {"c_hat0": list(rec.satellite.c_hat0), "r_hat0": rec.satellite.r_hat0},
        "completed_steps": rec.completed_steps,
        "summary": summary.to_dict(),
        "pe": pe,
        "invariants": {"violations": rec.violations, "count": len(rec.violations)},
        "events": dict(sorted(rec.events.items())),
    }


def write_outputs(rec, summary: ErrorSummary, directory, plot: bool = False,
                  pe: dict | None = None) -> OutputBundle:
    """Write ``trajectory.csv`` and ``summary.json`` (plus SVGs with ``plot``).

    Contents depend only on the record, so identical runs give identical bytes.
    """
    d = Path(directory)
    try:
        d.mkdir(parents=True, exist_ok=True)
        traj = d / "trajectory.csv"
        traj.write_text(trajectory_csv(rec))
        summ = d / "summary.json"
        summ.write_text(json.dumps(summary_document(rec, summary, pe), indent=2,
                                   sort_keys=False) + "\n")
        bundle = OutputBundle(d, traj, summ)
        if plot:
            from .plotting import render_all

            bundle.plots = render_all(rec, d / "plots")
    except OSError as exc:
        raise OutputError(f"cannot write outputs to {d}: {exc}") from exc
    return bundle


def read_trajectory(path) -> dict:
    """Load a trajectory CSV into a column-name -> array mapping."""
    p = Path(path)
    try:
        data = np.genfromtxt(p, delimiter=",", names=True, dtype=float, encoding="ascii")
    except OSError as exc:
        raise OutputError(f"cannot read {p}: {exc}") from exc
    return {name: np.atleast_1d(data[name]) for name in data.dtype.names}
