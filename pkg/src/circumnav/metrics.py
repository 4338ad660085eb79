"""Error summaries computed from a finished run."""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .errors import EmptyWindow
from .geometry import TWO_PI


@dataclass(frozen=True)
class ErrorSummary:
    cutoff: float
    samples: int
    max_Db: tuple[float, ...]
    max_c_err: float
    max_r_err: float
    max_beta_err: tuple[float, ...]
    max_abs_U: float
    control_bound_violations: int
    final_Db: tuple[float, ...]
    final_c_err: float
    final_r_err: float
    final_beta_err: float

    def to_dict(self) -> dict:
        d = asdict(self)
        return {k: list(v) if isinstance(v, tuple) else v for k, v in d.items()}


def summarize(record, transient_cutoff: float | None = None) -> ErrorSummary:
    """Worst-case errors over ``t >= transient_cutoff``.

    Defaults to the cutoff in the run's config. The ``final_*`` fields are
    taken at the last logged sample regardless of the cutoff.
    """
    cutoff = record.config.cutoff if transient_cutoff is None else float(transient_cutoff)
    mask = record.t >= cutoff - 1e-12
    if not mask.any():
        raise EmptyWindow(f"no samples at or after t = {cutoff:g}")
    n = record.n
    c_err = np.linalg.norm(record.c_hat - record.c, axis=1)
    r_err = np.abs(record.r_hat - record.r)
    beta_err = np.abs(record.beta - TWO_PI / n)
    U = record.U[mask]
    u_max = record.config.controller.u_max
    return ErrorSummary(
        cutoff=cutoff,
        samples=int(mask.sum()),
        max_Db=tuple(float(v) for v in record.Db[mask].max(axis=0)),
        max_c_err=float(c_err[mask].max()),
        max_r_err=float(r_err[mask].max()),
        max_beta_err=tuple(float(v) for v in beta_err[mask].max(axis=0)),
        max_abs_U=float(np.abs(U).max()),
        control_bound_violations=int(np.count_nonzero(np.abs(U) > u_max + 1e-12)),
        final_Db=tuple(float(v) for v in record.Db[-1]),
        final_c_err=float(c_err[-1]),
        final_r_err=float(r_err[-1]),
        final_beta_err=float(beta_err[-1].max()),
    )


def decay_fit(t, W, delta: float) -> float:
    """Largest gap between ``W`` and ``W[0] * exp(-delta * t)``."""
    t = np.asarray(t, dtype=float)
    W = np.asarray(W, dtype=float)
    return float(np.max(np.abs(W - W[0] * np.exp(-delta * (t - t[0])))))
