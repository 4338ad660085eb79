"""Classical fixed-step Runge-Kutta integration."""

from __future__ import annotations

from typing import Callable

import numpy as np

from .errors import NonFiniteState


def rk4_step(y, rhs: Callable, dt: float, t: float = 0.0) -> np.ndarray:
    """One classical RK4 step of ``y' = rhs(t, y)``.

    Raises NonFiniteState if the result contains NaN or Inf.
    """
    if not dt > 0:
        raise ValueError("dt must be positive")
    y = np.asarray(y, dtype=float)
    half = 0.5 * dt
    k1 = np.asarray(rhs(t, y), dtype=float)
    k2 = np.asarray(rhs(t + half, y + half * k1), dtype=float)
    k3 = np.asarray(rhs(t + half, y + half * k2), dtype=float)
    k4 = np.asarray(rhs(t + dt, y + dt * k3), dtype=float)
    out = y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    if not np.all(np.isfinite(out)):
        raise NonFiniteState(f"non-finite state after RK4 step at t={t + dt:g}")
    return out


def integrate(y0, rhs: Callable, dt: float, steps: int, t0: float = 0.0) -> np.ndarray:
    """Fixed-step trajectory, shape ``(steps + 1, len(y0))``."""
    y = np.asarray(y0, dtype=float)
    out = np.empty((steps + 1, y.size))
    out[0] = y
    t = t0
    for k in range(steps):
        y = rk4_step(y, rhs, dt, t)
        t = t0 + (k + 1) * dt
        out[k + 1] = y
    return out
