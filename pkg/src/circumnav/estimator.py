"""Adaptive estimation of the target circle from the sensing agent's distances.

Every signal the update laws need is the state derivative of a first-order
filter ``z' = -alpha z + input``, so measured distances are never
differentiated numerically. Filter inputs:

====  ======================  ==========================
z1    0.5 * Db**2             eta  = z1'
z2    0.5 * Dc**2             m    = z2'  (also eta2)
z3    Dc                      V    = z3'
z4    0.5 * |p1|**2           m2   = z4'
z5    p1                      V2   = z5'
====  ======================  ==========================

The update laws are ``r_hat' = -gamma V (eta - m + V r_hat)`` and
``c_hat' = -gamma V2 (eta2 - m2 + V2 . c_hat)``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from typing import Callable, NamedTuple, Union

import numpy as np

from .geometry import Vec2, as_vec
from .integrate import rk4_step

log = logging.getLogger(__name__)

FILTER_INIT_MODES = ("steady", "zero")


class Measurement(NamedTuple):
    Dc: float
    Db: float
    p1: Vec2


class FilterOutputs(NamedTuple):
    dz1: float
    dz2: float
    dz3: float
    dz4: float
    dz5: Vec2

    @property
    def eta(self) -> float:
        return self.dz1

    @property
    def m_sig(self) -> float:
        return self.dz2

    @property
    def V(self) -> float:
        return self.dz3

    @property
    def eta2(self) -> float:
        return self.dz2

    @property
    def m2(self) -> float:
        return self.dz4

    @property
    def V2(self) -> Vec2:
        return self.dz5


@dataclass(frozen=True)
class FilterBank:
    z1: float = 0.0
    z2: float = 0.0
    z3: float = 0.0
    z4: float = 0.0
    z5: Vec2 = Vec2(0.0, 0.0)
    alpha: float = 1.0

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError("filter pole alpha must be positive")

    @classmethod
    def initial(cls, alpha: float, m: Measurement | None = None, mode: str = "steady") -> "FilterBank":
        """Filters at rest.

        ``"zero"`` starts every state at 0. ``"steady"`` starts each state at
        its equilibrium for the first measurement (``input / alpha``), which
        removes the start-up pulse that ``"zero"`` injects into eta, m and V.
        """
        if mode == "zero" or m is None:
            return cls(alpha=alpha)
        if mode != "steady":
            raise ValueError(f"unknown filter init mode {mode!r}")
        p = as_vec(m.p1)
        return cls(
            z1=0.5 * m.Db * m.Db / alpha,
            z2=0.5 * m.Dc * m.Dc / alpha,
            z3=m.Dc / alpha,
            z4=0.5 * p.dot(p) / alpha,
            z5=Vec2(p.x / alpha, p.y / alpha),
            alpha=alpha,
        )

    def as_array(self) -> np.ndarray:
        return np.array([self.z1, self.z2, self.z3, self.z4, self.z5.x, self.z5.y])

    @classmethod
    def from_array(cls, z, alpha: float) -> "FilterBank":
        return cls(float(z[0]), float(z[1]), float(z[2]), float(z[3]),
                   Vec2(float(z[4]), float(z[5])), alpha)


def filter_rates(alpha, z1, z2, z3, z4, z5x, z5y, Dc, Db, px, py):
    """Scalar form of :func:`filter_rhs` for the simulation hot loop."""
    return (
        -alpha * z1 + 0.5 * Db * Db,
        -alpha * z2 + 0.5 * Dc * Dc,
        -alpha * z3 + Dc,
        -alpha * z4 + 0.5 * (px * px + py * py),
        -alpha * z5x + px,
        -alpha * z5y + py,
    )


def filter_rhs(f: FilterBank, m: Measurement) -> FilterOutputs:
    d1, d2, d3, d4, d5x, d5y = filter_rates(
        f.alpha, f.z1, f.z2, f.z3, f.z4, f.z5[0], f.z5[1], m.Dc, m.Db, m.p1[0], m.p1[1])
    return FilterOutputs(d1, d2, d3, d4, Vec2(d5x, d5y))


def radius_estimator_rhs(V: float, eta: float, m_sig: float, r_hat: float, gamma: float) -> float:
    return -gamma * V * (eta - m_sig + V * r_hat)


def center_estimator_rhs(V2, eta2: float, m2: float, c_hat, gamma: float) -> Vec2:
    k = -gamma * (eta2 - m2 + V2[0] * c_hat[0] + V2[1] * c_hat[1])
    return Vec2(k * V2[0], k * V2[1])


@dataclass(frozen=True)
class EstimatorState:
    filters: FilterBank
    r_hat: float
    c_hat: Vec2
    gamma: float
    r_floor: float = 0.1
    r_clips: int = 0

    def __post_init__(self):
        if not self.gamma > 0:
            raise ValueError("adaptation gain gamma must be positive")
        if not self.r_hat > 0:
            raise ValueError("radius estimate must be positive")

    def as_array(self) -> np.ndarray:
        return np.concatenate([self.filters.as_array(), [self.r_hat, self.c_hat.x, self.c_hat.y]])


def estimator_rates(y, m: Measurement, alpha: float, gamma: float) -> np.ndarray:
    """Derivative of the flat estimator state ``[z1..z4, z5x, z5y, r_hat, cx, cy]``."""
    d = filter_rates(alpha, y[0], y[1], y[2], y[3], y[4], y[5], m.Dc, m.Db, m.p1[0], m.p1[1])
    rhd = radius_estimator_rhs(d[2], d[0], d[1], y[6], gamma)
    chd = center_estimator_rhs((d[4], d[5]), d[1], d[3], (y[7], y[8]), gamma)
    return np.array([*d, rhd, chd[0], chd[1]])


MeasurementSource = Union[Measurement, Callable[[float], Measurement]]


def estimator_step(e: EstimatorState, m: MeasurementSource, dt: float):
    """Advance filters and estimates by one RK4 step.

    ``m`` is either a measurement held over the step or a callable returning
    the measurement at an offset ``h`` in ``[0, dt]`` into the step.
    Returns the new state together with ``r_hat'`` and ``c_hat'`` evaluated
    at the post-step state and the end-of-step measurement.
    """
    if not dt > 0:
        raise ValueError("dt must be positive")
    source = m if callable(m) else (lambda h: m)
    alpha = e.filters.alpha

    def rhs(h, y):
        return estimator_rates(y, source(h), alpha, e.gamma)

    y = rk4_step(e.as_array(), rhs, dt)
    r_hat = float(y[6])
    clips = e.r_clips
    if r_hat < e.r_floor:
        log.warning("radius estimate %.3g clipped to floor %.3g", r_hat, e.r_floor)
        r_hat = e.r_floor
        y[6] = r_hat
        clips += 1
    new = replace(e, filters=FilterBank.from_array(y[:6], alpha), r_hat=r_hat,
                  c_hat=Vec2(float(y[7]), float(y[8])), r_clips=clips)
    dy = estimator_rates(y, source(dt), alpha, e.gamma)
    return new, float(dy[6]), Vec2(float(dy[7]), float(dy[8]))
