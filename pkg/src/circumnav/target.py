"""Ground-truth target process: a circle whose centre and radius move.

Velocities are drawn once per step and held over it (zero-order hold), so
within a step the target is affine in time. The simulation engine relies on
that to evaluate the truth at Runge-Kutta stage times.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .geometry import Vec2, as_vec

STATIONARY = "stationary"
RANDOM_WALK = "random_walk"
CIRCULAR_PATH = "circular_path"
PIECEWISE = "piecewise"
KINDS = (STATIONARY, RANDOM_WALK, CIRCULAR_PATH, PIECEWISE)


@dataclass(frozen=True)
class TargetState:
    c: Vec2
    r: float
    c_dot: Vec2 = Vec2(0.0, 0.0)
    r_dot: float = 0.0
    t: float = 0.0

    def __post_init__(self):
        if not self.r > 0:
            raise ValueError(f"target radius must be positive, got {self.r}")


@dataclass(frozen=True)
class TargetScript:
    """How the target moves.

    ``drift`` and ``noise`` parametrise the random walk
    ``c_dot = drift + noise * N(0, I)``, ``r_dot = noise_r * N(0, 1)``.
    ``eps_c`` / ``eps_r`` cap the realised speeds and ``r_min`` floors the
    radius.
    """

    kind: str = STATIONARY
    drift: tuple[float, float] = (0.5, 0.5)
    noise: float = 1.0
    noise_r: float = 1.0
    eps_c: float = 2.0
    eps_r: float = 1.5
    r_min: float = 0.5
    # circular path: centre of the path, angular rate (rad/s)
    path_centre: tuple[float, float] = (0.0, 0.0)
    omega: float = 0.0
    # piecewise: (duration, vx, vy, vr) segments, last one repeats forever
    segments: tuple[tuple[float, float, float, float], ...] = field(default_factory=tuple)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown target kind {self.kind!r}")
        if self.kind == PIECEWISE and not self.segments:
            raise ValueError("piecewise target needs at least one segment")


@dataclass(frozen=True)
class SatelliteEstimate:
    c_hat0: Vec2
    r_hat0: float

    def __post_init__(self):
        if not self.r_hat0 > 0:
            raise ValueError("satellite radius estimate must be positive")


@dataclass
class StepLog:
    """Counts of silent corrections made by ``step_target``."""

    centre_clips: int = 0
    radius_clips: int = 0
    radius_floors: int = 0


def _cap_norm(v: Vec2, cap: float) -> tuple[Vec2, bool]:
    n = v.norm()
    if n > cap:
        return v * (cap / n), True
    return v, False


def _segment_at(segments: Sequence, t: float):
    elapsed = 0.0
    for seg in segments:
        elapsed += seg[0]
        if t < elapsed - 1e-12:
            return seg
    return segments[-1]


def draw_velocity(s: TargetState, script: TargetScript, dt: float,
                  rng: np.random.Generator | None, log: StepLog | None = None):
    """Velocity held over the next step, after the speed caps."""
    if script.kind == STATIONARY:
        return Vec2(0.0, 0.0), 0.0
    if script.kind == RANDOM_WALK:
        a1, a2, a3 = rng.standard_normal(3)
        c_dot = Vec2(script.drift[0] + script.noise * a1, script.drift[1] + script.noise * a2)
        r_dot = script.noise_r * a3
    elif script.kind == CIRCULAR_PATH:
        # chord velocity: the centre lands exactly on the path after each step
        ox, oy = script.path_centre
        dx, dy = s.c.x - ox, s.c.y - oy
        th = script.omega * dt
        cos_t, sin_t = math.cos(th), math.sin(th)
        nx = ox + cos_t * dx - sin_t * dy
        ny = oy + sin_t * dx + cos_t * dy
        c_dot = Vec2((nx - s.c.x) / dt, (ny - s.c.y) / dt)
        r_dot = 0.0
    else:
        _, vx, vy, vr = _segment_at(script.segments, s.t)
        c_dot, r_dot = Vec2(vx, vy), vr

    c_dot, clipped = _cap_norm(c_dot, script.eps_c)
    if clipped and log is not None:
        log.centre_clips += 1
    if abs(r_dot) > script.eps_r:
        r_dot = math.copysign(script.eps_r, r_dot)
        if log is not None:
            log.radius_clips += 1
    # keep r >= r_min at the end of the step without breaking the affine hold
    floor_rate = (script.r_min - s.r) / dt
    if r_dot < floor_rate:
        r_dot = floor_rate
        if log is not None:
            log.radius_floors += 1
    return c_dot, float(r_dot)


def step_target(s: TargetState, script: TargetScript, dt: float,
                rng: np.random.Generator | None = None,
                log: StepLog | None = None) -> TargetState:
    """Advance the target by one zero-order-hold step.

    The returned state carries the velocity that was applied over the step.
    """
    if not dt > 0:
        raise ValueError("dt must be positive")
    c_dot, r_dot = draw_velocity(s, script, dt, rng, log)
    return TargetState(
        c=Vec2(s.c.x + c_dot.x * dt, s.c.y + c_dot.y * dt),
        r=max(s.r + r_dot * dt, script.r_min),
        c_dot=c_dot,
        r_dot=r_dot,
        t=s.t + dt,
    )


def with_velocity(s: TargetState, c_dot, r_dot: float) -> TargetState:
    return replace(s, c_dot=as_vec(c_dot), r_dot=float(r_dot))


def satellite_observe(s: TargetState, noise_c: float, noise_r: float,
                      rng: np.random.Generator | None = None,
                      offset_c=(0.0, 0.0), offset_r: float = 0.0,
                      r_floor: float = 0.1) -> SatelliteEstimate:
    """One-shot noisy snapshot of the target.

    ``offset_c`` / ``offset_r`` add a deterministic bias on top of the
    Gaussian noise; the paper-fig3 preset uses a pure radius bias of +10
    with no noise.
    """
    if noise_c < 0 or noise_r < 0:
        raise ValueError("noise scales must be non-negative")
    ex = ey = er = 0.0
    if noise_c > 0 or noise_r > 0:
        ex, ey, er = rng.standard_normal(3)
    c_hat0 = Vec2(s.c.x + offset_c[0] + noise_c * ex, s.c.y + offset_c[1] + noise_c * ey)
    r_hat0 = max(s.r + offset_r + noise_r * er, r_floor)
    return SatelliteEstimate(c_hat0, float(r_hat0))
