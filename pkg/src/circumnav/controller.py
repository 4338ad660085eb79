"""Per-agent circumnavigation control law and actuator realisation."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .geometry import Vec2

SCALE = "scale"
SATURATE = "saturate"


@dataclass(frozen=True)
class ControllerParams:
    mode: str = SATURATE
    delta: float = 1.0
    u_max: float = 1.5

    def __post_init__(self):
        if self.mode not in (SCALE, SATURATE):
            raise ValueError(f"unknown actuation mode {self.mode!r}")
        if not (self.delta > 0 and self.u_max > 0):
            raise ValueError("delta and u_max must be positive")


@dataclass(frozen=True)
class ControlCommand:
    u: Vec2
    U: Vec2


def control_law(c_hat_dot, r_hat_dot: float, Dc_hat: float, r_hat: float,
                beta_i: float, psi_i) -> Vec2:
    """Feed-forward of the centre estimate, radial approach, tangential spacing.

    ``u = c_hat' + ((Dc_hat - r_hat) - r_hat') psi + beta Dc_hat E psi``
    with ``E psi = (psi_y, -psi_x)``.
    """
    radial = (Dc_hat - r_hat) - r_hat_dot
    tang = beta_i * Dc_hat
    px, py = psi_i
    return Vec2(c_hat_dot[0] + radial * px + tang * py,
                c_hat_dot[1] + radial * py - tang * px)


def apply_actuation(u, params: ControllerParams) -> Vec2:
    ux, uy = u
    if params.mode == SCALE:
        return Vec2(params.delta * ux, params.delta * uy)
    n = math.hypot(ux, uy)
    if n > params.u_max:
        k = params.u_max / n
        return Vec2(ux * k, uy * k)
    return Vec2(ux, uy)


def command(u, params: ControllerParams) -> ControlCommand:
    return ControlCommand(Vec2(*u), apply_actuation(u, params))
