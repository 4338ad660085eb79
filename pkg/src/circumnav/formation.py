"""Ring ordering around the estimated centre and the angle-consensus model."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .geometry import TWO_PI, EPS_MIN, ccw_angle
from .errors import SingularBearing


@dataclass(frozen=True)
class RingOrder:
    """``perm[k]`` is the agent id occupying ring position ``k`` (0-based).

    The sensing agent is always ``perm[0]``.
    """

    perm: tuple[int, ...]

    def __post_init__(self):
        if sorted(self.perm) != list(range(len(self.perm))):
            raise ValueError(f"not a permutation: {self.perm}")

    @property
    def anchor(self) -> int:
        return self.perm[0]

    def __len__(self):
        return len(self.perm)

    def arrange(self, positions):
        """Reorder per-agent rows into ring-position order."""
        return [positions[i] for i in self.perm]


def _offset(p, c_hat):
    v = (p[0] - c_hat[0], p[1] - c_hat[1])
    if np.hypot(*v) < EPS_MIN:
        raise SingularBearing(f"agent at {tuple(p)} coincides with estimated centre")
    return v


def order_agents(positions: Sequence, c_hat, sensing_index: int = 0) -> RingOrder:
    """Sensing agent first, the rest by increasing ccw angle from it.

    Agents on the same ray from the centre are ordered by id.
    """
    n = len(positions)
    if not 0 <= sensing_index < n:
        raise IndexError("sensing agent index out of range")
    offsets = [_offset(p, c_hat) for p in positions]
    ref = offsets[sensing_index]
    others = [i for i in range(n) if i != sensing_index]
    others.sort(key=lambda i: (ccw_angle(ref, offsets[i]), i))
    return RingOrder((sensing_index, *others))


def compute_betas(order: RingOrder, positions: Sequence, c_hat) -> np.ndarray:
    """Angle from each ring position to the next one, wrapping n -> 1."""
    ring = [_offset(positions[i], c_hat) for i in order.perm]
    n = len(ring)
    return np.array([ccw_angle(ring[k], ring[(k + 1) % n]) for k in range(n)])


def ring_incidence(n: int) -> np.ndarray:
    """Incidence matrix of the directed ring 1 -> 2 -> ... -> n -> 1.

    Edge ``j`` leaves vertex ``j`` (+1) and enters vertex ``j+1`` (-1).
    """
    if n < 2:
        raise ValueError("a ring needs at least two vertices")
    B = np.zeros((n, n))
    for j in range(n):
        B[j, j] = 1.0
        B[(j + 1) % n, j] = -1.0
    return B


def beta_reference_rhs(beta, delta: float) -> np.ndarray:
    """``beta' = -delta B^T beta``, i.e. ``beta_i' = delta (beta_{i+1} - beta_i)``."""
    if not delta > 0:
        raise ValueError("delta must be positive")
    beta = np.asarray(beta, dtype=float)
    return delta * (np.roll(beta, -1) - beta)


def consensus_error(beta) -> float:
    beta = np.asarray(beta, dtype=float)
    return float(np.max(np.abs(beta - TWO_PI / beta.size)))
