import math

import numpy as np
import pytest
from scipy.linalg import expm

from circumnav.errors import NonFiniteState
from circumnav.formation import ring_incidence
from circumnav.integrate import integrate, rk4_step


def test_zero_field_leaves_state():
    y = np.array([1.5, -2.0])
    assert rk4_step(y, lambda t, x: np.zeros(2), 0.1).tolist() == [1.5, -2.0]


def test_exponential_decay():
    y = np.array([1.0])
    for _ in range(100):
        y = rk4_step(y, lambda t, x: -x, 0.01)
    assert abs(y[0] - math.exp(-1)) < 1e-9


def test_ring_matrix_exponential():
    A = -ring_incidence(3).T
    y0 = np.array([0.5, 2.0, 2 * math.pi - 2.5])
    traj = integrate(y0, lambda t, x: A @ x, 0.01, 100)
    assert np.allclose(traj[-1], expm(A) @ y0, atol=1e-8, rtol=0)


def test_time_argument_at_stages():
    seen = []

    def rhs(t, y):
        seen.append(t)
        return np.ones_like(y)

    rk4_step(np.zeros(1), rhs, 0.2, t=1.0)
    assert seen == pytest.approx([1.0, 1.1, 1.1, 1.2])


def test_time_dependent_field():
    # y' = cos t, exact y = sin t
    traj = integrate([0.0], lambda t, y: [math.cos(t)], 0.01, 300)
    assert traj[-1, 0] == pytest.approx(math.sin(3.0), abs=1e-10)
    assert traj.shape == (301, 1)


def test_fourth_order():
    def err(dt):
        y = np.array([1.0])
        for _ in range(int(round(1.0 / dt))):
            y = rk4_step(y, lambda t, x: -3 * x, dt)
        return abs(y[0] - math.exp(-3))

    assert math.log2(err(0.02) / err(0.01)) == pytest.approx(4.0, abs=0.1)


def test_non_finite_raises():
    with pytest.raises(NonFiniteState):
        rk4_step(np.array([1.0]), lambda t, x: x * np.inf, 0.1)
    with pytest.raises(ValueError):
        rk4_step(np.array([1.0]), lambda t, x: x, 0.0)
