import math

import numpy as np
import pytest

from circumnav.estimator import (
    EstimatorState,
    FilterBank,
    Measurement,
    center_estimator_rhs,
    estimator_rates,
    estimator_step,
    filter_rhs,
    radius_estimator_rhs,
)
from circumnav.geometry import Vec2, distances
from circumnav.integrate import rk4_step

ZERO = Measurement(0.0, 0.0, Vec2(0.0, 0.0))


def test_filter_rhs_examples():
    out = filter_rhs(FilterBank(alpha=1.0), ZERO)
    assert out.dz1 == 0.0 and out.eta == 0.0
    out = filter_rhs(FilterBank(z3=1.0, alpha=1.0), Measurement(3.0, 0.0, Vec2(0, 0)))
    assert out.dz3 == 2.0 and out.V == 2.0


def test_filter_outputs_name_the_right_channels():
    m = Measurement(Dc=4.0, Db=1.0, p1=Vec2(2.0, 3.0))
    out = filter_rhs(FilterBank(alpha=2.0), m)
    assert out.eta == 0.5
    assert out.m_sig == out.eta2 == 8.0
    assert out.V == 4.0
    assert out.m2 == 6.5
    assert out.V2 == (2.0, 3.0)


@pytest.mark.parametrize("alpha", [0.5, 1.0, 2.0])
def test_filter_step_response_closed_form(alpha):
    d = 3.0
    m = Measurement(Dc=d, Db=0.0, p1=Vec2(0, 0))
    z = np.zeros(1)
    dt = 0.01
    for k in range(1, 1001):
        z = rk4_step(z, lambda t, y: [filter_rhs(FilterBank(z3=y[0], alpha=alpha), m).dz3], dt)
        assert z[0] == pytest.approx(d / alpha * (1 - math.exp(-alpha * k * dt)), abs=1e-9)


def test_constant_input_drives_V_to_zero():
    m = Measurement(Dc=5.0, Db=0.0, p1=Vec2(0, 0))
    z = np.zeros(1)
    for _ in range(3000):
        z = rk4_step(z, lambda t, y: [filter_rhs(FilterBank(z3=y[0]), m).dz3], 0.01)
    assert abs(filter_rhs(FilterBank(z3=z[0]), m).V) < 1e-9


def test_steady_init_is_equilibrium():
    m = Measurement(Dc=12.0, Db=2.0, p1=Vec2(4.0, -1.0))
    out = filter_rhs(FilterBank.initial(2.0, m, "steady"), m)
    assert out.dz1 == out.dz2 == out.dz3 == out.dz4 == 0.0
    assert out.dz5 == (0.0, 0.0)
    assert FilterBank.initial(2.0, m, "zero").as_array().tolist() == [0.0] * 6
    with pytest.raises(ValueError):
        FilterBank.initial(1.0, m, "warm")


def test_radius_rhs_examples():
    assert radius_estimator_rhs(0.0, 5.0, -3.0, 7.0, 2.0) == 0.0
    assert radius_estimator_rhs(1.0, 0.0, 0.0, 2.0, 1.0) == -2.0


def test_center_rhs_examples():
    assert center_estimator_rhs(Vec2(0, 0), 4.0, 1.0, Vec2(3, 5), 1.0) == (0.0, 0.0)
    assert center_estimator_rhs(Vec2(1, 0), 0.0, 0.0, Vec2(3, 5), 1.0) == (-3.0, 0.0)


def test_radius_rhs_gradient_structure():
    # r_hat' = -gamma V (eta - m + V r_hat); the true radius zeroes the bracket
    # when eta - m = -V r, as it does for exact filtered signals
    V, r = 0.7, 10.0
    eta, m = 1.0, 1.0 + V * r
    assert radius_estimator_rhs(V, eta, m, r, 0.5) == pytest.approx(0.0, abs=1e-15)
    assert radius_estimator_rhs(V, eta, m, r + 1, 0.5) < 0
    assert radius_estimator_rhs(V, eta, m, r - 1, 0.5) > 0


def test_zero_measurement_zero_filters_unchanged():
    e = EstimatorState(FilterBank(alpha=1.0), r_hat=3.0, c_hat=Vec2(1.0, 2.0), gamma=0.2)
    new, rhd, chd = estimator_step(e, ZERO, 0.01)
    assert new.filters == e.filters
    assert (new.r_hat, new.c_hat) == (3.0, (1.0, 2.0))
    assert rhd == 0.0 and chd == (0.0, 0.0)


def test_zero_measurement_filters_decay():
    f = FilterBank(1.0, 2.0, 3.0, 4.0, Vec2(5.0, 6.0), alpha=1.0)
    e = EstimatorState(f, r_hat=3.0, c_hat=Vec2(1.0, 2.0), gamma=0.2)
    new, _, _ = estimator_step(e, ZERO, 0.1)
    assert np.allclose(new.filters.as_array(), f.as_array() * math.exp(-0.1), rtol=1e-7)


def orbit_measurement(c, r, R, w, h0):
    """Sensing agent on a circle of radius R about c, angular rate w."""
    def at(h):
        th = w * (h0 + h)
        p = Vec2(c[0] + R * math.cos(th), c[1] + R * math.sin(th))
        Dc, Db = distances(c, r, p)
        return Measurement(Dc, Db, p)
    return at


def test_radius_estimate_decreases_from_overestimate():
    # satellite overestimate r_hat(0)=20 for a true radius of 10
    c, r = (25.0, 25.0), 10.0
    m0 = orbit_measurement(c, r, 12.0, 0.8, 0.0)(0.0)
    e = EstimatorState(FilterBank.initial(1.0, m0), 20.0, Vec2(25.0, 25.0), gamma=0.2)
    start = e.r_hat
    for k in range(500):
        e, _, _ = estimator_step(e, orbit_measurement(c, r, 12.0 + 5 * math.sin(0.3 * k * 0.01), 0.8,
                                                      k * 0.01), 0.01)
    assert e.r_hat < start
    assert abs(e.r_hat - r) < abs(start - r)


def test_estimates_converge_on_exciting_orbit():
    c, r = (25.0, 25.0), 10.0
    dt = 0.01

    def meas(t0):
        def at(h):
            t = t0 + h
            R = 14.0 + 3.0 * math.sin(0.7 * t)
            p = Vec2(c[0] + R * math.cos(0.9 * t), c[1] + R * math.sin(0.9 * t))
            Dc, Db = distances(c, r, p)
            return Measurement(Dc, Db, p)
        return at

    e = EstimatorState(FilterBank.initial(1.0, meas(0.0)(0.0)), 13.0, Vec2(27.0, 24.0), gamma=0.1)
    for k in range(8000):
        e, _, _ = estimator_step(e, meas(k * dt), dt)
    assert abs(e.r_hat - r) < 1e-2
    assert math.hypot(e.c_hat.x - c[0], e.c_hat.y - c[1]) < 1e-2


def test_radius_floor_clip_logged(caplog):
    m = Measurement(Dc=20.0, Db=10.0, p1=Vec2(0.0, 0.0))
    e = EstimatorState(FilterBank(z3=0.0, alpha=1.0), r_hat=0.11, c_hat=Vec2(0, 0),
                       gamma=50.0, r_floor=0.1)
    with caplog.at_level("WARNING"):
        new, _, _ = estimator_step(e, m, 0.01)
    assert new.r_hat == 0.1
    assert new.r_clips == 1
    assert "clipped" in caplog.text


def test_estimator_rates_layout():
    m = Measurement(Dc=3.0, Db=1.0, p1=Vec2(1.0, 2.0))
    y = np.array([0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 2.0, 1.0, -1.0])
    d = estimator_rates(y, m, 1.0, 0.5)
    f = filter_rhs(FilterBank.from_array(y[:6], 1.0), m)
    assert d[:6].tolist() == [f.dz1, f.dz2, f.dz3, f.dz4, f.dz5.x, f.dz5.y]
    assert d[6] == radius_estimator_rhs(f.V, f.eta, f.m_sig, 2.0, 0.5)
    assert tuple(d[7:]) == center_estimator_rhs(f.V2, f.eta2, f.m2, (1.0, -1.0), 0.5)


def test_invalid_estimator_state():
    with pytest.raises(ValueError):
        EstimatorState(FilterBank(), r_hat=1.0, c_hat=Vec2(0, 0), gamma=0.0)
    with pytest.raises(ValueError):
        EstimatorState(FilterBank(), r_hat=0.0, c_hat=Vec2(0, 0), gamma=1.0)
    with pytest.raises(ValueError):
        FilterBank(alpha=0.0)
