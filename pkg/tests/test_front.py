import math

import numpy as np
import pytest

from kppsh.params import default_preset
from kppsh.front import (
    check_front_asymptotics,
    saddle_rate,
    shooting_minimum,
    solve_front,
    tail_rate,
)


@pytest.fixture(scope="module")
def front_default():
    return solve_front(default_preset())


def test_residual_and_phase(front_default):
    f = front_default
    assert f.residual <= 1e-8
    i0 = int(round((0.0 - f.x[0]) / f.dx))
    assert f.q[i0] == 0.5
    assert f.x[i0] == 0.0


def test_boundary_limits(front_default):
    f = front_default
    assert abs(f.q[0] - 1.0) <= 1e-6
    assert abs(f.q[-1]) <= 1e-6


def test_monotone_decreasing(front_default):
    dq = np.diff(front_default.q)
    assert np.all(dq < 0.0)


def test_left_tail_rate():
    # start the domain at -30 so the tail window sits well above the
    # double-precision floor of 1 - q
    p = default_preset()
    f = solve_front(p, domain=(-30.0, 60.0), n=4501)
    kappa = saddle_rate(p)
    assert kappa == pytest.approx((math.sqrt(3) - 1.0), rel=1e-12)
    rate = tail_rate(f)
    assert rate == pytest.approx(kappa, rel=0.01)


def test_weighted_derivative_linear_fit(front_default):
    fit = check_front_asymptotics(front_default, window=(10.0, 30.0))
    assert fit.r_squared >= 0.999
    assert fit.a < 0.0


def test_fit_stable_under_domain_doubling(front_default):
    wide = solve_front(default_preset(), domain=(-40.0, 120.0), n=6401)
    f1 = check_front_asymptotics(front_default, window=(10.0, 30.0))
    f2 = check_front_asymptotics(wide, window=(10.0, 30.0))
    assert f2.a == pytest.approx(f1.a, rel=0.01)
    assert f2.b == pytest.approx(f1.b, rel=0.01)


def test_translation_covariance():
    p = default_preset()
    base = solve_front(p)
    x0 = 5.0
    shifted = solve_front(p, phase_x0=x0)
    # shifted profile must equal the base one translated by x0
    xs = np.linspace(-30.0, 50.0, 500)
    q_base = base.spline()(xs - x0)
    q_shift = shifted.spline()(xs)
    assert np.max(np.abs(q_base - q_shift)) <= 1e-6


def test_speed_criticality():
    # subcritical speeds overshoot below zero (decaying spiral at the
    # origin); at the critical speed the trajectory stays positive
    p = default_preset()
    assert shooting_minimum(p, p.c_star - 0.1) < -1e-6
    assert shooting_minimum(p, p.c_star) >= -1e-10


def test_preconditions():
    p = default_preset()
    with pytest.raises(ValueError):
        solve_front(p, domain=(-10.0, 60.0))
    with pytest.raises(ValueError):
        solve_front(p, n=201)  # dx too coarse for the saddle rate
