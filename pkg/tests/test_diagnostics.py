import math

import numpy as np
import pytest

from kppsh.params import default_preset
from kppsh.diagnostics import (
    amplitude_scaling,
    decay_fit,
    find_pattern_window,
    pattern_amplitude,
    pattern_wavenumber,
    predicted_pattern_amplitude,
    window_sensitivity,
)


def test_decay_fit_recovers_algebraic_generator():
    t = np.linspace(1.0, 5000.0, 20000)
    vals = 3.7 * (1 + t) ** -1.5
    fit = decay_fit(t, vals, window=(50.0, 5000.0))
    assert fit.slope == pytest.approx(-1.5, abs=0.01)
    assert fit.kind == "algebraic"
    assert fit.r_squared > 0.9999


def test_decay_fit_classifies_exponential():
    t = np.linspace(1.0, 400.0, 4000)
    vals = 2.0 * np.exp(-0.05 * t)
    fit = decay_fit(t, vals, window=(10.0, 400.0))
    assert fit.kind == "exponential"
    assert fit.semilog_rate == pytest.approx(0.05, rel=1e-6)


def test_decay_fit_scale_invariance():
    t = np.linspace(1.0, 300.0, 3000)
    vals = (1 + t) ** -1.4
    f1 = decay_fit(t, vals, window=(10.0, 300.0))
    f2 = decay_fit(t, 17.3 * vals, window=(10.0, 300.0))
    assert abs(f1.slope - f2.slope) <= 1e-12
    assert f2.intercept != f1.intercept


def test_decay_fit_rejects_bad_windows():
    t = np.linspace(1.0, 100.0, 1000)
    with pytest.raises(ValueError):
        decay_fit(t, np.ones_like(t), window=(20.0, 100.0))  # < one decade
    vals = np.ones_like(t)
    vals[500] = -1.0
    with pytest.raises(ValueError):
        decay_fit(t, vals, window=(1.0, 100.0))


def test_window_sensitivity_flags():
    t = np.linspace(1.0, 300.0, 6000)
    clean = (1 + t) ** -1.5
    rep = window_sensitivity(t, clean)
    assert rep["converged"]
    messy = (1 + t) ** -1.5 * (1 + 2.0 * np.exp(-t / 80.0))
    rep2 = window_sensitivity(t, messy)
    assert abs(rep2["slope_1"] - rep2["slope_2"]) > 0.0


def synthetic_pattern(x, k, amp, lo, hi, ramp=10.0):
    env = amp * 0.5 * (np.tanh((x - lo) / ramp) - np.tanh((x - hi) / ramp))
    return env * np.cos(k * x)


def test_pattern_window_and_amplitude():
    x = np.arange(-700.0, 40.0, 0.13)
    v = synthetic_pattern(x, 1.0, 0.1, -600.0, -200.0)
    win = find_pattern_window(x, v, interface=0.0, sponge_end=-660.0)
    assert -600.0 <= win[0] < win[1] <= -200.0
    assert win[1] - win[0] >= 20 * 2 * math.pi
    amp = pattern_amplitude(x, v, win)
    assert amp == pytest.approx(0.1, rel=0.02)


def test_pattern_wavenumber_synthetic():
    x = np.arange(-700.0, 40.0, 0.13)
    for k in (1.0, 1.1):
        v = synthetic_pattern(x, k, 0.1, -600.0, -200.0)
        win = find_pattern_window(x, v, 0.0, -660.0)
        rep = pattern_wavenumber(x, v, win)
        assert not rep["flagged"]
        assert rep["xi_peak"] == pytest.approx(k, abs=0.02)


def test_pattern_wavenumber_flags_noise():
    rng = np.random.default_rng(31)
    x = np.arange(-700.0, 40.0, 0.13)
    v = 0.01 * rng.normal(size=x.size)
    rep = pattern_wavenumber(x, v, (-500.0, -300.0))
    assert rep["flagged"]


def test_amplitude_scaling_synthetic_runs():
    x = np.arange(-700.0, 40.0, 0.13)
    runs = []
    for mu in (0.05, 0.1):
        amp = 0.37 * math.sqrt(mu)
        snaps = [(350.0, synthetic_pattern(x, 1.0, amp, -600.0, -200.0)),
                 (400.0, synthetic_pattern(x, 1.0, amp, -620.0, -195.0))]
        runs.append({"mu": mu, "x": x, "snapshots": snaps,
                     "interface": 0.0, "sponge_end": -660.0})
    rep = amplitude_scaling(runs)
    assert all(r["saturated"] for r in rep["runs"])
    (ratio,) = rep["ratios"]
    assert ratio["measured"] == pytest.approx(ratio["expected"], rel=0.02)
    assert ratio["expected"] == pytest.approx(math.sqrt(0.5), rel=1e-12)


def test_predicted_amplitude_positive_for_gated_params():
    p = default_preset().with_(mu=0.1, mu0=0.2)
    amp = predicted_pattern_amplitude(p)
    assert 0.05 < amp < 0.3
