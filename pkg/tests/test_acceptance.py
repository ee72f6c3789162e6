"""Acceptance suite: one test per headline criterion, one printed verdict each.

Run with `pytest tests/test_acceptance.py -v -s` to see the measured values.
"""

import math

import numpy as np
import pytest

from kppsh.params import (SystemParams, default_preset,
                          gamma_gl, gamma_rem, gl_cubic_coefficient)
from kppsh.front import check_front_asymptotics, saddle_rate, solve_front, tail_rate
from kppsh.spectral import fredholm_border, select_theta, weighted_symbol
from kppsh.modefilter import make_mode_filters, project, quadratic_vanishing_check
from kppsh.gl import GLField, assemble_cubic, default_gl_grid, simulate_gl
from kppsh.evans import evans_winding, wronskian_identity_check
from kppsh.diagnostics import (decay_fit, find_pattern_window, pattern_amplitude,
                               pattern_wavenumber)


def verdict(num, name, ok, detail):
    print(f"[criterion {num:2d}] {'PASS' if ok else 'FAIL'}  {name}: {detail}")
    assert ok, f"criterion {num} ({name}): {detail}"


def test_criterion_1_gl_coefficient_cross_validation():
    rng = np.random.default_rng(101)
    worst = 0.0
    for _ in range(100):
        p = SystemParams(
            d=float(rng.uniform(0.2, 4.0)),
            alpha=float(rng.uniform(0.2, 4.0)),
            beta=float(rng.choice([-1.0, 1.0]) * rng.uniform(0.05, 1.0)),
            sigma=float(rng.uniform(0.5, 20.0)),
        )
        g = float(rng.uniform(1e-3, 1.0)) * gamma_gl(p)
        closed = gl_cubic_coefficient(p, g)
        assembled = assemble_cubic(p, gamma=g)
        worst = max(worst, abs(assembled - closed) / abs(closed))
    verdict(1, "closed form vs linear-solve assembly", worst <= 1e-10,
            f"worst relative deviation {worst:.3e} over 100 draws")


def test_criterion_2_hypothesis_gate():
    p = default_preset()
    lo, hi = gamma_rem(p), gamma_gl(p)
    gl_values = [gamma_gl(p.with_(beta=10.0 ** (-k))) for k in range(1, 5)]
    increasing = all(b > a for a, b in zip(gl_values, gl_values[1:]))
    ok = lo < hi and increasing
    verdict(2, "gamma interval and beta -> 0 divergence", ok,
            f"interval ({lo:.4g}, {hi:.4g}); gamma_GL along beta=10^-k: "
            + ", ".join(f"{v:.4g}" for v in gl_values))


def test_criterion_3_spectral_margins():
    p = default_preset().with_(mu=0.005)
    p = p.with_(gamma=gamma_rem(p) + 1.0)
    choice = select_theta(p)
    grid = np.linspace(-10.0, 10.0, 4001)
    margins = {}
    for which in ("kpp-", "sh-", "sh+"):
        (curve,) = fredholm_border(weighted_symbol(p, which, choice.theta), grid)
        margins[which] = curve.max_real
    (kpp_plus,) = fredholm_border(weighted_symbol(p, "kpp+", choice.theta), grid)
    re = kpp_plus.lam.real
    touch_ok = (abs(re.max()) <= 1e-12
                and abs(grid[int(np.argmax(re))]) <= 1e-12
                and np.partition(re, -2)[-2] < -1e-8)
    gap_ok = all(m <= -3.0 * choice.eta for m in margins.values())
    verdict(3, "weighted border margins", gap_ok and touch_ok,
            f"theta={choice.theta:.4f}, eta={choice.eta:.4f}, "
            f"max Re: {', '.join(f'{k}={v:.4f}' for k, v in margins.items())}, "
            f"kpp+ touches 0 only at xi=0")


def test_criterion_4_front_correctness():
    p = default_preset()
    f = solve_front(p, domain=(-30.0, 60.0), n=4501)
    kappa = saddle_rate(p)
    rate = tail_rate(f)
    fit = check_front_asymptotics(f, window=(10.0, 30.0))
    ok = (f.residual <= 1e-8
          and abs(rate - kappa) <= 0.01 * kappa
          and fit.r_squared >= 0.999)
    verdict(4, "critical front", ok,
            f"residual {f.residual:.2e}, tail rate {rate:.5f} vs kappa "
            f"{kappa:.5f}, weighted-derivative fit r^2 = {fit.r_squared:.5f}")


def test_criterion_5_main_theorem_decay(production_runs):
    ts = production_runs[0.1]
    fit = decay_fit(ts.t, ts.metrics["u_weighted_sup"], window=(10.0, 200.0))
    mask = (ts.t >= 10.0) & (ts.t <= 200.0)
    u2 = ts.metrics["u2_sup"][mask]
    rate = -np.polyfit(ts.t[mask], np.log(u2), 1)[0]
    eta = ts.theta_choice.eta
    ok = -1.8 <= fit.slope <= -1.2 and rate >= 0.5 * eta
    verdict(5, "algebraic front decay at mu=0.1", ok,
            f"log-log slope {fit.slope:.3f} on [10,200] (r^2={fit.r_squared:.4f}); "
            f"u2 rate {rate:.4f} >= 0.5 eta = {0.5 * eta:.4f}")


def test_criterion_6_turing_boundedness_and_scaling(production_runs):
    details = []
    amplitudes = {}
    ok = True
    for mu, ts in sorted(production_runs.items()):
        v = ts.metrics["v_sup"]
        t = ts.t
        v_final = v[-1]
        t_sat = float(t[int(np.argmax(v >= 0.9 * v_final))])
        mask = t >= min(t_sat + 50.0, 350.0)
        trend = abs(float(np.polyfit(t[mask], v[mask], 1)[0])) * 100.0 / v_final
        x = ts.grid.x
        _, u_last, v_last = ts.snapshots[-1]
        iface = float(ts.metrics["interface"][-1])
        sponge_end = ts.extras["sponge_end"]
        window = find_pattern_window(x, v_last, iface, sponge_end)
        amp = pattern_amplitude(x, v_last, window)
        wn = pattern_wavenumber(x, v_last, window)
        amplitudes[mu] = amp
        ok = ok and trend <= 0.02 and abs(wn["xi_peak"] - 1.0) <= 0.05 and not wn["flagged"]
        details.append(f"mu={mu}: sat at t={t_sat:.0f}, trend {trend:.2e}/100, "
                       f"amp {amp:.4f}, xi {wn['xi_peak']:.4f}")
    ratio = amplitudes[0.1] / amplitudes[0.05]
    expected = math.sqrt(2.0)
    ok = ok and abs(ratio - expected) <= 0.2 * expected
    details.append(f"amplitude ratio {ratio:.4f} vs sqrt(2) = {expected:.4f}")
    verdict(6, "pattern boundedness, sqrt(mu) scaling, wavenumber", ok,
            "; ".join(details))


def test_criterion_7_mode_filter_algebra():
    p = default_preset().with_(mu=0.0)
    spec = make_mode_filters(p)
    rng = np.random.default_rng(107)
    partition = 0.0
    vanish = 0.0
    for _ in range(5):
        coeffs = rng.normal(size=(2, spec.grid.n)) + 1j * rng.normal(size=(2, spec.grid.n))
        coeffs[:, np.abs(spec.xi) > 3.0] = 0.0
        v = np.fft.ifft(coeffs, axis=1).real
        v /= np.max(np.abs(v))
        w = np.roll(v, 17, axis=1)
        total = project(spec, v, "c") + project(spec, v, "s")
        partition = max(partition, float(np.max(np.abs(total - v))))
        vanish = max(vanish, quadratic_vanishing_check(spec, v, w))
    x = spec.grid.x
    rho = np.array([p.beta, p.d + 2 * p.alpha])
    spec_bad = make_mode_filters(p, chi_c_lobe=(5.0 / 8.0, 11.0 / 8.0, 1.0 / 8.0))
    v1 = 2.0 * np.cos((90.0 / 128.0) * x)[None, :] * rho[:, None]
    v2 = 2.0 * np.cos((70.0 / 128.0) * x)[None, :] * rho[:, None]
    control = quadratic_vanishing_check(spec_bad, v1, v2)
    ok = partition <= 1e-13 and vanish <= 1e-12 and control > 1e-3
    verdict(7, "mode-filter algebra", ok,
            f"partition {partition:.2e}, quadratic vanishing {vanish:.2e}, "
            f"corrupted-cutoff control {control:.2e}")


def test_criterion_8_gl_approximation_order(approx_results):
    r_coarse = approx_results[0.2]["residual"]
    r_fine = approx_results[0.1]["residual"]
    ratio = r_fine / r_coarse
    allowed = 0.5 ** 1.5 * 1.3
    ok = ratio <= allowed
    verdict(8, "amplitude-equation approximation order", ok,
            f"residuals eps=0.2: {r_coarse:.3e}, eps=0.1: {r_fine:.3e}; "
            f"ratio {ratio:.3f} <= {allowed:.3f}")


def test_criterion_9_gl_attractor():
    grid = default_gl_grid(n=512)
    x = grid.x
    profile = 0.4 + 0.6 * np.cos(2 * np.pi * x / grid.length) ** 2
    a0 = 10.0 * profile / np.max(profile) * np.exp(
        0.3j * np.sin(2 * np.pi * x / grid.length))
    b = -1.0
    _, hist = simulate_gl(GLField(grid=grid, a=a0), b=b, dt=0.01, t_end=20.0,
                          record_every=5)
    c_gl = 1.05 / math.sqrt(-b)
    worst = -math.inf
    for t, sup in hist:
        if 1.0 <= t <= 20.0:
            worst = max(worst, sup - (c_gl + math.exp(-t / 2.0) * 10.0))
    ok = worst <= 0.0
    verdict(9, "amplitude-equation attractor bound", ok,
            f"max violation of C_GL + e^(-T/2)|A0| bound: {worst:.3e}")


def test_criterion_10_evans_point_spectrum():
    p = default_preset()
    front = solve_front(p)
    choice = select_theta(p.with_(gamma=gamma_rem(p) + 1.0, mu=0.005))
    clean = evans_winding(p, front, choice.theta, choice.eta, n_per_edge=16)

    def well(x):
        return 6.0 * np.exp(-x ** 2)

    corrupted = evans_winding(p, front, choice.theta, choice.eta,
                              n_per_edge=16, potential_shift=well)
    dev_kpp = wronskian_identity_check(p, "kpp", 0.7 + 0.2j, front)
    dev_sh = wronskian_identity_check(p, "sh", 0.7 + 0.2j, front)
    ok = (clean["winding"] == 0 and corrupted["winding"] >= 1
          and dev_kpp <= 1e-6 and dev_sh <= 1e-6)
    verdict(10, "Evans winding and wronskian identities", ok,
            f"clean winding {clean['winding']}, corrupted {corrupted['winding']}, "
            f"wronskian deviations kpp {dev_kpp:.2e}, sh {dev_sh:.2e}")
