import numpy as np
import pytest

from kppsh.params import (
    SystemParams,
    check_hypotheses,
    critical_speed,
    default_preset,
    equilibria,
    equilibrium_residuals,
    gamma_gl,
    gamma_rem,
    gl_cubic_coefficient,
)


def test_critical_speed_values():
    assert critical_speed(SystemParams(d=1, alpha=1)) == pytest.approx(2.0)
    assert critical_speed(SystemParams(d=4, alpha=1)) == pytest.approx(4.0)


def test_critical_speed_rejects_bad_parameters():
    with pytest.raises(ValueError):
        SystemParams(d=1, alpha=0)
    with pytest.raises(ValueError):
        SystemParams(d=-1, alpha=1)


def test_gamma_rem_values():
    assert gamma_rem(SystemParams(alpha=1, d=1, mu0=0.01)) == pytest.approx(10.01)
    assert gamma_rem(SystemParams(alpha=1, d=2, mu0=1e-300)) == pytest.approx(2.0)
    # all terms vanish with alpha
    small = gamma_rem(SystemParams(alpha=1e-8, d=1.0, mu0=1e-300))
    assert 0 < small < 1e-6


def test_gamma_rem_first_two_terms_depend_on_ratio_only():
    rng = np.random.default_rng(0)
    for _ in range(50):
        alpha = float(rng.uniform(0.1, 3.0))
        d = float(rng.uniform(0.1, 3.0))
        k = float(rng.uniform(0.5, 4.0))
        mu0 = 0.01
        base = gamma_rem(SystemParams(alpha=alpha, d=d, mu0=mu0)) + 2 * alpha - mu0
        scaled = gamma_rem(SystemParams(alpha=k * alpha, d=k * d, mu0=mu0)) + 2 * k * alpha - mu0
        assert base == pytest.approx(scaled, rel=1e-12)


def test_cubic_coefficient_at_gamma_zero():
    p = SystemParams(d=1.3, alpha=0.7, beta=0.4, sigma=2.5)
    expected = -3 * p.sigma * (p.d + 2 * p.alpha) ** 2
    assert gl_cubic_coefficient(p, 0.0) == pytest.approx(expected, rel=1e-14)


def test_gamma_gl_is_positive_root_of_cubic_coefficient():
    rng = np.random.default_rng(1)
    for _ in range(200):
        p = SystemParams(
            d=float(rng.uniform(0.2, 4.0)),
            alpha=float(rng.uniform(0.2, 4.0)),
            beta=float(rng.uniform(-1, 1)) or 0.3,
            sigma=float(rng.uniform(0.2, 20.0)),
        )
        g = gamma_gl(p)
        assert g > 0
        scale = abs(gl_cubic_coefficient(p, 0.0))
        assert abs(gl_cubic_coefficient(p, g)) <= 1e-12 * max(scale, 1.0)
        # P has positive leading coefficient and P(0)<0: negative inside (0, g)
        assert gl_cubic_coefficient(p, 0.5 * g) < 0


def test_gamma_gl_diverges_as_beta_vanishes():
    vals = []
    for k in range(1, 5):
        p = SystemParams(alpha=1, d=1, sigma=10, beta=10.0 ** (-k))
        vals.append(gamma_gl(p))
    assert all(b > a for a, b in zip(vals, vals[1:]))
    assert vals[-1] > 1e3 * vals[0] / 10  # grows like 1/beta


def test_gamma_gl_increases_with_sigma():
    p = SystemParams(alpha=1, d=1, sigma=10, beta=0.1)
    assert gamma_gl(p.with_(sigma=20.0)) > gamma_gl(p)


def test_gate_preset_admissible():
    p = default_preset()
    rep = check_hypotheses(p)
    assert rep.gamma_rem < rep.gamma_gl
    mid = 0.5 * (rep.gamma_rem + rep.gamma_gl)
    rep_mid = check_hypotheses(p.with_(gamma=mid))
    assert rep_mid.admissible


def test_gate_rejects_boundary_and_empty_interval():
    p = default_preset()
    rep = check_hypotheses(p.with_(gamma=gamma_rem(p)))
    assert not rep.admissible
    # strong coupling, weak saturation: interval can be empty
    bad = SystemParams(alpha=1, d=1, beta=10, sigma=0.01, gamma=11, mu0=0.01)
    rep_bad = check_hypotheses(bad)
    if rep_bad.gamma_interval is None:
        assert not rep_bad.admissible
    else:
        assert rep_bad.gamma_interval[0] < rep_bad.gamma_interval[1]


def test_admissible_implies_supercritical():
    rng = np.random.default_rng(2)
    found = 0
    for _ in range(1000):
        p = SystemParams(
            d=float(rng.uniform(0.2, 3.0)),
            alpha=float(rng.uniform(0.2, 3.0)),
            beta=float(rng.choice([-1, 1]) * rng.uniform(0.01, 0.5)),
            sigma=float(rng.uniform(1.0, 30.0)),
            mu0=0.01,
        )
        lo, hi = gamma_rem(p), gamma_gl(p)
        if lo >= hi:
            continue
        g = float(rng.uniform(lo, hi))
        g = min(max(g, np.nextafter(lo, hi)), np.nextafter(hi, lo))
        p = p.with_(gamma=g)
        if check_hypotheses(p).admissible:
            found += 1
            assert gl_cubic_coefficient(p) < 0
    assert found > 100  # the admissible region is easy to hit for small beta


def test_equilibria_trivial_states():
    p = default_preset().with_(mu=0.0)
    eq = equilibria(p)
    for pt in [(0.0, 0.0), (1.0, 0.0), (-1.0, 0.0)]:
        assert pt in eq.points
        r1, r2 = equilibrium_residuals(p, *pt)
        assert abs(r1) <= 1e-14 and abs(r2) <= 1e-14


def test_equilibria_exactly_three_above_sigma0():
    p = SystemParams(alpha=1, d=1, beta=1.0, gamma=10.0, sigma=7.0, mu=0.0)
    eq = equilibria(p)
    assert p.sigma > eq.sigma0
    assert len(eq.points) == 3


def test_equilibria_nontrivial_states_match_sampling_oracle():
    # sigma below the actual intersection threshold: the dense-sampling
    # oracle finds crossings and equilibria() must report them
    p = SystemParams(alpha=1, d=1, beta=1.0, gamma=10.0, sigma=2.0, mu=0.0)
    eq = equilibria(p)
    assert p.sigma < eq.sigma0
    nontrivial = [pt for pt in eq.points if pt[1] != 0.0]

    # oracle: sign changes of the gap between the two nullclines
    def gap(v):
        u = 1.0 - (p.mu - 1.0 - p.sigma * v * v) / p.gamma
        return v + (p.alpha / p.beta) * u * (1.0 - u * u)

    vs = np.linspace(1e-6, 5.0, 200001)
    gs = np.array([gap(v) for v in vs])
    crossings = int(np.sum(np.sign(gs[:-1]) * np.sign(gs[1:]) < 0))
    assert crossings >= 1
    assert len(nontrivial) == crossings
    for u, v in nontrivial:
        assert v > 0
        r1, r2 = equilibrium_residuals(p, u, v)
        assert abs(r1) <= 1e-12 and abs(r2) <= 1e-12


def test_equilibria_negative_beta_mirror():
    p = SystemParams(alpha=1, d=1, beta=-1.0, gamma=10.0, sigma=2.0, mu=0.0)
    eq = equilibria(p)
    nontrivial = [pt for pt in eq.points if pt[1] != 0.0]
    assert nontrivial and all(v < 0 for _, v in nontrivial)
    for u, v in nontrivial:
        r1, r2 = equilibrium_residuals(p, u, v)
        assert abs(r1) <= 1e-12 and abs(r2) <= 1e-12


def test_equilibria_rejects_mu_ge_one():
    with pytest.raises(ValueError):
        equilibria(default_preset().with_(mu=1.0))
