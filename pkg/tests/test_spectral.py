import math

import numpy as np
import pytest

from kppsh.params import default_preset, gamma_rem
from kppsh.spectral import (
    DEFAULT_XI_GRID,
    OperatorSymbol,
    dispersion_roots,
    fredholm_border,
    kpp_symbol,
    select_theta,
    sh_symbol,
    shift_symbol,
    t_minus_symbol,
    verify_root_localization,
    weighted_symbol,
)


P = default_preset()


def test_shift_kpp_plus_to_pure_diffusion():
    s = kpp_symbol(P, "+")
    shifted = shift_symbol(s, -P.c_star / (2 * P.d))
    coeffs = shifted.coeffs()
    assert coeffs[0] == pytest.approx(0.0, abs=1e-14)
    assert coeffs[1] == pytest.approx(0.0, abs=1e-14)
    assert coeffs[2] == pytest.approx(P.d)


def test_shift_identity_and_group_property():
    s = sh_symbol(P, "-")
    assert shift_symbol(s, 0.0).entries == s.entries
    back = shift_symbol(shift_symbol(s, 0.37), -0.37)
    for c_orig, c_back in zip(s.coeffs(), back.coeffs()):
        assert c_back == pytest.approx(c_orig, abs=1e-13)


def test_shift_preserves_triangular_structure():
    t = t_minus_symbol(P)
    shifted = shift_symbol(t, -0.8)
    assert shifted.is_triangular()
    assert shifted.entries[1][0] == (0.0,)


def test_border_shifted_kpp_plus_is_negative_parabola():
    shifted = shift_symbol(kpp_symbol(P, "+"), -P.c_star / (2 * P.d))
    (curve,) = fredholm_border(shifted)
    assert np.allclose(curve.lam.real, -P.d * curve.xi**2, atol=1e-12)
    assert np.allclose(curve.lam.imag, 0.0, atol=1e-12)


def test_border_unshifted_sh_minus_at_xi_one():
    p = P.with_(mu=0.0)
    (curve,) = fredholm_border(sh_symbol(p, "-"), xi_grid=np.array([1.0]))
    assert curve.lam[0] == pytest.approx(1j * p.c_star)


def test_border_unshifted_kpp_plus_unstable_at_origin():
    (curve,) = fredholm_border(kpp_symbol(P, "+"), xi_grid=np.array([0.0]))
    assert curve.lam[0].real == pytest.approx(P.alpha)
    assert curve.lam[0].real > 0


def test_border_rejects_full_matrix():
    bad = OperatorSymbol.matrix([[(1.0,), (1.0,)], [(1.0,), (1.0,)]])
    with pytest.raises(ValueError):
        fredholm_border(bad)


def test_conjugation_consistency_random_symbols():
    rng = np.random.default_rng(7)
    xi = np.linspace(-3, 3, 101)
    for _ in range(20):
        deg = int(rng.integers(1, 5))
        coeffs = rng.normal(size=deg + 1)
        coeffs[-1] = coeffs[-1] or 1.0
        s = OperatorSymbol.scalar(coeffs)
        th = float(rng.normal())
        (curve,) = fredholm_border(shift_symbol(s, th), xi_grid=xi)
        direct = np.array([s.eval_entry(th + 1j * x) for x in xi])
        assert np.allclose(curve.lam, direct, atol=1e-12 * max(1, np.abs(direct).max()))


def test_hermitian_symmetry_of_curves():
    for sym in (kpp_symbol(P, "-"), sh_symbol(P, "+")):
        (curve,) = fredholm_border(sym)
        assert np.allclose(curve.lam, np.conj(curve.lam[::-1]), atol=1e-14)


def test_select_theta_margins_sampled():
    p = P.with_(gamma=gamma_rem(P) + 1.0, mu=0.005)
    choice = select_theta(p)
    assert choice.theta < 0 and choice.eta > 0
    for which in ("kpp-", "sh-", "sh+"):
        (curve,) = fredholm_border(weighted_symbol(p, which, choice.theta))
        assert curve.max_real <= -3 * choice.eta + 1e-14


def test_select_theta_vanishes_with_mu0():
    thetas = []
    for k in range(1, 6):
        p = P.with_(mu0=10.0 ** (-k), mu=0.0, gamma=11.0)
        thetas.append(abs(select_theta(p).theta))
    assert all(b < a for a, b in zip(thetas, thetas[1:]))
    assert thetas[-1] < 1e-4


def test_select_theta_rejects_gamma_at_threshold():
    with pytest.raises(ValueError):
        select_theta(P.with_(gamma=gamma_rem(P)))


def test_dispersion_double_root_at_origin():
    shifted = shift_symbol(kpp_symbol(P, "+"), -P.c_star / (2 * P.d))
    roots = dispersion_roots(shifted, 0.0).roots
    assert len(roots) == 2
    assert max(abs(r) for r in roots) <= 1e-7


def test_dispersion_kpp_sqrt_asymptotics():
    shifted = shift_symbol(kpp_symbol(P, "+"), -P.c_star / (2 * P.d))
    for lam in (1e-4, 1e-3, 1e-2):
        roots = dispersion_roots(shifted, lam).roots
        expected = math.sqrt(lam / P.d)
        assert roots[0].real == pytest.approx(-expected, rel=1e-8)
        assert roots[1].real == pytest.approx(expected, rel=1e-8)


def test_dispersion_counts_and_product_identity():
    rng = np.random.default_rng(11)
    for sym, deg in ((kpp_symbol(P, "-"), 2), (sh_symbol(P, "+"), 4)):
        for _ in range(20):
            lam = complex(rng.normal(scale=3), rng.normal(scale=3))
            dr = dispersion_roots(sym, lam)
            assert len(dr.roots) == deg
            coeffs = list(sym.coeffs())
            prod = np.prod(np.array(dr.roots))
            expected = (-1) ** deg * (coeffs[0] - lam) / coeffs[deg]
            assert prod == pytest.approx(expected, rel=1e-9)


def test_dispersion_rejects_degenerate_symbol():
    with pytest.raises(ValueError):
        dispersion_roots(OperatorSymbol.scalar((1.0,)), 0.0)


def test_sh_plus_margin_formula():
    p = P.with_(mu=P.mu0)  # worst case within the gate ceiling
    shifted = shift_symbol(sh_symbol(p, "+"), -p.c_star / (2 * p.d))
    (curve,) = fredholm_border(shifted)
    assert curve.max_real <= gamma_rem(p) - p.gamma + 1e-12
    # the bound is attained at xi0 = sqrt(1 + 3 (c*/2d)^2)
    xi0 = math.sqrt(1 + 3 * (p.c_star / (2 * p.d)) ** 2)
    (pt,) = fredholm_border(shifted, xi_grid=np.array([xi0]))
    assert pt.lam[0].real == pytest.approx(gamma_rem(p) - p.gamma, rel=1e-12)


def test_root_localization_report():
    p = P.with_(gamma=gamma_rem(P) + 1.0, mu=0.005)
    choice = select_theta(p)
    rep = verify_root_localization(p, choice.theta, choice.eta)
    assert rep.kappa2 > 0
    assert rep.kpp_slope == pytest.approx(0.5, abs=0.02)
    assert rep.sh_slope == pytest.approx(0.25, abs=0.02)
    assert rep.double_root_norm <= 1e-7
    assert rep.split_counts["kpp-"] == (1, 1)
    assert rep.split_counts["kpp+"] == (1, 1)
    assert rep.split_counts["sh-"] == (2, 2)
    assert rep.split_counts["sh+"] == (2, 2)
