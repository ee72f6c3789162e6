"""Exponential-dichotomy ODE solutions, wronskian identities, Evans winding.

The eigenproblem (lambda - L) phi = 0 for the weighted operators is a linear
ODE whose coefficients converge exponentially at both ends.  Solutions with
prescribed exponential behavior are integrated inward from the far ends in a
renormalized gauge psi(x) = e^{-nu (x - x_start)} phi(x), so the dominant
growth never touches floating-point range; segment renormalizations are kept
in a positive-real ledger that cannot disturb the argument of determinants.
The Evans function for the u-component is the 2x2 wronskian of the solutions
decaying at +inf and -inf; its winding along slit-avoiding contours counts
eigenvalues.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import CubicSpline

from .front import FrontProfile
from .params import SystemParams, critical_speed
from .spectral import OperatorSymbol, dispersion_roots, shift_symbol, kpp_symbol, sh_symbol
from .weights import WeightSpec

__all__ = [
    "EigenSolution",
    "EvansSample",
    "operator_coefficients",
    "asymptotic_symbol",
    "asymptotic_solution",
    "wronskian_identity_check",
    "evans_value",
    "evans_winding",
]


@dataclass
class EigenSolution:
    """Renormalized dichotomy solution phi(x) = values * e^{nu (x - x_start)}."""

    lam: complex
    op: str
    side: str
    index: int
    nu: complex
    x: np.ndarray
    values: np.ndarray       # (order, len(x)) renormalized derivatives stack
    ledger: list             # positive renormalization factors per segment
    x_start: float


@dataclass(frozen=True)
class EvansSample:
    lam: complex
    value: complex


def _weight_ratios(p: SystemParams, theta: float, x: np.ndarray) -> np.ndarray:
    jets = WeightSpec.for_params("omega_star", p, theta).log_jets(x)
    return jets  # rows: log w, W, W', W'', W'''


def operator_coefficients(p: SystemParams, op: str, front: FrontProfile,
                          x: np.ndarray, theta: float | None = None,
                          weighted: bool = True, potential_shift=None):
    """Ascending coefficient arrays [a_0(x), ..., a_n] of the (weighted) operator.

    The conjugation by the weight turns d/dx into d/dx + W with W the
    log-derivative of the weight; coefficients follow from expanding the
    non-commutative powers, with the Bell-polynomial identities tying the
    expansion to the analytic weight jets.
    """
    x = np.asarray(x, dtype=float)
    q = front.spline()(x)
    c = critical_speed(p)
    if weighted:
        if theta is None:
            raise ValueError("weighted operators need the exponent theta")
        jets = _weight_ratios(p, theta, x)
        w, w1, w2, w3 = jets[1], jets[2], jets[3], jets[4]
    else:
        w = w1 = w2 = w3 = np.zeros_like(x)
    pot_u = p.alpha * (1.0 - 3.0 * q * q)
    if potential_shift is not None:
        pot_u = pot_u + potential_shift(x)
    if op == "kpp":
        a0 = p.d * (w * w + w1) + c * w + pot_u
        a1 = 2.0 * p.d * w + c
        a2 = np.full_like(x, p.d)
        return [a0, a1, a2]
    if op == "sh":
        pot_v = p.mu - p.gamma * (1.0 - q)
        b4 = w3 + 4.0 * w * w2 + 3.0 * w1 ** 2 + 6.0 * w ** 2 * w1 + w ** 4
        a0 = -(b4 + 2.0 * (w * w + w1) + 1.0) + c * w + pot_v
        a1 = -(4.0 * w2 + 12.0 * w * w1 + 4.0 * w ** 3 + 4.0 * w) + c
        a2 = -(6.0 * w * w + 6.0 * w1 + 2.0)
        a3 = -4.0 * w
        a4 = np.full_like(x, -1.0)
        return [a0, a1, a2, a3, a4]
    raise ValueError(f"unknown operator {op!r}")


def asymptotic_symbol(p: SystemParams, op: str, side: str,
                      theta: float | None = None,
                      weighted: bool = True) -> OperatorSymbol:
    base = kpp_symbol(p, side) if op == "kpp" else sh_symbol(p, side)
    if not weighted:
        return base
    shift = -critical_speed(p) / (2.0 * p.d) if side == "+" else theta
    return shift_symbol(base, shift)


def _companion_rhs(coeff_splines, lam: complex, order: int):
    a_n = coeff_splines[order]

    def rhs(x, y):
        dy = np.empty_like(y)
        dy[:-1] = y[1:]
        acc = lam * y[0]
        for j in range(order):
            acc -= coeff_splines[j](x) * y[j]
        dy[-1] = acc / a_n(x)
        return dy

    return rhs


def _coeff_splines(p, op, front, theta, weighted, x_far, potential_shift=None):
    xs = np.linspace(-x_far - 1.0, x_far + 1.0, int(40 * x_far))
    coeffs = operator_coefficients(p, op, front, xs, theta=theta,
                                   weighted=weighted,
                                   potential_shift=potential_shift)
    return [CubicSpline(xs, c) for c in coeffs]


def asymptotic_solution(p: SystemParams, op: str, lam: complex, side: str,
                        index: int, front: FrontProfile,
                        theta: float | None = None, weighted: bool = True,
                        x_far: float = 40.0, n_samples: int = 201,
                        potential_shift=None, rtol: float = 1e-9) -> EigenSolution:
    """Integrate one dichotomy solution inward from x = -+ x_far.

    `index` selects the root of the asymptotic dispersion relation, sorted by
    ascending real part.  The returned values are the renormalized profile,
    which converges to the asymptotic eigenvector near the starting end.
    """
    sym = asymptotic_symbol(p, op, side, theta=theta, weighted=weighted)
    roots = dispersion_roots(sym, lam).roots
    order = len(roots)
    sep = min(abs(a - b) for i, a in enumerate(roots)
              for b in roots[i + 1:])
    if sep < 1e-6:
        raise ArithmeticError(f"spatial root collision at lambda = {lam}")
    nu = roots[index]
    x_start = x_far if side == "+" else -x_far
    splines = _coeff_splines(p, op, front, theta, weighted, x_far,
                             potential_shift=potential_shift)
    rhs_full = _companion_rhs(splines, lam, order)

    def rhs(x, y):
        return rhs_full(x, y) - nu * y

    v0 = np.array([nu ** k for k in range(order)], dtype=complex)
    xs = np.linspace(x_start, 0.0, n_samples)
    values = np.empty((order, n_samples), dtype=complex)
    values[:, 0] = v0
    ledger = []
    y = v0.copy()
    seg = 8
    for k in range(0, n_samples - 1, seg):
        stop = min(k + seg, n_samples - 1)
        sol = solve_ivp(rhs, (xs[k], xs[stop]), y, method="DOP853",
                        rtol=rtol, atol=1e-12, dense_output=True)
        if not sol.success:
            raise ArithmeticError(f"stiff integration failed at lambda = {lam}")
        for m in range(k + 1, stop + 1):
            values[:, m] = sol.sol(xs[m])
        y = values[:, stop].copy()
        mag = float(np.max(np.abs(y)))
        if not math.isfinite(mag) or mag > 1e200:
            raise ArithmeticError("dichotomy integration overflowed")
        if mag > 1e6 or (0.0 < mag < 1e-6):
            # rescale only the continuation: stored samples keep the gauge of
            # the factors fired strictly before their segment, so the ledger
            # factor at xs[stop] applies to samples after that point
            ledger.append((float(xs[stop]), mag))
            y /= mag
    return EigenSolution(lam=complex(lam), op=op, side=side, index=index,
                         nu=complex(nu), x=xs, values=values, ledger=ledger,
                         x_start=float(x_start))


def wronskian_identity_check(p: SystemParams, op: str, lam: complex,
                             front: FrontProfile, x_grid=None,
                             theta: float | None = None,
                             weighted: bool = False) -> float:
    """Max relative deviation of det of a fundamental system from its closed form.

    For an operator with coefficients a_j the determinant of any fundamental
    solution matrix obeys W(x) = W(0) exp(-int_0^x a_{n-1}/a_n); for the bare
    u-operator that exponent is -c x/d, for the bare v-operator it vanishes.
    """
    if x_grid is None:
        x_grid = np.linspace(0.0, 5.0, 26)
    x_grid = np.asarray(x_grid, dtype=float)
    splines = _coeff_splines(p, op, front, theta, weighted,
                             x_far=float(np.max(np.abs(x_grid))) + 2.0)
    order = len(splines) - 1
    rhs = _companion_rhs(splines, lam, order)

    def rhs_mat(x, yflat):
        y = yflat.reshape(order, order)
        out = np.empty_like(y)
        for col in range(order):
            out[:, col] = rhs(x, y[:, col])
        return out.ravel()

    y0 = np.eye(order, dtype=complex).ravel()
    sol = solve_ivp(rhs_mat, (x_grid[0], x_grid[-1]), y0, method="DOP853",
                    rtol=1e-10, atol=1e-12, dense_output=True)
    dets = np.array([np.linalg.det(sol.sol(x).reshape(order, order))
                     for x in x_grid])
    ratio_a = splines[order - 1]
    lead = splines[order]
    fine = np.linspace(x_grid[0], x_grid[-1], 2001)
    integrand = ratio_a(fine) / lead(fine)
    cumulative = np.concatenate(([0.0], np.cumsum(
        0.5 * (integrand[1:] + integrand[:-1]) * np.diff(fine))))
    expected = dets[0] * np.exp(-np.interp(x_grid, fine, cumulative))
    return float(np.max(np.abs(dets - expected) / np.abs(expected)))


def evans_value(p: SystemParams, front: FrontProfile, theta: float,
                lam: complex, x_far: float = 40.0,
                potential_shift=None, rtol: float = 1e-9) -> complex:
    """Renormalized Evans determinant of the weighted u-operator at x = 0.

    Positive-real ledger factors and the holomorphic exponential prefactors
    are dropped: they cannot wind, so the argument along closed contours is
    that of the true Evans function.
    """
    sols = []
    for side, index in (("+", 0), ("-", 1)):
        sols.append(asymptotic_solution(p, "kpp", lam, side, index, front,
                                        theta=theta, weighted=True,
                                        x_far=x_far, n_samples=2,
                                        potential_shift=potential_shift,
                                        rtol=rtol))
    m = np.column_stack([s.values[:, -1] for s in sols])
    return complex(m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0])


def _refine_args(p, front, theta, lams, vals, depth, kw):
    """Ensure adjacent samples differ by less than pi/2 in argument."""
    out_l, out_v = [lams[0]], [vals[0]]
    for k in range(1, len(lams)):
        a, b = lams[k - 1], lams[k]
        va, vb = vals[k - 1], vals[k]
        stack = [(a, va, b, vb, depth)]
        while stack:
            a, va, b, vb, d = stack.pop()
            dphi = cmath.phase(vb / va)
            if abs(dphi) <= 0.5 * math.pi or d == 0:
                out_l.append(b)
                out_v.append(vb)
            else:
                mid = 0.5 * (a + b)
                vm = evans_value(p, front, theta, mid, **kw)
                stack.append((mid, vm, b, vb, d - 1))
                stack.append((a, va, mid, vm, d - 1))
    return out_l, out_v


def _slit_avoiding_rectangle(eta: float, margin: float = 0.05,
                             re_max: float = 10.0, im_max: float = 20.0):
    """Corner points of the rectangle [-2 eta, re_max] x [-im_max, im_max]
    with a channel excursion around the negative real axis."""
    left = -2.0 * eta
    return [
        complex(re_max, -im_max),
        complex(re_max, im_max),
        complex(left, im_max),
        complex(left, margin),
        complex(margin, margin),
        complex(margin, -margin),
        complex(left, -margin),
        complex(left, -im_max),
        complex(re_max, -im_max),
    ]


def evans_winding(p: SystemParams, front: FrontProfile, theta: float,
                  eta: float, contour=None, n_per_edge: int = 24,
                  potential_shift=None, max_depth: int = 12,
                  x_far: float = 40.0, rtol: float = 1e-8) -> dict:
    """Winding number of the Evans function along a slit-avoiding contour.

    Samples each contour edge, refines until adjacent arguments differ by
    less than pi/2, and accumulates the phase.  Returns the integer winding,
    the minimal |W| relative to the contour median, and the samples.
    """
    if contour is None:
        contour = _slit_avoiding_rectangle(eta)
    lams = []
    for a, b in zip(contour[:-1], contour[1:]):
        ts = np.linspace(0.0, 1.0, n_per_edge, endpoint=False)
        lams.extend(a + (b - a) * t for t in ts)
    lams.append(contour[-1])
    kw = {"x_far": x_far, "potential_shift": potential_shift, "rtol": rtol}
    vals = [evans_value(p, front, theta, lam, **kw) for lam in lams]
    scale = float(np.median(np.abs(vals)))
    if min(abs(v) for v in vals) < 1e-10 * scale:
        raise ArithmeticError("Evans function nearly vanishes on the contour")
    lams, vals = _refine_args(p, front, theta, lams, vals, max_depth, kw)
    total = 0.0
    for k in range(1, len(vals)):
        total += cmath.phase(vals[k] / vals[k - 1])
    winding = total / (2.0 * math.pi)
    if abs(winding - round(winding)) > 0.05:
        raise ArithmeticError(f"winding {winding:.3f} did not converge to an integer")
    return {
        "winding": int(round(winding)),
        "min_abs": float(min(abs(v) for v in vals)),
        "median_abs": scale,
        "n_samples": len(vals),
        "samples": [EvansSample(lam=l, value=v) for l, v in zip(lams, vals)],
    }
