"""Critical front of the scalar cubic KPP equation in the co-moving frame.

The profile solves d q'' + c* q' + alpha q (1 - q^2) = 0 with q(-inf) = 1,
q(+inf) = 0 and the phase fixed by q(0) = 1/2.  A shooting pass from the
saddle (1, 0) provides the initial guess; a Newton pass on the centered
second-order collocation system polishes it to solver tolerance.  The phase
is pinned by replacing the collocation row at the phase node, which keeps
the Jacobian tridiagonal and removes the near-translation null mode.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.integrate import solve_ivp
from scipy.interpolate import CubicSpline
from scipy.sparse.linalg import spsolve

from .fields import centered_derivative
from .params import SystemParams, critical_speed
from .weights import WeightSpec

__all__ = [
    "FrontProfile",
    "FrontAsymptoticsFit",
    "saddle_rate",
    "solve_front",
    "check_front_asymptotics",
    "shooting_minimum",
    "tail_rate",
]


@dataclass
class FrontProfile:
    """Critical front values and derivative on a uniform grid."""

    x: np.ndarray
    q: np.ndarray
    qprime: np.ndarray
    c: float
    d: float
    alpha: float
    residual: float  # sup-norm of the collocation residual on the interior
    phase_x0: float

    def spline(self) -> CubicSpline:
        return CubicSpline(self.x, self.q)

    def spline_prime(self) -> CubicSpline:
        return CubicSpline(self.x, self.qprime)

    @property
    def dx(self) -> float:
        return float(self.x[1] - self.x[0])


@dataclass(frozen=True)
class FrontAsymptoticsFit:
    """Linear fit of the weighted derivative q' e^{+c x/(2d)} ~ a x + b."""

    a: float
    b: float
    r_squared: float
    window: tuple[float, float]


def saddle_rate(p: SystemParams) -> float:
    """Unstable rate of the (1, 0) saddle: (sqrt(3) - 1) sqrt(alpha/d)."""
    return (math.sqrt(3.0) - 1.0) * math.sqrt(p.alpha / p.d)


def _front_rhs(c: float, d: float, alpha: float):
    def rhs(x, y):
        q, qp = y
        return (qp, -(c * qp + alpha * q * (1.0 - q * q)) / d)

    return rhs


def _shoot(p: SystemParams, c: float, span: float, eps0: float = 1e-6):
    """Integrate off the saddle's unstable direction; returns the IVP solution."""
    kappa = saddle_rate(p)
    y0 = (1.0 - eps0, -kappa * eps0)
    half = lambda x, y: y[0] - 0.5  # noqa: E731
    half.direction = -1.0
    overshoot = lambda x, y: y[0] + 0.05  # noqa: E731
    overshoot.direction = -1.0
    overshoot.terminal = True
    sol = solve_ivp(_front_rhs(c, p.d, p.alpha), (0.0, span), y0, method="DOP853",
                    rtol=1e-10, atol=1e-12, dense_output=True,
                    events=[half, overshoot])
    return sol, kappa, eps0


def shooting_minimum(p: SystemParams, c: float, span: float = 60.0) -> float:
    """Minimum of q along the shooting trajectory; negative = overshoot."""
    sol, _, _ = _shoot(p, c, span)
    xs = np.linspace(0.0, sol.t[-1], 4000)
    return float(np.min(sol.sol(xs)[0]))


def solve_front(p: SystemParams, domain: tuple[float, float] = (-40.0, 60.0),
                n: int = 4001, phase_x0: float = 0.0, newton_tol: float = 1e-11,
                max_iter: int = 50) -> FrontProfile:
    """Compute the critical front on `domain` with n nodes and q(phase_x0) = 1/2."""
    x_min, x_max = domain
    if x_min > -20.0 or x_max < 20.0:
        raise ValueError("domain must contain [-20, 20]")
    kappa = saddle_rate(p)
    x = np.linspace(x_min, x_max, n)
    dx = x[1] - x[0]
    if dx > 0.1 / kappa:
        raise ValueError(f"grid spacing {dx:.4g} does not resolve the saddle rate "
                         f"(need dx <= {0.1 / kappa:.4g})")
    i0 = int(round((phase_x0 - x_min) / dx))
    if not (0 < i0 < n - 1) or abs(x[i0] - phase_x0) > 1e-9 * max(1.0, abs(phase_x0)):
        raise ValueError("phase point must be an interior grid node")

    c = critical_speed(p)
    sol, kappa, eps0 = _shoot(p, c, x_max - x_min + 40.0)
    if not sol.t_events[0].size:
        raise RuntimeError("shooting never reached q = 1/2")
    s_half = sol.t_events[0][0]

    # initial guess: saddle asymptote left of the shooting start, dense IVP after
    s = x - phase_x0 + s_half
    q = np.empty(n)
    left = s < 0.0
    q[left] = 1.0 - eps0 * np.exp(kappa * s[left])
    inside = ~left & (s <= sol.t[-1])
    q[inside] = sol.sol(s[inside])[0]
    q[~left & (s > sol.t[-1])] = 0.0
    np.clip(q, 0.0, 1.0, out=q)
    q[0], q[i0] = 1.0, 0.5

    # Newton unknowns are Q = q / omega_kpp.  The critical tail of q is the
    # degenerate pair (1, x) e^{-c x/(2d)}; in Q variables both modes stay
    # bounded on the grid, so the system can enforce the collocation equation
    # at every interior node (no end condition beyond the recurrence itself)
    # and close with the left Dirichlet value and the phase pin.  Any local
    # condition at the right end would corrupt the secular tail coefficient.
    omega = WeightSpec(kind="omega_kpp", c_star=c, d=p.d).value(x)
    inv_dx2 = 1.0 / (dx * dx)
    inv_2dx = 1.0 / (2.0 * dx)
    lower = p.d * inv_dx2 - c * inv_2dx
    upper = p.d * inv_dx2 + c * inv_2dx

    def collocation(qv: np.ndarray) -> np.ndarray:
        res = np.zeros_like(qv)
        res[1:-1] = (p.d * (qv[:-2] - 2.0 * qv[1:-1] + qv[2:]) * inv_dx2
                     + c * (qv[2:] - qv[:-2]) * inv_2dx
                     + p.alpha * qv[1:-1] * (1.0 - qv[1:-1] ** 2))
        return res

    def system(big_q: np.ndarray) -> np.ndarray:
        qv = omega * big_q
        interior = collocation(qv)[1:-1]
        return np.concatenate(([qv[0] - 1.0], interior, [qv[i0] - 0.5]))

    rows_mid = np.repeat(np.arange(1, n - 1), 3)
    cols_mid = (np.repeat(np.arange(1, n - 1), 3)
                + np.tile(np.array([-1, 0, 1]), n - 2))
    big_q = q / omega
    err = math.inf
    res = system(big_q)
    for _ in range(max_iter):
        err = float(np.max(np.abs(res)))
        if err <= newton_tol:
            break
        q_cur = omega * big_q
        diag_q = -2.0 * p.d * inv_dx2 + p.alpha * (1.0 - 3.0 * q_cur * q_cur)
        vals_mid = np.empty(3 * (n - 2))
        vals_mid[0::3] = lower * omega[:-2]
        vals_mid[1::3] = diag_q[1:-1] * omega[1:-1]
        vals_mid[2::3] = upper * omega[2:]
        rows = np.concatenate(([0], rows_mid, [n - 1]))
        cols = np.concatenate(([0], cols_mid, [i0]))
        vals = np.concatenate(([omega[0]], vals_mid, [omega[i0]]))
        jac = sparse.csc_matrix((vals, (rows, cols)), shape=(n, n))
        step = spsolve(jac, res)
        # damped update guards the first iterations from the crude tail guess
        for _ in range(12):
            trial = big_q - step
            res_trial = system(trial)
            if float(np.max(np.abs(res_trial))) <= err or np.max(np.abs(step)) < 1e-15:
                break
            step = 0.5 * step
        big_q, res = trial, res_trial
    else:
        raise RuntimeError(f"front Newton did not converge in {max_iter} iterations; "
                           f"final residual {err:.3e}")

    q = omega * big_q
    # report the genuine ODE residual everywhere, including the pinned node
    residual = float(np.max(np.abs(collocation(q)[1:-1])))
    qprime = centered_derivative(q, dx)
    return FrontProfile(x=x, q=q, qprime=qprime, c=c, d=p.d, alpha=p.alpha,
                        residual=residual, phase_x0=phase_x0)


def tail_rate(f: FrontProfile, window: tuple[float, float] | None = None) -> float:
    """Least-squares slope of log(1 - q) on the left-tail window.

    The default window starts two units inside the domain: the left Dirichlet
    node carries 1 - q = 0 exactly and its O(1e-10) boundary layer would
    pollute the fit.
    """
    if window is None:
        window = (f.x[0] + 2.0, f.x[0] + 7.0)
    mask = (f.x >= window[0]) & (f.x <= window[1])
    y = 1.0 - f.q[mask]
    if np.any(y <= 0):
        raise ValueError("tail window reaches the noise floor (1 - q <= 0)")
    fit = np.polyfit(f.x[mask], np.log(y), 1)
    return float(fit[0])


def check_front_asymptotics(f: FrontProfile,
                            window: tuple[float, float] | None = None) -> FrontAsymptoticsFit:
    """Fit q'(x) e^{+c x/(2d)} against a x + b on [10, x_max - 5]."""
    if window is None:
        window = (10.0, float(f.x[-1]) - 5.0)
    mask = (f.x >= window[0]) & (f.x <= window[1])
    xs = f.x[mask]
    g = f.qprime[mask] * np.exp(f.c * xs / (2.0 * f.d))
    a, b = np.polyfit(xs, g, 1)
    pred = a * xs + b
    ss_res = float(np.sum((g - pred) ** 2))
    ss_tot = float(np.sum((g - np.mean(g)) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return FrontAsymptoticsFit(a=float(a), b=float(b), r_squared=r2,
                               window=(float(window[0]), float(window[1])))
