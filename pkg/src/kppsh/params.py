"""Model parameters, coupling thresholds, hypothesis gate and equilibria.

The model couples a cubic KPP equation for u with a Swift-Hohenberg equation
for v:

    u_t = d u_xx + alpha u (1 - u^2) + beta v
    v_t = -(1 + d_xx)^2 v + v (mu - sigma v^2) - gamma v (1 - u)

Two thresholds on the stabilizing coupling gamma decide whether the front
stability machinery applies: `gamma_rem` (below it the exponential weight
cannot stabilize the SH spectrum ahead of the front) and `gamma_gl` (above it
the Turing bifurcation behind the front turns subcritical).  The gate is
admissible iff gamma_rem < gamma < gamma_gl.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

__all__ = [
    "SystemParams",
    "GateReport",
    "EquilibriumSet",
    "default_preset",
    "critical_speed",
    "gamma_rem",
    "gl_cubic_coefficient",
    "gamma_gl",
    "check_hypotheses",
    "equilibria",
]


@dataclass(frozen=True)
class SystemParams:
    """The five model parameters plus the bifurcation parameter mu.

    mu0 is the ceiling below which mu must stay for the stability result to
    apply; it also enters the remnant threshold.  epsilon = sqrt(mu) is the
    natural amplitude scale of the bifurcating pattern.
    """

    d: float = 1.0
    alpha: float = 1.0
    beta: float = 0.1
    gamma: float = 11.0
    sigma: float = 10.0
    mu: float = 0.0
    mu0: float = 0.01

    def __post_init__(self):
        if self.d <= 0 or self.alpha <= 0:
            raise ValueError("diffusion d and reaction rate alpha must be positive")
        if self.sigma <= 0 or self.gamma <= 0:
            raise ValueError("sigma and gamma must be positive")
        if self.beta == 0:
            raise ValueError("linear coupling beta must be nonzero")
        if self.mu0 <= 0:
            raise ValueError("mu0 must be positive")

    @property
    def c_star(self) -> float:
        return critical_speed(self)

    @property
    def epsilon(self) -> float:
        if self.mu < 0:
            raise ValueError("epsilon = sqrt(mu) requires mu >= 0")
        return math.sqrt(self.mu)

    def with_(self, **kw) -> "SystemParams":
        return replace(self, **kw)


@dataclass(frozen=True)
class GateReport:
    """Outcome of the two-threshold admissibility check."""

    c_star: float
    gamma_rem: float
    gamma_gl: float
    admissible: bool
    gamma_interval: tuple[float, float] | None
    p_of_gamma: float

    def to_dict(self) -> dict:
        return {
            "c_star": self.c_star,
            "gamma_rem": self.gamma_rem,
            "gamma_gl": self.gamma_gl,
            "admissible": self.admissible,
            "gamma_interval": list(self.gamma_interval) if self.gamma_interval else None,
            "p_of_gamma": self.p_of_gamma,
        }


@dataclass(frozen=True)
class EquilibriumSet:
    """Constant steady states of the system and the sigma threshold.

    For sigma > sigma0 the three trivial states are the only ones; below,
    nontrivial intersections of the two nullcline curves may appear and are
    root-found numerically.
    """

    points: tuple[tuple[float, float], ...]
    sigma0: float


def default_preset() -> SystemParams:
    """Parameter set for which the gamma interval is comfortably nonempty."""
    return SystemParams(d=1.0, alpha=1.0, beta=0.1, gamma=11.0, sigma=10.0,
                        mu=0.005, mu0=0.01)


def critical_speed(p: SystemParams) -> float:
    """Linear spreading speed of the u front, 2 sqrt(d alpha)."""
    if p.d <= 0 or p.alpha <= 0:
        raise ValueError("critical speed requires d > 0 and alpha > 0")
    return 2.0 * math.sqrt(p.d * p.alpha)


def gamma_rem(p: SystemParams) -> float:
    """Lower gamma threshold: minimal stabilizing coupling ahead of the front.

    Equals the sup of the weighted SH border at +infinity plus gamma, i.e.
    8 (alpha/d)^2 + 4 (alpha/d) - 2 alpha + mu0.
    """
    r = p.alpha / p.d
    return 8.0 * r * r + 4.0 * r - 2.0 * p.alpha + p.mu0


def _quad_a(p: SystemParams) -> float:
    """Leading coefficient of the cubic-term polynomial P (gamma^2 weight)."""
    s = p.d + 2.0 * p.alpha
    return 19.0 / 9.0 + s * (1.0 / p.alpha + 1.0 / (9.0 * (4.0 * p.d + 2.0 * p.alpha)))


def gl_cubic_coefficient(p: SystemParams, gamma: float | None = None) -> float:
    """Closed form of the amplitude-equation cubic coefficient P(gamma).

    P(gamma) = a gamma^2 beta^2 - 3 gamma beta^2 (1 + alpha/(4d+2alpha))
               - 3 sigma (d+2alpha)^2,
    with a = 19/9 + (d+2alpha)(1/alpha + 1/(9(4d+2alpha))).  The bifurcation
    is supercritical exactly when P(gamma) < 0.
    """
    g = p.gamma if gamma is None else gamma
    s = p.d + 2.0 * p.alpha
    a = _quad_a(p)
    b2 = p.beta * p.beta
    return (a * g * g * b2
            - 3.0 * g * b2 * (1.0 + p.alpha / (4.0 * p.d + 2.0 * p.alpha))
            - 3.0 * p.sigma * s * s)


def gamma_gl(p: SystemParams) -> float:
    """Upper gamma threshold: the unique positive root of P."""
    a = _quad_a(p)
    s = p.d + 2.0 * p.alpha
    half = 3.0 * (4.0 * p.d + 3.0 * p.alpha) / (2.0 * a * (4.0 * p.d + 2.0 * p.alpha))
    return half + math.sqrt(half * half + 3.0 * p.sigma * s * s / (a * p.beta * p.beta))


def check_hypotheses(p: SystemParams) -> GateReport:
    """Admissibility gate: gamma must sit strictly between the two thresholds."""
    lo = gamma_rem(p)
    hi = gamma_gl(p)
    interval = (lo, hi) if lo < hi else None
    admissible = interval is not None and lo < p.gamma < hi
    return GateReport(
        c_star=critical_speed(p),
        gamma_rem=lo,
        gamma_gl=hi,
        admissible=admissible,
        gamma_interval=interval,
        p_of_gamma=gl_cubic_coefficient(p),
    )


def equilibrium_residuals(p: SystemParams, u: float, v: float) -> tuple[float, float]:
    """Right-hand sides of the system with all derivatives dropped."""
    r1 = p.alpha * u * (1.0 - u * u) + p.beta * v
    r2 = -v + v * (p.mu - p.sigma * v * v) - p.gamma * v * (1.0 - u)
    return r1, r2


def _nullcline_gap(p: SystemParams, v: float) -> float:
    # u from the v-nullcline, substituted into the u-nullcline.
    u = 1.0 - (p.mu - 1.0 - p.sigma * v * v) / p.gamma
    return v + (p.alpha / p.beta) * u * (1.0 - u * u)


def equilibria(p: SystemParams, n_scan: int = 20001, tol: float = 1e-12) -> EquilibriumSet:
    """All constant steady states for 0 <= mu < 1.

    The three trivial states always exist.  Nontrivial ones lie on the
    intersection of v = -(alpha/beta) u (1-u^2) with
    u = 1 - (mu - 1 - sigma v^2)/gamma; the tangent-line criterion gives the
    closed-form sufficient threshold sigma0 above which there are none.
    """
    if p.mu >= 1.0:
        raise ValueError("equilibria analysis requires mu < 1")
    sigma0 = (p.gamma * p.beta / (2.0 * p.alpha)) ** 2 / (4.0 * (1.0 - p.mu))
    points: list[tuple[float, float]] = [(0.0, 0.0), (1.0, 0.0), (-1.0, 0.0)]
    if p.sigma <= sigma0:
        # Intersections carry the sign of -beta through the cubic nullcline;
        # scan the relevant half-line and bisect each sign change of the gap.
        s = 1.0 if p.beta > 0 else -1.0
        v_scale = abs(p.gamma * p.beta) / (p.alpha * p.sigma)
        v_alg = 2.0 * (abs(p.beta / p.alpha) * (p.gamma / p.sigma) ** 3) ** 0.2
        v_max = max(v_scale, v_alg, 1.0)
        vs = [s * v for v in _linspace_pos(v_max, n_scan)]
        gaps = [_nullcline_gap(p, v) for v in vs]
        for i in range(len(vs) - 1):
            if gaps[i] == 0.0:
                points.append(_point_from_v(p, vs[i]))
            elif gaps[i] * gaps[i + 1] < 0.0:
                va, vb = vs[i], vs[i + 1]
                fa = gaps[i]
                for _ in range(200):
                    vm = 0.5 * (va + vb)
                    fm = _nullcline_gap(p, vm)
                    if fa * fm <= 0.0:
                        vb = vm
                    else:
                        va, fa = vm, fm
                    if abs(vb - va) < tol:
                        break
                points.append(_point_from_v(p, 0.5 * (va + vb)))
        if gaps[-1] == 0.0:
            points.append(_point_from_v(p, vs[-1]))
    return EquilibriumSet(points=tuple(points), sigma0=sigma0)


def _point_from_v(p: SystemParams, v: float) -> tuple[float, float]:
    u = 1.0 - (p.mu - 1.0 - p.sigma * v * v) / p.gamma
    return (u, v)


def _linspace_pos(v_max: float, n: int) -> list[float]:
    # open at 0: the trivial branch v = 0 is not a curve intersection
    step = v_max / n
    return [step * (i + 1) for i in range(n)]
