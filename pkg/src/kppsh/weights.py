"""Spatial weights and weighted / uniformly-local norms.

All weights are smooth, positive, and piecewise-explicit: they take the
printed exponential/algebraic branch for |x| >= 1 and blend on (-1, 1).
The blend is a quintic-smoothstep ramp in log space, which keeps every
weight monotone where it should be and C^2 (in fact C^3) at the seams.

Derivatives of the weights up to fourth order are produced analytically via
truncated Taylor "jets" of the log-weight; the conjugation commutators in the
simulation and Evans modules rely on these being exact, not finite
differences.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.signal import fftconvolve

from .fields import Field1D, centered_derivative
from .params import SystemParams

__all__ = [
    "WeightSpec",
    "UlNorm",
    "eval_weight",
    "weighted_sup_norm",
    "ul_sobolev_norm",
    "ul_sobolev_profile",
]

JET_ORDER = 4

_KINDS = ("omega_kpp", "omega_sh", "rho_star", "varpi", "omega_star", "rho_ul")


# ---------------------------------------------------------------------------
# jet arithmetic: arrays of shape (JET_ORDER+1, n), row k = k-th derivative

def _jet_mul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    out = np.zeros_like(a)
    for k in range(JET_ORDER + 1):
        for i in range(k + 1):
            out[k] += math.comb(k, i) * a[i] * b[k - i]
    return out


def _jet_log(u: np.ndarray) -> np.ndarray:
    g = np.zeros_like(u)
    g[0] = np.log(u[0])
    g[1] = u[1] / u[0]
    for k in range(2, JET_ORDER + 1):
        acc = u[k].copy()
        for j in range(k - 1):
            acc -= math.comb(k - 1, j) * g[j + 1] * u[k - 1 - j]
        g[k] = acc / u[0]
    return g


def _smoothstep_jets(t: np.ndarray) -> np.ndarray:
    """6t^5 - 15t^4 + 10t^3 and derivatives (in t)."""
    s = np.zeros((JET_ORDER + 1, t.size))
    s[0] = ((6 * t - 15) * t + 10) * t ** 3
    s[1] = ((30 * t - 60) * t + 30) * t ** 2
    s[2] = ((120 * t - 180) * t + 60) * t
    s[3] = (360 * t - 360) * t + 60
    s[4] = 720 * t - 360
    return s


def _ramp_jets(x: np.ndarray) -> np.ndarray:
    """C^3 ramp h with h = 0 for x <= -1, h = x for x >= 1, h' = smoothstep."""
    x = np.asarray(x, dtype=float)
    h = np.zeros((JET_ORDER + 1, x.size))
    right = x >= 1.0
    h[0, right] = x[right]
    h[1, right] = 1.0
    mid = (x > -1.0) & (x < 1.0)
    if np.any(mid):
        t = (x[mid] + 1.0) / 2.0
        s = _smoothstep_jets(t)
        h[0, mid] = 2.0 * ((t - 3.0) * t + 2.5) * t ** 4
        for k in range(1, JET_ORDER + 1):
            h[k, mid] = s[k - 1] / 2.0 ** (k - 1)
    return h


def _reflected_ramp_jets(x: np.ndarray) -> np.ndarray:
    """r(x) = -h(-x): equals x for x <= -1 and 0 for x >= 1."""
    h = _ramp_jets(-np.asarray(x, dtype=float))
    r = np.empty_like(h)
    for k in range(JET_ORDER + 1):
        r[k] = ((-1.0) ** (k + 1)) * h[k]
    return r


def _log_rho_star_jets(x: np.ndarray) -> np.ndarray:
    """log rho* : 0 for x <= -1, (1/2) log(1+x^2) for x >= 1, blended between."""
    x = np.asarray(x, dtype=float)
    g = np.zeros((JET_ORDER + 1, x.size))
    u = np.zeros((JET_ORDER + 1, x.size))
    u[0] = 1.0 + x * x
    u[1] = 2.0 * x
    u[2] = 2.0
    q = 0.5 * _jet_log(u)
    right = x >= 1.0
    g[:, right] = q[:, right]
    mid = (x > -1.0) & (x < 1.0)
    if np.any(mid):
        t = (x[mid] + 1.0) / 2.0
        s = _smoothstep_jets(t)
        w = np.zeros((JET_ORDER + 1, t.size))
        for k in range(JET_ORDER + 1):
            w[k] = s[k] / 2.0 ** k
        g[:, mid] = _jet_mul(w, q[:, mid])
    return g


def _bell_ratios(g: np.ndarray) -> np.ndarray:
    """w^(k)/w from the log-weight jets g (complete Bell polynomials)."""
    out = np.zeros_like(g)
    out[0] = 1.0
    out[1] = g[1]
    out[2] = g[2] + g[1] ** 2
    out[3] = g[3] + 3.0 * g[1] * g[2] + g[1] ** 3
    out[4] = (g[4] + 4.0 * g[1] * g[3] + 3.0 * g[2] ** 2
              + 6.0 * g[1] ** 2 * g[2] + g[1] ** 4)
    return out


# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class WeightSpec:
    """One of the named weights, parameterized by (c*, d, theta)."""

    kind: str
    c_star: float = 2.0
    d: float = 1.0
    theta: float = -0.1

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown weight kind {self.kind!r}")
        if self.kind in ("omega_sh", "omega_star") and not self.theta < 0:
            raise ValueError("omega_sh requires theta < 0")

    @classmethod
    def for_params(cls, kind: str, p: SystemParams, theta: float = -0.1) -> "WeightSpec":
        return cls(kind=kind, c_star=p.c_star, d=p.d, theta=theta)

    def log_jets(self, x: np.ndarray) -> np.ndarray:
        """Jets (derivatives 0..4) of log w at the points x."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        if self.kind == "omega_kpp":
            return -(self.c_star / (2.0 * self.d)) * _ramp_jets(x)
        if self.kind == "omega_sh":
            return self.theta * _reflected_ramp_jets(x)
        if self.kind == "rho_star":
            return _log_rho_star_jets(x)
        if self.kind == "varpi":
            return (_log_rho_star_jets(x)
                    - (self.c_star / (2.0 * self.d)) * _ramp_jets(x))
        if self.kind == "omega_star":
            return (-(self.c_star / (2.0 * self.d)) * _ramp_jets(x)
                    + self.theta * _reflected_ramp_jets(x))
        if self.kind == "rho_ul":
            u = np.zeros((JET_ORDER + 1, x.size))
            u[0] = 1.0 + x * x
            u[1] = 2.0 * x
            u[2] = 2.0
            return -_jet_log(u)
        raise AssertionError(self.kind)

    def value(self, x: np.ndarray) -> np.ndarray:
        return np.exp(self.log_jets(x)[0])

    def log_derivative(self, x: np.ndarray) -> np.ndarray:
        """w'/w, the exponent rate entering conjugated operators."""
        return self.log_jets(x)[1]

    def deriv_ratios(self, x: np.ndarray) -> np.ndarray:
        """Array with rows w^(k)/w for k = 0..4."""
        return _bell_ratios(self.log_jets(x))


def eval_weight(w: WeightSpec, x) -> np.ndarray | float:
    """Pointwise weight values; scalar in, scalar out."""
    scalar = np.isscalar(x)
    out = w.value(np.atleast_1d(np.asarray(x, dtype=float)))
    return float(out[0]) if scalar else out


def weighted_sup_norm(f: Field1D, w: WeightSpec, frame: str = "comoving") -> float:
    """max over the grid of |f(x)| w(x); the grid must live in `frame`."""
    if f.frame != frame:
        raise ValueError(f"field frame {f.frame!r} does not match weight frame {frame!r}")
    return float(np.max(np.abs(f.values) * w.value(f.grid.x)))


class UlNorm(float):
    """A float norm value carrying a grid-coarseness warning flag."""

    coarse: bool

    def __new__(cls, value: float, coarse: bool = False):
        obj = super().__new__(cls, value)
        obj.coarse = coarse
        return obj


def _window_kernels(offsets: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    rho = 1.0 / (1.0 + offsets ** 2)
    drho = -2.0 * offsets * rho * rho
    return rho * rho, 2.0 * rho * drho, drho * drho


def ul_sobolev_profile(f: Field1D, s: int = 0) -> np.ndarray:
    """Squared windowed norm || rho_ul(.-y) f ||_{H^s}^2 for every center y.

    Window centers run over the grid; boundary windows are truncated.  The
    quadratic forms in y are cross-correlations, evaluated with FFTs.
    """
    if s not in (0, 1):
        raise ValueError("only s = 0 and s = 1 are supported")
    g = f.grid
    v = np.asarray(f.values)
    v2 = (v * np.conj(v)).real if np.iscomplexobj(v) else v * v
    trapw = np.full(g.n, g.dx)
    if not g.periodic:
        trapw[0] *= 0.5
        trapw[-1] *= 0.5

    # correlations below evaluate kernels at y_j - x_i; window kernels are
    # built at negated offsets so that odd factors (rho rho') keep their sign
    if g.periodic:
        m = np.arange(g.n)
        offsets = ((m * g.dx + g.length / 2.0) % g.length) - g.length / 2.0
        k0, k01, k1 = _window_kernels(-offsets)

        def corr(h, kern):
            return np.fft.irfft(np.fft.rfft(h) * np.fft.rfft(kern), n=g.n)
    else:
        offsets = g.dx * (np.arange(2 * g.n - 1) - (g.n - 1))
        k0, k01, k1 = _window_kernels(-offsets)

        def corr(h, kern):
            return fftconvolve(h, kern, mode="same")

    total = corr(v2 * trapw, k0)
    if s == 1:
        dv = centered_derivative(v, g.dx, periodic=g.periodic)
        dv2 = (dv * np.conj(dv)).real if np.iscomplexobj(dv) else dv * dv
        cross = (v * np.conj(dv)).real if np.iscomplexobj(v) else v * dv
        total = total + corr(dv2 * trapw, k0) + corr(cross * trapw, k01) + corr(v2 * trapw, k1)
    return total


def ul_sobolev_norm(f: Field1D, s: int = 0) -> UlNorm:
    """Uniformly-local Sobolev norm sup_y || rho_ul(.-y) f ||_{H^s}, s in {0,1}."""
    total = ul_sobolev_profile(f, s)
    value = math.sqrt(max(float(np.max(total)), 0.0))
    return UlNorm(value, coarse=f.grid.dx > 0.5)
