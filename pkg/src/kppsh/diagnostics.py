"""Quantitative post-processing: decay fits, amplitude scaling, wavenumbers.

These routines turn recorded time series and snapshots into the headline
numbers of the study: the algebraic decay exponent of the weighted front
perturbation, the square-root-of-mu scaling of the saturated pattern, and
the selected wavenumber behind the front.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.signal import find_peaks

from .params import SystemParams, gl_cubic_coefficient

__all__ = [
    "DecayFit",
    "decay_fit",
    "window_sensitivity",
    "find_pattern_window",
    "pattern_amplitude",
    "amplitude_scaling",
    "pattern_wavenumber",
    "predicted_pattern_amplitude",
]


@dataclass(frozen=True)
class DecayFit:
    window: tuple[float, float]
    slope: float
    intercept: float
    r_squared: float
    kind: str  # 'algebraic' or 'exponential'
    semilog_rate: float


def _lsq(xs: np.ndarray, ys: np.ndarray):
    a, b = np.polyfit(xs, ys, 1)
    pred = a * xs + b
    ss_res = float(np.sum((ys - pred) ** 2))
    ss_tot = float(np.sum((ys - np.mean(ys)) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return float(a), float(b), r2


def decay_fit(t: np.ndarray, values: np.ndarray,
              window: tuple[float, float]) -> DecayFit:
    """Log-log least squares on the window, with an algebraic/exponential tag.

    The tag compares goodness of fit on log-log against semilog axes; a clean
    exponential looks curved on log-log and straight on semilog.
    """
    t = np.asarray(t, dtype=float)
    values = np.asarray(values, dtype=float)
    mask = (t >= window[0]) & (t <= window[1]) & (t > 0)
    if window[1] < 10.0 * window[0]:
        raise ValueError("fit window must span at least one decade")
    if not np.all(values[mask] > 0):
        raise ValueError("decay fit needs positive values on the window")
    tt, vv = t[mask], values[mask]
    slope, intercept, r2_log = _lsq(np.log(tt), np.log(vv))
    rate, _, r2_semi = _lsq(tt, np.log(vv))
    kind = "algebraic" if r2_log >= r2_semi else "exponential"
    return DecayFit(window=(float(window[0]), float(window[1])), slope=slope,
                    intercept=intercept, r_squared=r2_log, kind=kind,
                    semilog_rate=-rate)


def window_sensitivity(t: np.ndarray, values: np.ndarray,
                       w1=(10.0, 100.0), w2=(20.0, 200.0),
                       tol: float = 0.1) -> dict:
    """Slope stability across two fit windows; flags unconverged runs."""
    f1 = decay_fit(t, values, w1)
    f2 = decay_fit(t, values, w2)
    return {"slope_1": f1.slope, "slope_2": f2.slope,
            "converged": abs(f1.slope - f2.slope) <= tol}


def find_pattern_window(x: np.ndarray, v: np.ndarray, interface: float,
                        sponge_end: float, min_wavelengths: int = 20,
                        margin: float = 30.0) -> tuple[float, float]:
    """Locate a window of saturated pattern strictly behind the front.

    The pattern detaches from the front (it expands at a slow rate while the
    front runs at c*), so the block is found from the envelope of |v| rather
    than at a fixed offset from the interface.
    """
    zone = (x >= sponge_end + 10.0) & (x <= interface - margin)
    if not np.any(zone):
        raise ValueError("no room between sponge and front")
    env = np.abs(v)
    vmax = float(np.max(env[zone]))
    if vmax <= 0:
        raise ValueError("no pattern present")
    strong = zone & (env >= 0.5 * vmax)
    idx = np.where(strong)[0]
    # widest contiguous block of strong signal
    breaks = np.where(np.diff(idx) > int(2.0 * math.pi / (x[1] - x[0])))[0]
    segments = np.split(idx, breaks + 1)
    seg = max(segments, key=len)
    lo, hi = float(x[seg[0]]), float(x[seg[-1]])
    need = min_wavelengths * 2.0 * math.pi
    if hi - lo < need:
        raise ValueError(f"pattern block {hi - lo:.1f} shorter than "
                         f"{min_wavelengths} wavelengths")
    mid = 0.5 * (lo + hi)
    half = 0.5 * need if hi - lo < 2.0 * need else 0.25 * (hi - lo) * 2
    half = min(half, 0.5 * (hi - lo))
    return (mid - half, mid + half)


def pattern_amplitude(x: np.ndarray, v: np.ndarray,
                      window: tuple[float, float]) -> float:
    """Median height of the |v| envelope peaks inside the window."""
    mask = (x >= window[0]) & (x <= window[1])
    seg = np.abs(v[mask])
    peaks, _ = find_peaks(seg)
    if peaks.size < 5:
        raise ValueError("too few oscillations for an amplitude estimate")
    return float(np.median(seg[peaks]))


def amplitude_scaling(runs: list, saturation_tol: float = 0.01) -> dict:
    """Saturated amplitudes and pairwise ratios across runs at different mu.

    Each run entry is a dict with keys mu, x, snapshots (list of (t, v)),
    interface, sponge_end.  A run is flagged unsaturated when the amplitude
    still drifts more than `saturation_tol` per time unit at the end.
    """
    out = []
    for run in runs:
        x = run["x"]
        snaps = run["snapshots"]
        t_last, v_last = snaps[-1]
        window = find_pattern_window(x, v_last, run["interface"], run["sponge_end"])
        amp_last = pattern_amplitude(x, v_last, window)
        t_prev, v_prev = snaps[-2]
        amp_prev = pattern_amplitude(x, v_prev,
                                     find_pattern_window(x, v_prev,
                                                         run["interface"],
                                                         run["sponge_end"]))
        drift = abs(amp_last - amp_prev) / (amp_last * (t_last - t_prev))
        out.append({"mu": run["mu"], "amplitude": amp_last,
                    "saturated": drift <= saturation_tol, "drift_rate": drift,
                    "window": window})
    ratios = []
    for i in range(len(out)):
        for j in range(i + 1, len(out)):
            ratios.append({
                "pair": (out[i]["mu"], out[j]["mu"]),
                "measured": out[i]["amplitude"] / out[j]["amplitude"],
                "expected": math.sqrt(out[i]["mu"] / out[j]["mu"]),
            })
    return {"runs": out, "ratios": ratios}


def pattern_wavenumber(x: np.ndarray, v: np.ndarray,
                       window: tuple[float, float],
                       min_contrast: float = 10.0) -> dict:
    """Dominant spatial frequency in the window, sub-bin refined.

    Parabolic interpolation of log |F| around the discrete peak; flags the
    measurement when the peak does not dominate the median spectrum.
    """
    mask = (x >= window[0]) & (x <= window[1])
    seg = np.asarray(v[mask], dtype=float)
    seg = seg - np.mean(seg)
    n = seg.size
    dx = float(x[1] - x[0])
    win = np.hanning(n)
    spec = np.abs(np.fft.rfft(seg * win))
    freqs = 2.0 * np.pi * np.fft.rfftfreq(n, d=dx)
    k = int(np.argmax(spec[1:])) + 1
    contrast = spec[k] / max(float(np.median(spec[1:])), 1e-300)
    flagged = contrast < min_contrast
    if 1 <= k < spec.size - 1 and spec[k - 1] > 0 and spec[k + 1] > 0:
        la, lb, lc = np.log(spec[k - 1]), np.log(spec[k]), np.log(spec[k + 1])
        denom = la - 2.0 * lb + lc
        shift = 0.5 * (la - lc) / denom if denom != 0 else 0.0
        shift = float(np.clip(shift, -0.5, 0.5))
    else:
        shift = 0.0
    xi_peak = float(freqs[k] + shift * (freqs[1] - freqs[0]))
    return {"xi_peak": xi_peak, "contrast": float(contrast), "flagged": flagged}


def predicted_pattern_amplitude(p: SystemParams) -> float:
    """Pattern amplitude implied by the saturated amplitude equation.

    |A| -> 1/sqrt(-b); the carrier contributes twice the second component of
    the critical vector, so |v| ~ 2 sqrt(mu) (d + 2 alpha) / sqrt(-P(gamma)).
    """
    b = gl_cubic_coefficient(p)
    if b >= 0:
        raise ValueError("subcritical parameters: no saturated amplitude")
    return 2.0 * math.sqrt(p.mu) * (p.d + 2.0 * p.alpha) / math.sqrt(-b)
