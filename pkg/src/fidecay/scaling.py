"""Decay-rate extraction, power-law fits, and recurrence-peak geometry."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import FitError, PeakError, ValidationError
from .fidelity import FidelityCurve

FIT_FLOOR = 0.05  # below this, ln F amplifies propagation noise
PEAK_THRESHOLD = 0.99  # recurrences in the integrable limit revive to 1


@dataclass(frozen=True)
class ScalingReport:
    """Fitted decay rates across an N sweep and their log-log exponent."""

    n_values: list[int]
    sigma_fit: list[float]
    exponent: float
    exponent_stderr: float
    r_squared: float

    def __post_init__(self):
        if not all(s > 0 for s in self.sigma_fit):
            raise ValidationError("accepted fits require sigma_fit > 0")
        if not 0.0 <= self.r_squared <= 1.0:
            raise ValidationError("r_squared must lie in [0, 1]")


@dataclass(frozen=True)
class Peak:
    time: float
    height: float
    width: float  # nan when half-maximum crossings are not resolvable


def fit_gaussian(curve: FidelityCurve) -> tuple[float, float]:
    """Least-squares fit of -ln F = sigma^2 t^2 over points with F > 0.05.

    Returns (sigma_fit, rmse) with the rmse measured in -ln F space.
    """
    mask = curve.values > FIT_FLOOR
    if int(mask.sum()) < 10:
        raise FitError(f"need >= 10 points with F > {FIT_FLOOR}, have {int(mask.sum())}")
    t = curve.times[mask]
    y = -np.log(curve.values[mask])
    x = t * t
    denom = float(np.sum(x * x))
    if denom == 0.0:
        raise FitError("time grid carries no usable spread")
    slope = float(np.sum(x * y)) / denom
    if slope <= 0.0 or float(np.max(y)) < 1e-12:
        raise FitError("no decay to fit")
    rmse = float(np.sqrt(np.mean((y - slope * x) ** 2)))
    return math.sqrt(slope), rmse


def loglog_slope(
    n_values: Sequence[float], sigma_values: Sequence[float]
) -> tuple[float, float, float]:
    """OLS slope of ln sigma against ln N: (exponent, stderr, r_squared)."""
    n_arr = np.asarray(n_values, dtype=np.float64)
    s_arr = np.asarray(sigma_values, dtype=np.float64)
    if n_arr.size != s_arr.size or n_arr.size < 2:
        raise ValidationError("need matching sequences with at least 2 points")
    if np.any(n_arr <= 0) or np.any(s_arr <= 0):
        raise ValidationError("log-log fit needs positive inputs")
    x = np.log(n_arr)
    y = np.log(s_arr)
    xm, ym = x.mean(), y.mean()
    sxx = float(np.sum((x - xm) ** 2))
    if sxx == 0.0:
        raise ValidationError("all N identical; slope undefined")
    slope = float(np.sum((x - xm) * (y - ym))) / sxx
    resid = y - (ym + slope * (x - xm))
    sse = float(np.sum(resid**2))
    sst = float(np.sum((y - ym) ** 2))
    r_squared = 1.0 if sst == 0.0 else max(0.0, 1.0 - sse / sst)
    stderr = math.sqrt(sse / (x.size - 2) / sxx) if x.size > 2 else 0.0
    return slope, stderr, r_squared


def _half_crossing(times, values, i_from, i_to, level):
    """Linear interpolation of the first crossing below `level` between indices."""
    step = 1 if i_to >= i_from else -1
    prev = i_from
    for k in range(i_from + step, i_to + step, step):
        if values[k] < level:
            t0, t1 = times[prev], times[k]
            v0, v1 = values[prev], values[k]
            return float(t0 + (level - v0) * (t1 - t0) / (v1 - v0))
        prev = k
    return None


def _find_peaks(curve: FidelityCurve) -> list[int]:
    v = curve.values
    peaks = []
    for i in range(v.size):
        left = v[i - 1] if i > 0 else -np.inf
        right = v[i + 1] if i < v.size - 1 else -np.inf
        if v[i] >= PEAK_THRESHOLD and v[i] >= left and v[i] >= right:
            # collapse flat tops to their first sample
            if peaks and i - peaks[-1] == 1 and v[i] == v[peaks[-1]]:
                continue
            peaks.append(i)
    return peaks


def _peak_width(curve: FidelityCurve, i_peak: int) -> float:
    times, values = curve.times, curve.values
    level = values[i_peak] / 2.0
    right = _half_crossing(times, values, i_peak, values.size - 1, level)
    left = _half_crossing(times, values, i_peak, 0, level)
    if right is not None and left is not None:
        return right - left
    if right is not None and i_peak == 0:
        # boundary peak of an even function: mirror the right half-width
        return 2.0 * (right - times[0])
    if left is not None and i_peak == values.size - 1:
        return 2.0 * (times[-1] - left)
    return math.nan


def fwhm(curve: FidelityCurve) -> float:
    """Full width at half maximum of the first qualifying peak.

    The peak must reach PEAK_THRESHOLD and the curve must fall below half
    maximum on at least one side (both, unless the peak sits on the grid
    boundary, where mirror symmetry of the decay is used).
    """
    peaks = _find_peaks(curve)
    if not peaks:
        raise PeakError(f"no peak reaching {PEAK_THRESHOLD}")
    for i_peak in peaks:
        width = _peak_width(curve, i_peak)
        if not math.isnan(width):
            return width
    raise PeakError("no peak is surrounded by values below half maximum")


def recurrence_peaks(curve: FidelityCurve, omega: float) -> list[Peak]:
    """All qualifying peaks with their heights and half-maximum widths.

    `omega` fixes the expected revival period 2 pi / omega; it is recorded
    for callers comparing peak times against k * 2 pi / omega but does not
    influence detection.
    """
    if omega <= 0:
        raise ValidationError("omega must be positive")
    out = []
    for i_peak in _find_peaks(curve):
        out.append(
            Peak(
                time=float(curve.times[i_peak]),
                height=float(curve.values[i_peak]),
                width=_peak_width(curve, i_peak),
            )
        )
    return out
