"""Undersampled ultra-fast sines with exact rational phase accumulation.

sin(2 pi f t) sampled at rate fs only depends on the phase f*k/fs modulo
one turn.  At f ~ 1e43 Hz the floating-point product f*k carries no phase
information at all, so the phase is accumulated as an exact rational
(wide-integer numerator modulo denominator); aliasing f -> f + k*fs is
then exact by construction.  A naive floating pipeline is kept alongside
for comparison.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.stats import chi2 as chi2_dist

from .errors import DegeneratePhaseError, ValidationError

MIN_STEP_DENOMINATOR = 10_000


@dataclass(frozen=True)
class SineSamplingSpec:
    """Exact-rational tone: freq_num/freq_den Hz sampled at sample_rate Hz.

    phase0 is the starting phase in turns, a rational in [0, 1).
    """

    freq_num: int
    freq_den: int = 1
    sample_rate: int = 1_000_000
    count: int = 4096
    phase0: Fraction = Fraction(0)

    def __post_init__(self):
        if self.freq_num < 0 or self.freq_den <= 0:
            raise ValidationError("frequency must be a non-negative rational")
        if self.sample_rate <= 0:
            raise ValidationError("sample_rate must be a positive integer")
        if self.count < 1:
            raise ValidationError("count must be >= 1")
        g = math.gcd(self.freq_num, self.freq_den)
        object.__setattr__(self, "freq_num", self.freq_num // g)
        object.__setattr__(self, "freq_den", self.freq_den // g)
        p0 = Fraction(self.phase0)
        if not 0 <= p0 < 1:
            raise ValidationError("phase0 must lie in [0, 1) turns")
        object.__setattr__(self, "phase0", p0)

    @property
    def phase_step(self) -> Fraction:
        """Phase advance per sample in turns, reduced modulo 1."""
        return Fraction(self.freq_num, self.freq_den * self.sample_rate) % 1


def phase_at(spec: SineSamplingSpec, k: int) -> Fraction:
    """Exact phase (in turns, mod 1) of sample k; O(1), usable as a chunk start."""
    if k < 0:
        raise ValidationError("sample index must be non-negative")
    return (spec.phase0 + k * spec.phase_step) % 1


def sample_sine(spec: SineSamplingSpec, *, start: int = 0) -> np.ndarray:
    """Samples sin(2 pi phase_k), phases accumulated in exact integer arithmetic.

    `start` shifts the window: sample i of the output is global sample
    start + i, bit-identical to generating the full stream.
    """
    step = spec.phase_step
    first = phase_at(spec, start)
    q = math.lcm(first.denominator, step.denominator)
    num0 = first.numerator * (q // first.denominator)
    dnum = step.numerator * (q // step.denominator)
    phases = np.empty(spec.count, dtype=np.float64)
    r = num0 % q
    for i in range(spec.count):
        phases[i] = r / q
        r = (r + dnum) % q
    return np.sin(2.0 * np.pi * phases)


def sample_sine_float(spec: SineSamplingSpec, *, start: int = 0) -> np.ndarray:
    """Naive pipeline sin(2 pi f k / fs) in double precision, for comparison.

    Beyond f ~ 1e16 Hz the argument loses all phase information and the
    output is an artifact of rounding; that is exactly the failure mode
    the exact pipeline avoids.
    """
    k = np.arange(start, start + spec.count, dtype=np.float64)
    f = spec.freq_num / spec.freq_den
    return np.sin(2.0 * np.pi * (float(spec.phase0) + f * k / spec.sample_rate))


@dataclass(frozen=True)
class Periodogram:
    freqs: np.ndarray
    power: np.ndarray
    window: str

    def __post_init__(self):
        if self.freqs.shape != self.power.shape:
            raise ValidationError("freqs and power must have equal length")
        if np.any(self.power < 0):
            raise ValidationError("power must be non-negative")


def periodogram(samples, fs: int, window: str = "none") -> Periodogram:
    """One-sided squared-magnitude spectrum of the (optionally windowed) samples."""
    samples = np.asarray(samples, dtype=np.float64)
    if samples.ndim != 1 or samples.size < 64:
        raise ValidationError("periodogram needs at least 64 samples")
    if fs <= 0:
        raise ValidationError("fs must be positive")
    if window == "hann":
        tapered = samples * np.hanning(samples.size)
    elif window == "none":
        tapered = samples
    else:
        raise ValidationError("window must be 'none' or 'hann'")
    spectrum = np.fft.rfft(tapered)
    power = (np.abs(spectrum) / samples.size) ** 2
    freqs = np.fft.rfftfreq(samples.size, d=1.0 / fs)
    return Periodogram(freqs, power, window)


def arcsine_to_uniform(x) -> np.ndarray:
    """Probability-integral transform u = 1/2 + arcsin(x)/pi.

    sin of an equidistributed phase follows the arcsine law, not the
    uniform one; this CDF map makes uniformity claims testable.
    """
    return 0.5 + np.arcsin(np.asarray(x, dtype=np.float64)) / np.pi


def undersampled_uniform(spec: SineSamplingSpec) -> np.ndarray:
    """Uniform [0, 1) variates from an undersampled sine.

    Rejects phase steps whose reduced denominator is below
    MIN_STEP_DENOMINATOR: such tones are commensurate with the sample
    clock and produce a short cycle, not noise.  In particular a round
    power-of-ten frequency at fs = 1 MHz aliases to a constant.
    """
    step = spec.phase_step
    if step.denominator < MIN_STEP_DENOMINATOR:
        raise DegeneratePhaseError(
            f"phase step {step} has denominator {step.denominator} < "
            f"{MIN_STEP_DENOMINATOR}; the sampled tone is (near-)commensurate "
            "with the sample clock"
        )
    return arcsine_to_uniform(sample_sine(spec))


@dataclass(frozen=True)
class UniformityReport:
    chi2: float
    dof: int
    p_value: float
    bins: int
    counts: list[int]

    def passes(self, significance: float = 0.001) -> bool:
        return self.p_value > significance


def chi_square_uniformity(values, bins: int = 64) -> UniformityReport:
    """Pearson chi-square of equal-width bins on [0, 1] against uniformity."""
    values = np.asarray(values, dtype=np.float64)
    if values.size < 10 * bins:
        raise ValidationError(f"need at least {10 * bins} values for {bins} bins")
    if np.any(values < 0) or np.any(values > 1):
        raise ValidationError("values must lie in [0, 1]")
    counts, _ = np.histogram(values, bins=bins, range=(0.0, 1.0))
    expected = values.size / bins
    stat = float(np.sum((counts - expected) ** 2) / expected)
    dof = bins - 1
    p = float(chi2_dist.sf(stat, dof))
    return UniformityReport(stat, dof, p, bins, counts.tolist())
