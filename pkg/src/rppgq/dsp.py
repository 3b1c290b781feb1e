"""Single-window postprocessing chain and spectral heart-rate readout.

The chain is: detrend (centered moving-mean subtraction), moving average,
then a Hann-tapered zero-padded periodogram restricted to the pulse band.
The band restriction is an ideal frequency-domain mask; for an
argmax-based HR readout it is equivalent to a time-domain band-pass but
free of filter-design ambiguity.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BadSize, EmptySpectrum, WindowTooShort

DEFAULT_BAND = (0.7, 3.0)  # Hz, i.e. 42-180 bpm


@dataclass(frozen=True)
class PowerSpectrum:
    """Band-restricted power spectral density on a uniform frequency grid."""

    freqs: np.ndarray
    power: np.ndarray
    df: float

    def __post_init__(self):
        freqs = np.asarray(self.freqs, dtype=np.float64)
        power = np.asarray(self.power, dtype=np.float64)
        object.__setattr__(self, "freqs", freqs)
        object.__setattr__(self, "power", power)
        if len(freqs) != len(power):
            raise ValueError("freqs and power must have equal length")
        if np.any(power < 0):
            raise ValueError("power values must be nonnegative")
        freqs.setflags(write=False)
        power.setflags(write=False)

    @property
    def total_power(self) -> float:
        return float(np.sum(self.power))

    @property
    def band(self) -> tuple[float, float]:
        return float(self.freqs[0]), float(self.freqs[-1])


@dataclass(frozen=True)
class PipelineConfig:
    """Parameters of the postprocessing chain.

    ``fft_pad=None`` resolves per window to the smallest power of two
    >= max(2048, 16 * window length), which keeps the PSD grid finer
    than 0.01 Hz at fs=20.
    """

    fs: float
    detrend_span_s: float = 2.0
    ma_size: int = 3
    band: tuple[float, float] = DEFAULT_BAND
    fft_pad: int | None = None

    def __post_init__(self):
        if self.fs <= 0:
            raise ValueError("fs must be > 0")
        if self.ma_size < 1 or self.ma_size % 2 == 0:
            raise ValueError("ma_size must be odd and >= 1")
        f_lo, f_hi = self.band
        if not (0 < f_lo < f_hi < self.fs / 2):
            raise ValueError("band must satisfy 0 < f_lo < f_hi < fs/2")

    def resolve_fft_pad(self, n_window: int) -> int:
        if self.fft_pad is not None:
            if self.fft_pad < n_window:
                raise ValueError("fft_pad must be >= window length")
            return self.fft_pad
        target = max(2048, 16 * n_window)
        return 1 << (target - 1).bit_length()


def _centered_mean(x: np.ndarray, size: int) -> np.ndarray:
    """Centered moving mean with edge shrinkage, O(n) via cumulative sums."""
    n = len(x)
    half = size // 2
    csum = np.concatenate(([0.0], np.cumsum(x)))
    idx = np.arange(n)
    lo = np.maximum(idx - half, 0)
    hi = np.minimum(idx + half + 1, n)
    return (csum[hi] - csum[lo]) / (hi - lo)


def detrend(window, cfg: PipelineConfig) -> np.ndarray:
    """Subtract a centered moving mean spanning ``detrend_span_s`` seconds.

    The span in samples is rounded to the nearest odd integer; at the
    edges the mean shrinks to the available samples, so a constant input
    maps to exactly zero.
    """
    x = np.asarray(window, dtype=np.float64)
    if len(x) < 2:
        raise WindowTooShort(f"detrend needs >= 2 samples, got {len(x)}")
    span = cfg.detrend_span_s * cfg.fs
    size = max(1, 2 * int(round((span - 1) / 2)) + 1)
    return x - _centered_mean(x, size)


def moving_average(window, size: int) -> np.ndarray:
    """Centered moving mean of ``size`` neighbors; edges shrink, length kept."""
    x = np.asarray(window, dtype=np.float64)
    if size < 1 or size % 2 == 0:
        raise BadSize(f"size must be odd and >= 1, got {size}")
    if size > len(x):
        raise BadSize(f"size {size} exceeds window length {len(x)}")
    return _centered_mean(x, size)


def power_spectrum(window, cfg: PipelineConfig) -> PowerSpectrum:
    """Hann-tapered zero-padded periodogram, restricted to the pulse band."""
    x = np.asarray(window, dtype=np.float64)
    if len(x) < 2 * cfg.fs:
        raise WindowTooShort(
            f"power_spectrum needs >= 2 s of samples, got {len(x) / cfg.fs:.2f} s"
        )
    n = len(x)
    n_fft = cfg.resolve_fft_pad(n)
    tapered = x * np.hanning(n)
    spectrum = np.fft.rfft(tapered, n=n_fft)
    power = np.abs(spectrum) ** 2
    df = cfg.fs / n_fft
    freqs = np.arange(len(power)) * df
    f_lo, f_hi = cfg.band
    keep = (freqs >= f_lo) & (freqs <= f_hi)
    return PowerSpectrum(freqs=freqs[keep], power=power[keep], df=df)


def peak_hr(spectrum: PowerSpectrum) -> float:
    """HR in bpm from the maximum-power bin; ties go to the lowest frequency."""
    if spectrum.total_power <= 0:
        raise EmptySpectrum("spectrum has zero total power")
    peak = int(np.argmax(spectrum.power))
    return 60.0 * float(spectrum.freqs[peak])
