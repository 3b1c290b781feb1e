"""Signal-quality features on a band-restricted PSD and the scalar score Q.

Three features are computed per subwindow PSD: SNR around the peak and
its first two harmonics, the 99%-power bandwidth around the peak, and the
highest-to-second-highest peak power ratio. Each is tanh-normalized to
(0, 1) against calibration statistics and Q is their arithmetic mean.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dsp import PowerSpectrum
from .errors import EmptySpectrum, MalformedHeader, NonNumericLine

HARMONIC_HALFWIDTH_HZ = 0.1
MIN_PEAK_SEPARATION_HZ = 0.2
RP_CAP = 1e6
# slope 0.5 spreads roughly +-2 sigma over most of (0,1); shallower slopes
# compress the clean/corrupted Q gap below a usable contrast
TANH_SLOPE = 0.5
SNR_EPS = 1e-12

FEATURE_NAMES = ("snr", "bw", "rp")


@dataclass(frozen=True)
class QualityFeatures:
    """Raw feature triple. ``rp`` is capped at RP_CAP when no second peak
    exists; downstream normalization works on log(rp)."""

    snr: float
    bw: float
    rp: float


@dataclass(frozen=True)
class FeatureCal:
    """Normalization statistics for one feature."""

    mu: float
    sigma: float
    orientation: str  # "higher-better" | "lower-better"

    def __post_init__(self):
        if self.sigma <= 0:
            raise ValueError("sigma must be > 0")
        if self.orientation not in ("higher-better", "lower-better"):
            raise ValueError(f"bad orientation {self.orientation!r}")


@dataclass(frozen=True)
class CalibrationParams:
    """Per-feature normalization statistics.

    The RP statistics are over log(rp). Orientations are fixed: SNR and
    RP higher-better, BW lower-better.
    """

    snr: FeatureCal
    bw: FeatureCal
    rp: FeatureCal


@dataclass(frozen=True)
class QualityScore:
    q: float
    normalized: tuple[float, float, float]  # (snr, bw, rp) after tanh


def _require_power(spectrum: PowerSpectrum) -> None:
    if spectrum.total_power <= 0:
        raise EmptySpectrum("spectrum has zero total power")


def snr_feature(spectrum: PowerSpectrum) -> float:
    """Power within +-0.1 Hz of the peak and its 2nd/3rd harmonics over the
    remaining in-band power. Harmonic bands outside the analysis band
    contribute nothing.
    """
    _require_power(spectrum)
    f_peak = spectrum.freqs[int(np.argmax(spectrum.power))]
    in_signal = np.zeros(len(spectrum.freqs), dtype=bool)
    for k in (1, 2, 3):
        in_signal |= np.abs(spectrum.freqs - k * f_peak) <= HARMONIC_HALFWIDTH_HZ
    signal = float(np.sum(spectrum.power[in_signal]))
    total = spectrum.total_power
    return signal / max(total - signal, SNR_EPS)


def bw99_feature(spectrum: PowerSpectrum, threshold: float = 0.99) -> float:
    """Width (Hz) of the bin interval around the peak holding ``threshold``
    of total power, grown symmetrically one bin per side per step."""
    _require_power(spectrum)
    power = spectrum.power
    n = len(power)
    target = threshold * spectrum.total_power
    lo = hi = int(np.argmax(power))
    acc = float(power[lo])
    while acc < target and (lo > 0 or hi < n - 1):
        if lo > 0:
            lo -= 1
            acc += float(power[lo])
        if acc >= target:
            break
        if hi < n - 1:
            hi += 1
            acc += float(power[hi])
    return (hi - lo + 1) * spectrum.df


def ratio_peaks_feature(spectrum: PowerSpectrum) -> float:
    """Power ratio of the highest to the second-highest strict local
    maximum at least 0.2 Hz away; RP_CAP when no eligible second peak."""
    _require_power(spectrum)
    power = spectrum.power
    freqs = spectrum.freqs
    n = len(power)
    if n == 1:
        return RP_CAP
    is_peak = np.zeros(n, dtype=bool)
    is_peak[0] = power[0] > power[1]
    is_peak[-1] = power[-1] > power[-2]
    if n > 2:
        interior = (power[1:-1] > power[:-2]) & (power[1:-1] > power[2:])
        is_peak[1:-1] = interior
    peak_idx = np.flatnonzero(is_peak)
    if len(peak_idx) == 0:
        # monotone or flat spectrum; treat the global max as the only peak
        return RP_CAP
    first = peak_idx[np.argmax(power[peak_idx])]
    eligible = peak_idx[np.abs(freqs[peak_idx] - freqs[first]) >= MIN_PEAK_SEPARATION_HZ]
    if len(eligible) == 0:
        return RP_CAP
    second = eligible[np.argmax(power[eligible])]
    if power[second] <= 0:
        return RP_CAP
    return float(power[first] / power[second])


def extract_features(spectrum: PowerSpectrum) -> QualityFeatures:
    return QualityFeatures(
        snr=snr_feature(spectrum),
        bw=bw99_feature(spectrum),
        rp=ratio_peaks_feature(spectrum),
    )


def tanh_normalize(x: float, mu: float, sigma: float, orientation: str) -> float:
    """Map a raw feature value to (0, 1), 0.5 at the reference mean,
    increasing in the quality direction."""
    if sigma <= 0:
        raise ValueError("sigma must be > 0")
    z = (x - mu) / sigma
    if orientation == "lower-better":
        z = -z
    elif orientation != "higher-better":
        raise ValueError(f"bad orientation {orientation!r}")
    return 0.5 * (math.tanh(TANH_SLOPE * z) + 1.0)


def quality_score(features: QualityFeatures, cal: CalibrationParams) -> QualityScore:
    """Arithmetic mean of the three tanh-normalized features.

    RP is log-transformed before normalization so the no-second-peak cap
    does not saturate the mean.
    """
    n_snr = tanh_normalize(features.snr, cal.snr.mu, cal.snr.sigma, cal.snr.orientation)
    n_bw = tanh_normalize(features.bw, cal.bw.mu, cal.bw.sigma, cal.bw.orientation)
    n_rp = tanh_normalize(
        math.log(features.rp), cal.rp.mu, cal.rp.sigma, cal.rp.orientation
    )
    return QualityScore(q=(n_snr + n_bw + n_rp) / 3.0, normalized=(n_snr, n_bw, n_rp))


def write_calibration(cal: CalibrationParams, path) -> None:
    """Write the three-row calibration file ``feature,mu,sigma,orientation``."""
    with open(path, "w", encoding="utf-8") as fh:
        for name in FEATURE_NAMES:
            fc: FeatureCal = getattr(cal, name)
            fh.write(f"{name},{fc.mu!r},{fc.sigma!r},{fc.orientation}\n")


def read_calibration(path) -> CalibrationParams:
    rows = {}
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != 4:
                raise MalformedHeader(f"{path}:{line_no}: expected 4 fields")
            name, mu, sigma, orientation = parts
            try:
                rows[name] = FeatureCal(
                    mu=float(mu), sigma=float(sigma), orientation=orientation
                )
            except ValueError:
                raise NonNumericLine(line_no) from None
    missing = set(FEATURE_NAMES) - set(rows)
    if missing:
        raise MalformedHeader(f"{path}: missing calibration rows {sorted(missing)}")
    return CalibrationParams(snr=rows["snr"], bw=rows["bw"], rp=rows["rp"])


def default_calibration() -> CalibrationParams:
    """Calibration shipped with the package, produced from the seeded
    reference corpus (see simulator.build_reference_spectra)."""
    from importlib import resources

    ref = resources.files("rppgq").joinpath("data/default_calibration.csv")
    with resources.as_file(ref) as path:
        return read_calibration(path)
