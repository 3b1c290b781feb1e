"""Sliding-window orchestration for baseline and quality-based HR estimates.

A trace is cut into T-second windows with stride d. The baseline method
runs the DSP chain on the whole window. The quality method enumerates
T'-second subwindows (stride d'), scores each with Q, and reads HR from
the best-scoring subwindow's spectrum.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dsp import PipelineConfig, detrend, moving_average, peak_hr, power_spectrum
from .errors import EmptySpectrum, MalformedHeader, TraceTooShort, UnusableWindow
from .quality import CalibrationParams, extract_features, quality_score
from .trace import MAX_GAP_FRACTION, SampleTrace

ESTIMATES_HEADER = "window_start_s,method,hr_bpm,q,sub_start_s,sub_len_s"


@dataclass(frozen=True)
class WindowSpec:
    """Window/subwindow geometry in seconds."""

    T: float = 7.0
    d: float = 1.0
    T_prime_set: tuple[float, ...] = (5.0, 6.0, 7.0)
    d_prime: float = 2.0

    def __post_init__(self):
        if self.T <= 0 or self.d <= 0 or self.d_prime <= 0:
            raise ValueError("T, d, d_prime must be > 0")
        for tp in self.T_prime_set:
            if not (0 < tp <= self.T):
                raise ValueError(f"subwindow size {tp} outside (0, T={self.T}]")
        object.__setattr__(self, "T_prime_set", tuple(sorted(self.T_prime_set)))


@dataclass(frozen=True)
class Window:
    """A T-second view of a trace."""

    start: float
    samples: np.ndarray
    fs: float
    gap_fraction: float = 0.0


@dataclass(frozen=True)
class HrEstimate:
    """One per-window estimate. ``hr_bpm`` is None for unusable windows."""

    window_start: float
    method: str  # "baseline" | "quality"
    hr_bpm: float | None
    q: float | None = None
    sub_start: float | None = None
    sub_len: float | None = None

    @property
    def usable(self) -> bool:
        return self.hr_bpm is not None


def enumerate_windows(trace: SampleTrace, spec: WindowSpec):
    """Windows starting at 0, d, 2d, ... while start + T <= duration."""
    if trace.duration < spec.T:
        raise TraceTooShort(
            f"trace of {trace.duration:.2f} s is shorter than T={spec.T} s"
        )
    n_win = int(round(spec.T * trace.fs))
    windows = []
    k = 0
    while True:
        start = k * spec.d
        i0 = int(round(start * trace.fs))
        if i0 + n_win > len(trace.samples):
            break
        gap = float(np.mean(trace.gap_mask[i0 : i0 + n_win]))
        windows.append(
            Window(
                start=start,
                samples=trace.samples[i0 : i0 + n_win],
                fs=trace.fs,
                gap_fraction=gap,
            )
        )
        k += 1
    return windows


def enumerate_subwindows(window: Window, spec: WindowSpec):
    """Subwindows ordered by ascending T', then ascending offset."""
    subs = []
    for t_prime in spec.T_prime_set:
        n_sub = int(round(t_prime * window.fs))
        j = 0
        while True:
            offset = j * spec.d_prime
            i0 = int(round(offset * window.fs))
            if i0 + n_sub > len(window.samples):
                break
            subs.append(
                Window(
                    start=window.start + offset,
                    samples=window.samples[i0 : i0 + n_sub],
                    fs=window.fs,
                )
            )
            j += 1
    return subs


def pipeline_spectrum(samples: np.ndarray, cfg: PipelineConfig):
    filtered = moving_average(detrend(samples, cfg), cfg.ma_size)
    return power_spectrum(filtered, cfg)


def estimate_baseline(window: Window, cfg: PipelineConfig) -> HrEstimate:
    """Detrend, smooth, and read HR from the full-window spectrum."""
    try:
        hr = peak_hr(pipeline_spectrum(window.samples, cfg))
    except EmptySpectrum:
        raise UnusableWindow(
            f"window at {window.start:.1f} s has an empty spectrum"
        ) from None
    return HrEstimate(window_start=window.start, method="baseline", hr_bpm=hr)


def estimate_quality_based(
    window: Window,
    spec: WindowSpec,
    cfg: PipelineConfig,
    cal: CalibrationParams,
) -> HrEstimate:
    """Score every subwindow with Q and read HR from the best one.

    Ties keep the earliest subwindow in enumeration order.
    """
    best = None
    for sub in enumerate_subwindows(window, spec):
        try:
            spectrum = pipeline_spectrum(sub.samples, cfg)
            score = quality_score(extract_features(spectrum), cal)
        except EmptySpectrum:
            continue
        if best is None or score.q > best[0]:
            best = (score.q, sub, spectrum)
    if best is None:
        raise UnusableWindow(
            f"every subwindow of window at {window.start:.1f} s is unusable"
        )
    q, sub, spectrum = best
    return HrEstimate(
        window_start=window.start,
        method="quality",
        hr_bpm=peak_hr(spectrum),
        q=q,
        sub_start=sub.start,
        sub_len=len(sub.samples) / sub.fs,
    )


def estimate_trace(
    trace: SampleTrace,
    spec: WindowSpec,
    cfg: PipelineConfig,
    cal: CalibrationParams | None = None,
    methods: tuple[str, ...] = ("baseline", "quality"),
) -> list[HrEstimate]:
    """Run the selected methods over every window of a trace.

    Windows with more than 20% gap samples are emitted as unusable
    estimates rather than estimated from interpolated data.
    """
    if "quality" in methods and cal is None:
        raise ValueError("quality method requires calibration parameters")
    estimates = []
    for window in enumerate_windows(trace, spec):
        for method in methods:
            if window.gap_fraction > MAX_GAP_FRACTION:
                estimates.append(
                    HrEstimate(window_start=window.start, method=method, hr_bpm=None)
                )
                continue
            try:
                if method == "baseline":
                    estimates.append(estimate_baseline(window, cfg))
                else:
                    estimates.append(estimate_quality_based(window, spec, cfg, cal))
            except UnusableWindow:
                estimates.append(
                    HrEstimate(window_start=window.start, method=method, hr_bpm=None)
                )
    return estimates


def _fmt(value) -> str:
    return "" if value is None else repr(float(value))


def write_estimates_csv(estimates, path) -> None:
    """Write estimates with repr-formatted floats so reads round-trip."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(ESTIMATES_HEADER + "\n")
        for est in estimates:
            fh.write(
                ",".join(
                    [
                        repr(float(est.window_start)),
                        est.method,
                        _fmt(est.hr_bpm),
                        _fmt(est.q),
                        _fmt(est.sub_start),
                        _fmt(est.sub_len),
                    ]
                )
                + "\n"
            )


def read_estimates_csv(path) -> list[HrEstimate]:
    estimates = []
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header != ESTIMATES_HEADER:
            raise MalformedHeader(f"{path}: bad estimates header {header!r}")
        for line in fh:
            line = line.rstrip("\n")
            if not line:
                continue
            start, method, hr, q, sub_start, sub_len = line.split(",")
            estimates.append(
                HrEstimate(
                    window_start=float(start),
                    method=method,
                    hr_bpm=float(hr) if hr else None,
                    q=float(q) if q else None,
                    sub_start=float(sub_start) if sub_start else None,
                    sub_len=float(sub_len) if sub_len else None,
                )
            )
    return estimates
