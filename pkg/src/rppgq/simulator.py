"""Deterministic synthetic pulse generator, artifact injector, and
feature calibration over a reference corpus.

All randomness comes from numpy's PCG64 generator seeded explicitly, so
identical configs reproduce bit-identical traces on any platform.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .dsp import PipelineConfig
from .errors import ArtifactOutOfRange, BadConfig, EmptyReference
from .estimator import WindowSpec, enumerate_subwindows, enumerate_windows
from .quality import CalibrationParams, FeatureCal, extract_features
from .trace import SampleTrace

HR_MIN_BPM = 42.0
HR_MAX_BPM = 180.0
SIGMA_FLOOR = 1e-6

ARTIFACT_KINDS = ("motion-burst", "illumination-step", "vibration", "dropout")


@dataclass(frozen=True)
class SimulationConfig:
    """Generator parameters for one synthetic trace.

    ``hr_trajectory`` is piecewise linear over (time_s, bpm) points;
    a single point means constant HR.
    """

    fs: float = 20.0
    duration: float = 60.0
    hr_trajectory: tuple[tuple[float, float], ...] = ((0.0, 72.0),)
    pulse_harmonics: tuple[float, ...] = (1.0,)
    drift_amplitude: float = 0.0
    drift_period_s: float = 30.0
    noise_sigma: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.fs <= 0 or self.duration <= 0:
            raise BadConfig("fs and duration must be > 0")
        if not self.hr_trajectory:
            raise BadConfig("hr_trajectory must be nonempty")
        for _, bpm in self.hr_trajectory:
            if not (HR_MIN_BPM <= bpm <= HR_MAX_BPM):
                raise BadConfig(f"HR {bpm} bpm outside [{HR_MIN_BPM}, {HR_MAX_BPM}]")
        if any(a < 0 for a in self.pulse_harmonics):
            raise BadConfig("harmonic amplitudes must be >= 0")
        max_hz = max(bpm for _, bpm in self.hr_trajectory) / 60.0
        if self.fs <= 2 * max_hz:
            raise BadConfig("fs must exceed twice the maximum HR frequency")
        if self.noise_sigma < 0 or self.drift_amplitude < 0:
            raise BadConfig("noise_sigma and drift_amplitude must be >= 0")


@dataclass(frozen=True)
class ArtifactSpec:
    kind: str
    start: float
    length: float
    magnitude: float = 1.0

    def __post_init__(self):
        if self.kind not in ARTIFACT_KINDS:
            raise BadConfig(f"unknown artifact kind {self.kind!r}")
        if self.length <= 0 or self.magnitude < 0:
            raise BadConfig("artifact length must be > 0 and magnitude >= 0")


def _hr_at(cfg: SimulationConfig, t: np.ndarray) -> np.ndarray:
    points = sorted(cfg.hr_trajectory)
    times = np.array([p[0] for p in points])
    bpms = np.array([p[1] for p in points])
    return np.interp(t, times, bpms)


def synth_pulse(cfg: SimulationConfig) -> tuple[SampleTrace, np.ndarray]:
    """Generate a pulse trace and its 1 Hz ground-truth HR series.

    The pulse is a harmonic series over the integrated instantaneous
    frequency, plus optional sinusoidal drift and Gaussian noise.
    """
    n = int(round(cfg.duration * cfg.fs))
    t = np.arange(n) / cfg.fs
    hr_hz = _hr_at(cfg, t) / 60.0
    # phase(t) = integral of instantaneous frequency, trapezoidal
    phase = np.concatenate(([0.0], np.cumsum((hr_hz[1:] + hr_hz[:-1]) / 2) / cfg.fs))
    samples = np.zeros(n)
    for k, amp in enumerate(cfg.pulse_harmonics, start=1):
        samples += amp * np.sin(2 * np.pi * k * phase)
    if cfg.drift_amplitude > 0:
        samples += cfg.drift_amplitude * np.sin(2 * np.pi * t / cfg.drift_period_s)
    if cfg.noise_sigma > 0:
        rng = np.random.default_rng(cfg.seed)
        samples += rng.normal(0.0, cfg.noise_sigma, size=n)
    gt_hr = _hr_at(cfg, np.arange(int(cfg.duration)).astype(np.float64))
    return SampleTrace(samples=samples, fs=cfg.fs), gt_hr


def inject_artifacts(trace: SampleTrace, artifacts, seed: int = 0) -> SampleTrace:
    """Apply artifacts to a trace; an empty list is the identity."""
    if not artifacts:
        return trace
    samples = trace.samples.copy()
    mask = trace.gap_mask.copy()
    n = len(samples)
    for i, art in enumerate(artifacts):
        i0 = int(round(art.start * trace.fs))
        i1 = int(round((art.start + art.length) * trace.fs))
        if i0 < 0 or i1 > n or i0 >= i1:
            raise ArtifactOutOfRange(
                f"artifact [{art.start}, {art.start + art.length}] s outside trace"
            )
        rng = np.random.default_rng((seed, i))
        seg_t = np.arange(i1 - i0) / trace.fs
        if art.kind == "motion-burst":
            # low-frequency (< 0.5 Hz dominant) transient under a Hann envelope
            burst = np.zeros(i1 - i0)
            for f in rng.uniform(0.1, 0.45, size=3):
                burst += np.sin(2 * np.pi * f * seg_t + rng.uniform(0, 2 * np.pi))
            samples[i0:i1] += art.magnitude * np.hanning(i1 - i0) * burst
        elif art.kind == "illumination-step":
            samples[i0:i1] += art.magnitude
        elif art.kind == "vibration":
            f = rng.uniform(4.0, 8.0)
            phase = rng.uniform(0, 2 * np.pi)
            samples[i0:i1] += art.magnitude * np.sin(2 * np.pi * f * seg_t + phase)
        elif art.kind == "dropout":
            mask[i0:i1] = True
    return SampleTrace(samples=samples, fs=trace.fs, t0=trace.t0, gap_mask=mask)


def calibrate(reference_spectra) -> CalibrationParams:
    """Per-feature mean/std over a reference set of subwindow PSDs.

    RP statistics are taken over log(rp); standard deviations are
    floored at 1e-6 so degenerate references stay usable.
    """
    snrs, bws, rps = [], [], []
    for spectrum in reference_spectra:
        feats = extract_features(spectrum)
        snrs.append(feats.snr)
        bws.append(feats.bw)
        rps.append(np.log(feats.rp))
    if not snrs:
        raise EmptyReference("reference set is empty")

    def cal_of(values, orientation):
        arr = np.asarray(values)
        return FeatureCal(
            mu=float(arr.mean()),
            sigma=max(float(arr.std()), SIGMA_FLOOR),
            orientation=orientation,
        )

    return CalibrationParams(
        snr=cal_of(snrs, "higher-better"),
        bw=cal_of(bws, "lower-better"),
        rp=cal_of(rps, "higher-better"),
    )


# --- corpus generation from a manifest ---


def default_corpus_configs(n_traces: int = 20, base_seed: int = 1234):
    """Seeded per-trace configs for the shipped reference corpus: clean
    pulse plus 3 motion bursts and one illumination step each."""
    rng = np.random.default_rng(base_seed)
    entries = []
    for i in range(n_traces):
        hr = float(rng.uniform(50.0, 160.0))
        cfg = SimulationConfig(
            fs=20.0,
            duration=60.0,
            hr_trajectory=((0.0, hr),),
            pulse_harmonics=(1.0, 0.4, 0.2),
            drift_amplitude=0.5,
            drift_period_s=25.0,
            noise_sigma=0.05,
            seed=int(rng.integers(0, 2**62)),
        )
        burst_starts = sorted(rng.uniform(2.0, 56.0, size=3))
        artifacts = [
            ArtifactSpec(kind="motion-burst", start=float(s), length=2.0, magnitude=10.0)
            for s in burst_starts
        ]
        artifacts.append(
            ArtifactSpec(
                kind="illumination-step",
                start=float(rng.uniform(5.0, 50.0)),
                length=5.0,
                magnitude=3.0,
            )
        )
        entries.append((f"trace{i:03d}", cfg, artifacts, int(rng.integers(0, 2**62))))
    return entries


def build_reference_spectra(pipeline_cfg: PipelineConfig | None = None,
                            window_spec: WindowSpec | None = None,
                            n_traces: int = 8, base_seed: int = 99):
    """Subwindow PSDs from a small clean+corrupted corpus, used to compute
    the shipped default calibration."""
    from .estimator import pipeline_spectrum

    pipeline_cfg = pipeline_cfg or PipelineConfig(fs=20.0)
    window_spec = window_spec or WindowSpec()
    spectra = []
    for trace_id, cfg, artifacts, art_seed in default_corpus_configs(
        n_traces=n_traces, base_seed=base_seed
    ):
        clean, _ = synth_pulse(cfg)
        corrupted = inject_artifacts(clean, artifacts, seed=art_seed)
        for trace in (clean, corrupted):
            # one window every 7 s keeps the reference set small and diverse
            for window in enumerate_windows(trace, window_spec)[:: int(window_spec.T)]:
                for sub in enumerate_subwindows(window, window_spec):
                    spectra.append(pipeline_spectrum(sub.samples, pipeline_cfg))
    return spectra


# --- manifest I/O ---


def config_from_dict(d: dict) -> SimulationConfig:
    return SimulationConfig(
        fs=float(d.get("fs", 20.0)),
        duration=float(d.get("duration", 60.0)),
        hr_trajectory=tuple(
            (float(t), float(bpm)) for t, bpm in d.get("hr_trajectory", [[0.0, 72.0]])
        ),
        pulse_harmonics=tuple(float(a) for a in d.get("pulse_harmonics", [1.0])),
        drift_amplitude=float(d.get("drift_amplitude", 0.0)),
        drift_period_s=float(d.get("drift_period_s", 30.0)),
        noise_sigma=float(d.get("noise_sigma", 0.0)),
        seed=int(d.get("seed", 0)),
    )


def artifacts_from_list(items) -> list[ArtifactSpec]:
    return [
        ArtifactSpec(
            kind=a["kind"],
            start=float(a["start"]),
            length=float(a["length"]),
            magnitude=float(a.get("magnitude", 1.0)),
        )
        for a in items
    ]


def read_manifest(path) -> list[dict]:
    """Read a corpus manifest: a JSON list of per-trace records."""
    with open(path, "r", encoding="utf-8") as fh:
        records = json.load(fh)
    if not isinstance(records, list):
        raise BadConfig(f"{path}: manifest must be a JSON list")
    return records


def write_manifest(records, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(records, fh, indent=2, sort_keys=True)
        fh.write("\n")
