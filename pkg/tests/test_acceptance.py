"""Acceptance suite: one test per criterion, each printing a pass/fail line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the lines.
"""

import math
import time
from contextlib import contextmanager

import numpy as np
import pytest

from rppgq.dsp import PipelineConfig, power_spectrum
from rppgq.estimator import (
    WindowSpec,
    enumerate_subwindows,
    enumerate_windows,
    estimate_trace,
    pipeline_spectrum,
    read_estimates_csv,
    write_estimates_csv,
)
from rppgq.evaluation import corpus_report, groundtruth_hr, mae
from rppgq.quality import default_calibration, extract_features, quality_score
from rppgq.simulator import (
    SimulationConfig,
    default_corpus_configs,
    inject_artifacts,
    synth_pulse,
)
from rppgq.trace import (
    FrameStream,
    SampleTrace,
    downsample_groundtruth,
    read_frame_stream,
    write_frame_stream,
)

CFG = PipelineConfig(fs=20.0)
SPEC = WindowSpec()


@contextmanager
def criterion(number, description):
    try:
        yield
    except BaseException:
        print(f"ACCEPTANCE {number}: FAIL - {description}")
        raise
    print(f"ACCEPTANCE {number}: PASS - {description}")


def naive_band_dft(window, cfg):
    """O(N^2) oracle: per in-band bin, direct sum over the N real samples
    of the Hann-tapered window (zero padding contributes nothing)."""
    n = len(window)
    taper = np.array(
        [0.5 - 0.5 * math.cos(2 * math.pi * i / (n - 1)) for i in range(n)]
    )
    x = np.asarray(window) * taper
    n_fft = cfg.resolve_fft_pad(n)
    df = cfg.fs / n_fft
    samples = np.arange(n)
    freqs, power = [], []
    for k in range(n_fft // 2 + 1):
        f = k * df
        if not (cfg.band[0] <= f <= cfg.band[1]):
            continue
        angles = -2 * math.pi * k * samples / n_fft
        re = float(np.sum(x * np.cos(angles)))
        im = float(np.sum(x * np.sin(angles)))
        freqs.append(f)
        power.append(re * re + im * im)
    return np.array(freqs), np.array(power)


def test_criterion_1_oracle_equivalence():
    with criterion(1, "power_spectrum matches O(N^2) DFT oracle within 1e-9"):
        start = time.monotonic()
        cfg = PipelineConfig(fs=8.0)  # 2 s minimum window = 16 samples
        for n in (16, 64, 141, 256):
            rng = np.random.default_rng(n)
            x = rng.normal(size=n)
            spec = power_spectrum(x, cfg)
            freqs, power = naive_band_dft(x, cfg)
            assert np.allclose(spec.freqs, freqs, atol=1e-12)
            assert np.all(np.abs(spec.power - power) <= 1e-9 * np.max(power))
        assert time.monotonic() - start < 1.0


def test_criterion_2_clean_signal_accuracy():
    with criterion(2, "baseline |error| <= 1.5 bpm on >= 95% of clean windows"):
        rng = np.random.default_rng(42)
        total = within = 0
        for i in range(20):
            hr = float(rng.uniform(45.0, 175.0))
            sim = SimulationConfig(
                hr_trajectory=((0.0, hr),),
                pulse_harmonics=(1.0, 0.4, 0.2),
                noise_sigma=0.05,
                seed=i,
            )
            trace, _ = synth_pulse(sim)
            for est in estimate_trace(trace, SPEC, CFG, methods=("baseline",)):
                if est.hr_bpm is None:
                    continue
                total += 1
                within += abs(est.hr_bpm - hr) <= 1.5
        assert total == 20 * 54
        assert within / total >= 0.95


@pytest.fixture(scope="module")
def burst_corpus():
    """20 one-minute traces, each with 3 seeded 2 s magnitude-10 motion
    bursts and one illumination step; estimates for both methods."""
    cal = default_calibration()
    start = time.monotonic()
    videos = []
    for tid, sim, artifacts, art_seed in default_corpus_configs(
        n_traces=20, base_seed=777
    ):
        clean, _ = synth_pulse(sim)
        corrupted = inject_artifacts(clean, artifacts, seed=art_seed)
        gt_sim = SimulationConfig(
            fs=sim.fs,
            duration=sim.duration,
            hr_trajectory=sim.hr_trajectory,
            pulse_harmonics=sim.pulse_harmonics,
            seed=sim.seed,
        )
        gt_trace, _ = synth_pulse(gt_sim)
        estimates = estimate_trace(corrupted, SPEC, CFG, cal=cal)
        videos.append(
            {
                "id": tid,
                "trace": corrupted,
                "gt": groundtruth_hr(gt_trace, SPEC, CFG),
                "estimates": estimates,
                "bursts": [
                    (a.start, a.start + a.length)
                    for a in artifacts
                    if a.kind == "motion-burst"
                ],
            }
        )
    return {"videos": videos, "cal": cal, "elapsed": time.monotonic() - start}


def test_criterion_3_quality_selection_benefit(burst_corpus):
    with criterion(3, "quality MAE >= 15% below baseline, std not higher, < 30 s"):
        per_video = []
        for video in burst_corpus["videos"]:
            baseline = [
                e.hr_bpm for e in video["estimates"] if e.method == "baseline"
            ]
            quality = [e.hr_bpm for e in video["estimates"] if e.method == "quality"]
            per_video.append(
                (video["id"], mae(baseline, video["gt"]), mae(quality, video["gt"]))
            )
        report = corpus_report(per_video)
        assert report.rel_improvement_mean >= 15.0
        assert report.std_quality <= report.std_baseline
        assert burst_corpus["elapsed"] < 30.0


def test_criterion_4_q_separation(burst_corpus):
    with criterion(4, "mean Q(artifact-free) - mean Q(burst-overlap) >= 0.1"):
        cal = burst_corpus["cal"]
        q_clean, q_burst = [], []
        for video in burst_corpus["videos"]:
            for window in enumerate_windows(video["trace"], SPEC):
                for sub in enumerate_subwindows(window, SPEC):
                    s0 = sub.start
                    s1 = sub.start + len(sub.samples) / sub.fs
                    overlap = any(s0 < b1 and s1 > b0 for b0, b1 in video["bursts"])
                    spec = pipeline_spectrum(sub.samples, CFG)
                    q = quality_score(extract_features(spec), cal).q
                    (q_burst if overlap else q_clean).append(q)
        assert np.mean(q_clean) - np.mean(q_burst) >= 0.1


def test_criterion_5_affine_invariance():
    with criterion(5, "x -> 3.7x + 120 leaves HR, subwindow, and Q unchanged"):
        cal = default_calibration()
        rng = np.random.default_rng(2024)
        checked = 0
        while checked < 100:
            hr = float(rng.uniform(45.0, 175.0))
            sim = SimulationConfig(
                duration=9.0,
                hr_trajectory=((0.0, hr),),
                pulse_harmonics=(1.0, 0.4),
                noise_sigma=float(rng.uniform(0.01, 0.3)),
                seed=int(rng.integers(0, 2**62)),
            )
            trace, _ = synth_pulse(sim)
            shifted = SampleTrace(samples=3.7 * trace.samples + 120.0, fs=trace.fs)
            for a, b in zip(
                estimate_trace(trace, SPEC, CFG, cal=cal),
                estimate_trace(shifted, SPEC, CFG, cal=cal),
            ):
                assert abs(a.hr_bpm - b.hr_bpm) <= 1e-9
                assert (a.sub_start, a.sub_len) == (b.sub_start, b.sub_len)
                if a.q is not None:
                    assert abs(a.q - b.q) <= 1e-9
                checked += 1


def test_criterion_6_window_count_arithmetic():
    with criterion(6, "60 s trace: exactly 54 windows, 4 subwindows each"):
        trace, _ = synth_pulse(SimulationConfig(duration=60.0))
        windows = enumerate_windows(trace, SPEC)
        assert len(windows) == 54
        for window in windows:
            assert len(enumerate_subwindows(window, SPEC)) == 4


def test_criterion_7_format_roundtrips(tmp_path):
    with criterion(7, "RFS and estimates CSV round-trip bit-exact; 500->20 Hz"):
        rng = np.random.default_rng(77)
        frames = rng.integers(0, 256, size=(8, 5, 6), dtype=np.uint8)
        stream = FrameStream(width=6, height=5, fps=20.0, frames=frames)
        rfs_a, rfs_b = tmp_path / "a.rfs", tmp_path / "b.rfs"
        write_frame_stream(stream, rfs_a)
        write_frame_stream(read_frame_stream(rfs_a), rfs_b)
        assert rfs_a.read_bytes() == rfs_b.read_bytes()

        cal = default_calibration()
        trace, _ = synth_pulse(SimulationConfig(duration=15.0, noise_sigma=0.05, seed=8))
        estimates = estimate_trace(trace, SPEC, CFG, cal=cal)
        csv_a, csv_b = tmp_path / "a.csv", tmp_path / "b.csv"
        write_estimates_csv(estimates, csv_a)
        write_estimates_csv(read_estimates_csv(csv_a), csv_b)
        assert csv_a.read_bytes() == csv_b.read_bytes()

        const = SampleTrace(samples=np.full(5000, 7.0), fs=500.0)
        down = downsample_groundtruth(const, target_fs=20.0)
        assert len(down.samples) == 200


def test_criterion_8_end_to_end_determinism(tmp_path):
    with criterion(8, "simulate + estimate + evaluate twice -> identical reports"):
        from rppgq.cli import run
        from rppgq.simulator import write_manifest

        manifest = tmp_path / "manifest.json"
        records = []
        for i in range(3):
            records.append(
                {
                    "id": f"v{i}",
                    "config": {
                        "duration": 30.0,
                        "hr_trajectory": [[0.0, 65.0 + 15 * i]],
                        "pulse_harmonics": [1.0, 0.4, 0.2],
                        "noise_sigma": 0.05,
                        "seed": 300 + i,
                    },
                    "artifacts": [
                        {
                            "kind": "motion-burst",
                            "start": 8.0,
                            "length": 2.0,
                            "magnitude": 10.0,
                        }
                    ],
                    "artifact_seed": 400 + i,
                    "trace_csv": f"v{i}.trace.csv",
                    "gt_csv": f"v{i}.gt.csv",
                }
            )
        write_manifest(records, manifest)

        reports = []
        for label in ("one", "two"):
            root = tmp_path / label
            corpus = root / "corpus"
            assert run(["simulate", str(manifest), "--out", str(corpus)]) == 0
            estimates = root / "estimates"
            for i in range(3):
                code = run(
                    [
                        "estimate",
                        str(corpus / f"v{i}.trace.csv"),
                        "--out",
                        str(estimates / f"v{i}.trace.estimates.csv"),
                    ]
                )
                assert code == 0
            report = root / "report.json"
            code = run(
                [
                    "evaluate",
                    str(manifest),
                    "--corpus",
                    str(corpus),
                    "--estimates",
                    str(estimates),
                    "--out",
                    str(report),
                ]
            )
            assert code == 0
            reports.append(
                (report.read_bytes(), (root / "report.json.txt").read_bytes())
            )
        assert reports[0] == reports[1]
