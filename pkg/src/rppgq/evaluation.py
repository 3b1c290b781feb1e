"""Scoring of estimate streams against ground truth: per-video MAE in
bpm, corpus mean/std, and relative improvement of the quality method.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .dsp import PipelineConfig
from .errors import EmptyCorpus, LengthMismatch, UnusableWindow
from .estimator import Window, WindowSpec, enumerate_windows, estimate_baseline
from .trace import MAX_GAP_FRACTION, SampleTrace


@dataclass(frozen=True)
class EvaluationReport:
    per_video: tuple[tuple[str, float, float], ...]  # (id, mae_baseline, mae_quality)
    mean_baseline: float
    std_baseline: float
    mean_quality: float
    std_quality: float
    rel_improvement_mean: float  # percent
    rel_improvement_std: float  # percent


def groundtruth_hr(ppg: SampleTrace, spec: WindowSpec, cfg: PipelineConfig):
    """Ground-truth HR per window: the baseline spectral estimator applied
    to the reference PPG over the same window grid.

    Returns a list aligned with enumerate_windows; None marks windows the
    estimator cannot use.
    """
    series = []
    for window in enumerate_windows(ppg, spec):
        if window.gap_fraction > MAX_GAP_FRACTION:
            series.append(None)
            continue
        try:
            series.append(estimate_baseline(window, cfg).hr_bpm)
        except UnusableWindow:
            series.append(None)
    return series


def mae(estimates, groundtruth) -> float:
    """Mean absolute error in bpm; None entries are excluded pairwise."""
    if len(estimates) != len(groundtruth):
        raise LengthMismatch(
            f"series lengths differ: {len(estimates)} vs {len(groundtruth)}"
        )
    errors = [
        abs(est - gt)
        for est, gt in zip(estimates, groundtruth)
        if est is not None and gt is not None
    ]
    if not errors:
        raise LengthMismatch("no usable estimate/ground-truth pairs")
    return float(np.mean(errors))


def corpus_report(per_video) -> EvaluationReport:
    """Aggregate per-video (id, mae_baseline, mae_quality) triples.

    Uses population statistics (divide by N) so the aggregates are exactly
    recomputable from the per-video list.
    """
    per_video = tuple((str(v), float(b), float(q)) for v, b, q in per_video)
    if not per_video:
        raise EmptyCorpus("no videos to report on")
    baseline = np.array([b for _, b, _ in per_video])
    quality = np.array([q for _, _, q in per_video])
    mean_b, std_b = float(baseline.mean()), float(baseline.std())
    mean_q, std_q = float(quality.mean()), float(quality.std())
    return EvaluationReport(
        per_video=per_video,
        mean_baseline=mean_b,
        std_baseline=std_b,
        mean_quality=mean_q,
        std_quality=std_q,
        rel_improvement_mean=100.0 * (mean_b - mean_q) / mean_b if mean_b else 0.0,
        rel_improvement_std=100.0 * (std_b - std_q) / std_b if std_b else 0.0,
    )


def report_to_json(report: EvaluationReport) -> str:
    payload = {
        "per_video": [
            {"video": v, "mae_baseline": b, "mae_quality": q}
            for v, b, q in report.per_video
        ],
        "mean_baseline": report.mean_baseline,
        "std_baseline": report.std_baseline,
        "mean_quality": report.mean_quality,
        "std_quality": report.std_quality,
        "rel_improvement_mean": report.rel_improvement_mean,
        "rel_improvement_std": report.rel_improvement_std,
    }
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def report_to_text(report: EvaluationReport) -> str:
    lines = [
        f"{'video':<12} {'MAE baseline':>14} {'MAE quality':>14}",
    ]
    for video, b, q in report.per_video:
        lines.append(f"{video:<12} {b:>14.2f} {q:>14.2f}")
    lines.append("")
    lines.append(
        f"mean MAE: baseline {report.mean_baseline:.2f} bpm, "
        f"quality {report.mean_quality:.2f} bpm "
        f"({report.rel_improvement_mean:.1f}% improvement)"
    )
    lines.append(
        f"std MAE:  baseline {report.std_baseline:.2f} bpm, "
        f"quality {report.std_quality:.2f} bpm "
        f"({report.rel_improvement_std:.1f}% improvement)"
    )
    return "\n".join(lines) + "\n"
