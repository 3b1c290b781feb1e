"""Command-line front end: extract, estimate, simulate, calibrate, evaluate.

Every subcommand writes a ``<out>.config.json`` sidecar with the fully
resolved run configuration, and all file writes are whole-file atomic
(temp file + rename).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from pathlib import Path

from . import evaluation, simulator
from .dsp import PipelineConfig
from .errors import RppgError
from .estimator import (
    WindowSpec,
    estimate_trace,
    read_estimates_csv,
    write_estimates_csv,
)
from .quality import default_calibration, read_calibration, write_calibration
from .simulator import calibrate as calibrate_features
from .trace import (
    interpolate_gaps,
    read_csv_trace,
    read_frame_stream,
    read_roi_sidecar,
    roi_mean_trace,
    write_csv_trace,
)


def _atomic_write(path, writer) -> None:
    """Write via a temp file in the same directory, then rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".")
    os.close(fd)
    try:
        writer(tmp)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _write_config_echo(out_path, args: argparse.Namespace) -> None:
    echo = {k: v for k, v in vars(args).items() if k != "func"}
    echo = {k: (str(v) if isinstance(v, Path) else v) for k, v in echo.items()}
    sidecar = str(out_path) + ".config.json"
    _atomic_write(
        sidecar,
        lambda tmp: Path(tmp).write_text(
            json.dumps(echo, indent=2, sort_keys=True, default=str) + "\n"
        ),
    )


def _pipeline_config(args) -> PipelineConfig:
    return PipelineConfig(
        fs=args.fs,
        detrend_span_s=args.detrend_span,
        ma_size=args.ma_size,
        band=(args.band_lo, args.band_hi),
    )


def _window_spec(args) -> WindowSpec:
    return WindowSpec(
        T=args.window,
        d=args.stride,
        T_prime_set=tuple(args.subwindows),
        d_prime=args.substride,
    )


def _add_pipeline_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--fs", type=float, default=20.0, help="sampling rate (Hz)")
    parser.add_argument("--window", type=float, default=7.0, help="window size T (s)")
    parser.add_argument("--stride", type=float, default=1.0, help="window stride d (s)")
    parser.add_argument(
        "--subwindows",
        type=float,
        nargs="+",
        default=[5.0, 6.0, 7.0],
        help="subwindow sizes T' (s)",
    )
    parser.add_argument(
        "--substride", type=float, default=2.0, help="subwindow stride d' (s)"
    )
    parser.add_argument("--band-lo", type=float, default=0.7, help="band low edge (Hz)")
    parser.add_argument("--band-hi", type=float, default=3.0, help="band high edge (Hz)")
    parser.add_argument("--ma-size", type=int, default=3, help="moving-average size")
    parser.add_argument(
        "--detrend-span", type=float, default=2.0, help="detrend span (s)"
    )


def cmd_extract(args) -> int:
    frames = read_frame_stream(args.frames)
    rois = read_roi_sidecar(args.rois)
    trace = roi_mean_trace(frames, rois)
    _atomic_write(args.out, lambda tmp: write_csv_trace(trace, tmp))
    _write_config_echo(args.out, args)
    return 0


def cmd_estimate(args) -> int:
    trace = read_csv_trace(args.trace, fs=args.fs)
    trace = interpolate_gaps(trace)
    cfg = _pipeline_config(args)
    spec = _window_spec(args)
    methods = ("baseline", "quality") if args.method == "both" else (args.method,)
    cal = None
    if "quality" in methods:
        cal = (
            read_calibration(args.calibration)
            if args.calibration
            else default_calibration()
        )
    estimates = estimate_trace(trace, spec, cfg, cal=cal, methods=methods)
    _atomic_write(args.out, lambda tmp: write_estimates_csv(estimates, tmp))
    _write_config_echo(args.out, args)
    return 0


def cmd_simulate(args) -> int:
    records = simulator.read_manifest(args.manifest)
    outdir = Path(args.out)
    for record in records:
        cfg = simulator.config_from_dict(record.get("config", {}))
        artifacts = simulator.artifacts_from_list(record.get("artifacts", []))
        clean, _ = simulator.synth_pulse(cfg)
        corrupted = simulator.inject_artifacts(
            clean, artifacts, seed=int(record.get("artifact_seed", 0))
        )
        trace_path = outdir / record["trace_csv"]
        gt_path = outdir / record["gt_csv"]
        gt_cfg = simulator.SimulationConfig(
            fs=cfg.fs,
            duration=cfg.duration,
            hr_trajectory=cfg.hr_trajectory,
            pulse_harmonics=cfg.pulse_harmonics,
            seed=cfg.seed,
        )
        gt_trace, _ = simulator.synth_pulse(gt_cfg)
        _atomic_write(trace_path, lambda tmp, t=corrupted: write_csv_trace(t, tmp))
        _atomic_write(gt_path, lambda tmp, t=gt_trace: write_csv_trace(t, tmp))
    _write_config_echo(outdir / "corpus", args)
    return 0


def cmd_calibrate(args) -> int:
    from .estimator import enumerate_subwindows, enumerate_windows, pipeline_spectrum

    records = simulator.read_manifest(args.manifest)
    cfg = _pipeline_config(args)
    spec = _window_spec(args)
    corpus_dir = Path(args.corpus)
    spectra = []
    for record in records:
        for key in ("trace_csv", "gt_csv"):
            trace = interpolate_gaps(
                read_csv_trace(corpus_dir / record[key], fs=args.fs)
            )
            for window in enumerate_windows(trace, spec)[:: max(1, int(spec.T))]:
                for sub in enumerate_subwindows(window, spec):
                    spectra.append(pipeline_spectrum(sub.samples, cfg))
    cal = calibrate_features(spectra)
    _atomic_write(args.out, lambda tmp: write_calibration(cal, tmp))
    _write_config_echo(args.out, args)
    return 0


def cmd_evaluate(args) -> int:
    records = simulator.read_manifest(args.manifest)
    cfg = _pipeline_config(args)
    spec = _window_spec(args)
    corpus_dir = Path(args.corpus)
    estimates_dir = Path(args.estimates)
    per_video = []
    for record in records:
        video = record.get("id", record["trace_csv"])
        gt_trace = interpolate_gaps(
            read_csv_trace(corpus_dir / record["gt_csv"], fs=args.fs)
        )
        gt = evaluation.groundtruth_hr(gt_trace, spec, cfg)
        stem = Path(record["trace_csv"]).stem
        estimates = read_estimates_csv(estimates_dir / f"{stem}.estimates.csv")
        baseline = [e.hr_bpm for e in estimates if e.method == "baseline"]
        quality = [e.hr_bpm for e in estimates if e.method == "quality"]
        per_video.append(
            (video, evaluation.mae(baseline, gt), evaluation.mae(quality, gt))
        )
    report = evaluation.corpus_report(per_video)
    _atomic_write(
        args.out,
        lambda tmp: Path(tmp).write_text(evaluation.report_to_json(report)),
    )
    text_path = str(args.out) + ".txt"
    _atomic_write(
        text_path,
        lambda tmp: Path(tmp).write_text(evaluation.report_to_text(report)),
    )
    _write_config_echo(args.out, args)
    sys.stdout.write(evaluation.report_to_text(report))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rppgq",
        description="Quality-windowed spectral heart-rate estimation from rPPG traces",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("extract", help="RFS frames + ROI sidecar -> trace CSV")
    p.add_argument("frames", help="RFS container path")
    p.add_argument("rois", help="ROI sidecar CSV path")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("estimate", help="trace CSV -> estimates CSV")
    p.add_argument("trace", help="trace CSV path")
    _add_pipeline_flags(p)
    p.add_argument("--calibration", default=None, help="calibration file path")
    p.add_argument(
        "--method", choices=("baseline", "quality", "both"), default="both"
    )
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("simulate", help="manifest -> synthetic corpus")
    p.add_argument("manifest", help="corpus manifest JSON")
    p.add_argument("--seed", type=int, default=0, help="unused unless records omit seeds")
    p.add_argument("--out", required=True, help="output corpus directory")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("calibrate", help="corpus -> calibration file")
    p.add_argument("manifest", help="corpus manifest JSON")
    p.add_argument("--corpus", required=True, help="corpus directory")
    _add_pipeline_flags(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("evaluate", help="estimates + ground truth -> MAE report")
    p.add_argument("manifest", help="corpus manifest JSON")
    p.add_argument("--corpus", required=True, help="corpus directory")
    p.add_argument("--estimates", required=True, help="directory of estimates CSVs")
    _add_pipeline_flags(p)
    p.add_argument("--out", required=True, help="JSON report path")
    p.set_defaults(func=cmd_evaluate)

    return parser


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except RppgError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return exc.exit_code
    except OSError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
