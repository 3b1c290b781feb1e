"""Time-series types and ingestion: frame streams, ROI mean traces, CSV
traces, ground-truth downsampling, and gap repair.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    MalformedHeader,
    NonIntegerRatio,
    NonNumericLine,
    RoiOutOfBounds,
    TooManyGaps,
    TruncatedPayload,
    UnsupportedVersion,
)

RFS_MAGIC = b"RFS1"
MAX_GAP_FRACTION = 0.2


@dataclass(frozen=True)
class SampleTrace:
    """Uniformly sampled scalar time series.

    ``gap_mask`` is True where the value was missing before repair; it is
    preserved through :func:`interpolate_gaps` for diagnostics.
    """

    samples: np.ndarray
    fs: float
    t0: float = 0.0
    gap_mask: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.float64)
        object.__setattr__(self, "samples", samples)
        if self.gap_mask is None:
            mask = np.zeros(len(samples), dtype=bool)
        else:
            mask = np.asarray(self.gap_mask, dtype=bool)
        object.__setattr__(self, "gap_mask", mask)
        if len(samples) != len(mask):
            raise ValueError("samples and gap_mask must have equal length")
        if self.fs <= 0:
            raise ValueError("fs must be > 0")
        samples.setflags(write=False)
        mask.setflags(write=False)

    @property
    def duration(self) -> float:
        return len(self.samples) / self.fs

    @property
    def gap_fraction(self) -> float:
        if len(self.gap_mask) == 0:
            return 0.0
        return float(np.mean(self.gap_mask))


@dataclass(frozen=True)
class RoiBox:
    """Axis-aligned pixel box for one frame."""

    frame_index: int
    x: int
    y: int
    w: int
    h: int

    def __post_init__(self):
        if self.frame_index < 0 or self.w <= 0 or self.h <= 0:
            raise ValueError("invalid RoiBox")


@dataclass(frozen=True)
class FrameStream:
    """Sequence of 8-bit grayscale frames with fixed geometry and rate."""

    width: int
    height: int
    fps: float
    frames: np.ndarray  # shape (count, height, width), dtype uint8

    def __post_init__(self):
        frames = np.asarray(self.frames, dtype=np.uint8)
        if frames.ndim != 3 or frames.shape[1:] != (self.height, self.width):
            raise ValueError("frames must have shape (count, height, width)")
        object.__setattr__(self, "frames", frames)
        if self.fps <= 0:
            raise ValueError("fps must be > 0")
        frames.setflags(write=False)

    @property
    def count(self) -> int:
        return self.frames.shape[0]


_RFS_HEADER = struct.Struct("<4s5I")


def read_frame_stream(path) -> FrameStream:
    """Read an RFS container.

    Layout: magic ``RFS1``, little-endian u32 width, height, fps_numerator,
    fps_denominator, frame_count, then ``frame_count * width * height``
    bytes of row-major 8-bit grayscale.
    """
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) < _RFS_HEADER.size:
        raise MalformedHeader(f"{path}: file shorter than RFS header")
    magic, width, height, fps_num, fps_den, count = _RFS_HEADER.unpack_from(data)
    if magic[:3] != RFS_MAGIC[:3]:
        raise MalformedHeader(f"{path}: bad magic {magic!r}")
    if magic != RFS_MAGIC:
        raise UnsupportedVersion(f"{path}: unsupported RFS version {magic!r}")
    if width == 0 or height == 0 or fps_num == 0 or fps_den == 0:
        raise MalformedHeader(f"{path}: zero dimension or fps field")
    payload = data[_RFS_HEADER.size:]
    expected = count * width * height
    if len(payload) < expected:
        raise TruncatedPayload(
            f"{path}: expected {expected} payload bytes, found {len(payload)}"
        )
    frames = np.frombuffer(payload[:expected], dtype=np.uint8)
    frames = frames.reshape(count, height, width)
    return FrameStream(width=width, height=height, fps=fps_num / fps_den, frames=frames)


def write_frame_stream(stream: FrameStream, path) -> None:
    """Write an RFS container (inverse of :func:`read_frame_stream`)."""
    fps_num, fps_den = _fps_to_ratio(stream.fps)
    header = _RFS_HEADER.pack(
        RFS_MAGIC, stream.width, stream.height, fps_num, fps_den, stream.count
    )
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(stream.frames.tobytes())


def _fps_to_ratio(fps: float, max_den: int = 10000) -> tuple[int, int]:
    from fractions import Fraction

    frac = Fraction(fps).limit_denominator(max_den)
    return frac.numerator, frac.denominator


def roi_mean_trace(frames: FrameStream, rois) -> SampleTrace:
    """Mean ROI intensity per frame; frames without an ROI become gaps."""
    by_frame = {}
    for roi in rois:
        by_frame[roi.frame_index] = roi
    samples = np.zeros(frames.count, dtype=np.float64)
    mask = np.zeros(frames.count, dtype=bool)
    for i in range(frames.count):
        roi = by_frame.get(i)
        if roi is None:
            mask[i] = True
            samples[i] = np.nan
            continue
        if (
            roi.x < 0
            or roi.y < 0
            or roi.x + roi.w > frames.width
            or roi.y + roi.h > frames.height
        ):
            raise RoiOutOfBounds(i)
        patch = frames.frames[i, roi.y : roi.y + roi.h, roi.x : roi.x + roi.w]
        samples[i] = float(np.mean(patch))
    return SampleTrace(samples=samples, fs=frames.fps, gap_mask=mask)


def read_roi_sidecar(path):
    """Read the ROI sidecar CSV (header ``frame,x,y,w,h``)."""
    rois = []
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header != "frame,x,y,w,h":
            raise MalformedHeader(f"{path}: bad ROI sidecar header {header!r}")
        for line_no, line in enumerate(fh, start=2):
            line = line.strip()
            if not line:
                continue
            try:
                frame, x, y, w, h = (int(v) for v in line.split(","))
            except ValueError:
                raise NonNumericLine(line_no) from None
            rois.append(RoiBox(frame_index=frame, x=x, y=y, w=w, h=h))
    return rois


def read_csv_trace(path, fs: float) -> SampleTrace:
    """Read a one-value-per-line trace CSV; blank or ``nan`` lines are gaps."""
    samples = []
    mask = []
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            text = line.strip()
            if text == "" or text.lower() == "nan":
                samples.append(np.nan)
                mask.append(True)
                continue
            try:
                samples.append(float(text))
            except ValueError:
                raise NonNumericLine(line_no) from None
            mask.append(False)
    return SampleTrace(samples=np.array(samples), fs=fs, gap_mask=np.array(mask))


def write_csv_trace(trace: SampleTrace, path) -> None:
    """Write a trace CSV; gap samples are written as ``nan``."""
    with open(path, "w", encoding="utf-8") as fh:
        for value, gap in zip(trace.samples, trace.gap_mask):
            fh.write("nan\n" if gap else f"{float(value)!r}\n")


def downsample_groundtruth(trace: SampleTrace, target_fs: float = 20.0) -> SampleTrace:
    """Downsample by non-overlapping block means.

    The block mean doubles as anti-alias smoothing; ``trace.fs`` must be
    an integer multiple of ``target_fs``.
    """
    ratio = trace.fs / target_fs
    if abs(ratio - round(ratio)) > 1e-9 or round(ratio) < 1:
        raise NonIntegerRatio(
            f"fs {trace.fs} is not an integer multiple of target {target_fs}"
        )
    k = int(round(ratio))
    n_out = len(trace.samples) // k
    blocks = trace.samples[: n_out * k].reshape(n_out, k)
    gap_blocks = trace.gap_mask[: n_out * k].reshape(n_out, k)
    return SampleTrace(
        samples=blocks.mean(axis=1),
        fs=target_fs,
        t0=trace.t0,
        gap_mask=gap_blocks.any(axis=1),
    )


def interpolate_gaps(trace: SampleTrace) -> SampleTrace:
    """Fill gap samples: interior gaps linearly, edge gaps with the
    nearest valid value. Raises TooManyGaps above a 20% gap fraction.
    """
    if trace.gap_fraction > MAX_GAP_FRACTION:
        raise TooManyGaps(
            f"gap fraction {trace.gap_fraction:.2f} exceeds {MAX_GAP_FRACTION}"
        )
    if not trace.gap_mask.any():
        return trace
    valid = ~trace.gap_mask
    if not valid.any():
        raise TooManyGaps("trace has no valid samples")
    idx = np.arange(len(trace.samples))
    filled = np.interp(idx, idx[valid], trace.samples[valid])
    return SampleTrace(samples=filled, fs=trace.fs, t0=trace.t0, gap_mask=trace.gap_mask)
