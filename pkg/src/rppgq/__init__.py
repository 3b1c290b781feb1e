"""rppgq: quality-windowed spectral heart-rate estimation from rPPG traces."""

from .dsp import PipelineConfig, PowerSpectrum, detrend, moving_average, peak_hr, power_spectrum
from .estimator import (
    HrEstimate,
    WindowSpec,
    enumerate_subwindows,
    enumerate_windows,
    estimate_baseline,
    estimate_quality_based,
    estimate_trace,
)
from .evaluation import EvaluationReport, corpus_report, groundtruth_hr, mae
from .quality import (
    CalibrationParams,
    QualityFeatures,
    QualityScore,
    default_calibration,
    quality_score,
    tanh_normalize,
)
from .simulator import ArtifactSpec, SimulationConfig, calibrate, inject_artifacts, synth_pulse
from .trace import (
    FrameStream,
    RoiBox,
    SampleTrace,
    downsample_groundtruth,
    interpolate_gaps,
    read_csv_trace,
    read_frame_stream,
    roi_mean_trace,
)

__version__ = "0.1.0"
