"""Experiment harnesses, batch execution and reporting."""

from app.services.batch_runner import BatchRunner, run_batch, run_experiment, run_sweep
from app.services.centroid_experiment import run_centroid
from app.services.mean_experiment import run_mean
from app.services.metrics import aggregate, autocorrelation, dominant_lag, pearson
from app.services.reporting import FrameRecorder, render_frame, write_csv, write_summary
from app.services.tracking_experiment import add_noise, run_tracking, spiral_target

__all__ = [
    "BatchRunner",
    "FrameRecorder",
    "add_noise",
    "aggregate",
    "autocorrelation",
    "dominant_lag",
    "pearson",
    "render_frame",
    "run_batch",
    "run_centroid",
    "run_experiment",
    "run_mean",
    "run_sweep",
    "run_tracking",
    "spiral_target",
    "write_csv",
    "write_summary",
]
