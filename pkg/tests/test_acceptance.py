"""Full-length experiments checked against published behaviour. Run with --runslow."""

import numpy as np
import pytest

from app.schemas import (
    CentroidRunConfig,
    MaskSource,
    MeanRunConfig,
    SeriesSpec,
    TrackingRunConfig,
)
from app.services.batch_runner import run_experiment
from app.services.metrics import aggregate, dominant_lag
from app.services.tracking_experiment import run_tracking

pytestmark = pytest.mark.slow


def _batch(kind, cfg, n, covariate=None):
    return aggregate([run_experiment(kind, cfg, seed) for seed in range(n)], covariate)


def _tracking_errors(stimulus, sigma, n=3):
    cfg = TrackingRunConfig(stimulus=stimulus, noise_sigma=sigma)
    return [run_experiment("track", cfg, seed) for seed in range(n)]


# ============ Centroid ============


def test_circle_centroid_is_recovered():
    cfg = CentroidRunConfig(mask=MaskSource(builtin="circle", builtin_size=80))
    assert _batch("centroid", cfg, 10).mae < 3.0


def test_lizard_immediate_shrinkage_is_accurate():
    cfg = CentroidRunConfig(mask=MaskSource(builtin="lizard"))
    summary = _batch("centroid", cfg, 10)
    assert 1.0 <= summary.mae <= 4.0


def test_lizard_delayed_shrinkage_is_less_accurate():
    immediate = _batch("centroid", CentroidRunConfig(mask=MaskSource(builtin="lizard")), 10)
    delayed_cfg = CentroidRunConfig(mask=MaskSource(builtin="lizard"), shrink_schedule="delayed")
    delayed = _batch("centroid", delayed_cfg, 10)
    assert 1.5 <= delayed.mae <= 6.0
    assert delayed.mae >= immediate.mae


def test_convex_shape_beats_strongly_concave_shape():
    convex = _batch("centroid", CentroidRunConfig(mask=MaskSource(builtin="circle")), 10)
    concave = _batch("centroid", CentroidRunConfig(mask=MaskSource(builtin="crescent")), 10)
    assert convex.mae <= concave.mae


# ============ Mean ============


def test_uniform_series_errors_and_sorting_order():
    unsorted = _batch("mean", MeanRunConfig(series=SeriesSpec(sorted=False)), 50, "series_std")
    ordered = _batch("mean", MeanRunConfig(series=SeriesSpec(sorted=True)), 50, "series_std")
    assert 3.0 <= unsorted.mae <= 9.0
    assert 1.0 <= ordered.mae <= 4.0
    assert ordered.mae < unsorted.mae


def test_skewed_sorted_lands_above_the_mean():
    cfg = MeanRunConfig(series=SeriesSpec(distribution="skewed", sorted=True))
    summary = _batch("mean", cfg, 25, "series_std")
    assert summary.fraction_above >= 0.9
    assert 6.0 <= summary.mae <= 15.0


def test_series_spread_does_not_predict_error():
    summary = _batch("mean", MeanRunConfig(), 50, "series_std")
    assert summary.rho is not None and abs(summary.rho) < 0.3


# ============ Tracking ============


def test_tracking_order_without_noise():
    errors = {
        stimulus: np.mean([m.final_error for m in _tracking_errors(stimulus, 0.0)])
        for stimulus in ("positive", "negative", "alternating")
    }
    assert errors["negative"] < errors["alternating"] <= errors["positive"]


def test_only_repellent_keeps_track_under_noise():
    for metrics in _tracking_errors("negative", 20.0, n=1):
        assert metrics.extra["max_error"] < metrics.extra["arena_half_diagonal"]
    for stimulus in ("positive", "alternating"):
        for metrics in _tracking_errors(stimulus, 20.0, n=1):
            assert metrics.extra["max_error"] > metrics.extra["arena_half_diagonal"]


def test_tracking_error_oscillates_with_target_updates():
    result = run_tracking(TrackingRunConfig(stimulus="negative", seed=0))
    # target jumps show up as spikes in the step-to-step change of the error
    lag = dominant_lag(np.diff(result.scored_errors), 15, 35)
    assert abs(lag - 25) <= 3
