"""Batch statistics over run metrics."""

import warnings
from typing import Optional, Sequence

import numpy as np
from scipy import stats

from app.core.errors import InputError, UndefinedCorrelationError
from app.schemas import BatchSummary, RunMetrics


def pearson(xs: Sequence[float], ys: Sequence[float]) -> float:
    """
    Sample Pearson correlation coefficient.

    Args:
        xs: First sample
        ys: Second sample, same length (>= 2)

    Returns:
        rho in [-1, 1]
    """
    x = np.asarray(xs, dtype=np.float64)
    y = np.asarray(ys, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise InputError(f"pearson needs two equal-length 1D samples, got {x.shape} and {y.shape}")
    if x.size < 2:
        raise InputError("pearson needs at least 2 points")
    if np.ptp(x) == 0.0 or np.ptp(y) == 0.0:
        raise UndefinedCorrelationError("Correlation is undefined for constant input")

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", stats.ConstantInputWarning)
        rho = stats.pearsonr(x, y).statistic
    return float(np.clip(rho, -1.0, 1.0))


def aggregate(runs: Sequence[RunMetrics], covariate: Optional[str] = None) -> BatchSummary:
    """
    Summarize final errors over a batch of runs.

    MAE is the mean of absolute final errors and sigma their population
    standard deviation. When every run carries a covariate, rho is the
    Pearson correlation between covariate and final error.

    Args:
        runs: Non-empty list of run metrics
        covariate: Name reported for the covariate column

    Returns:
        Batch summary
    """
    if not runs:
        raise InputError("Cannot aggregate an empty batch")

    errors = np.abs(np.array([r.final_error for r in runs], dtype=np.float64))
    experiments = sorted({r.experiment for r in runs})

    rho = None
    covariates = [r.covariate for r in runs]
    if len(runs) >= 2 and all(c is not None for c in covariates):
        try:
            rho = pearson(covariates, errors)
        except UndefinedCorrelationError:
            rho = None

    fraction_above = None
    signed = [r.extra["signed_error"] for r in runs if "signed_error" in r.extra]
    if len(signed) == len(runs):
        fraction_above = float(np.mean(np.array(signed) > 0.0))

    return BatchSummary(
        experiment="+".join(experiments),
        n_runs=len(runs),
        mae=float(errors.mean()),
        sigma=float(errors.std(ddof=0)),
        rho=rho,
        covariate=covariate if rho is not None else None,
        fraction_above=fraction_above,
        seeds=sorted(r.seed for r in runs),
    )


def autocorrelation(series: Sequence[float], max_lag: int) -> np.ndarray:
    """
    Normalized autocorrelation for lags 0..max_lag.

    Args:
        series: Signal
        max_lag: Largest lag, < len(series)

    Returns:
        Array of length max_lag + 1 with value 1 at lag 0
    """
    x = np.asarray(series, dtype=np.float64)
    if max_lag < 0 or max_lag >= x.size:
        raise InputError(f"max_lag must be in [0, {x.size - 1}], got {max_lag}")
    x = x - x.mean()
    denom = float(x @ x)
    if denom == 0.0:
        raise UndefinedCorrelationError("Autocorrelation is undefined for a constant signal")
    return np.array([float(x[: x.size - k] @ x[k:]) / denom for k in range(max_lag + 1)])


def dominant_lag(series: Sequence[float], min_lag: int, max_lag: int) -> int:
    """Lag in [min_lag, max_lag] with the highest autocorrelation."""
    acf = autocorrelation(series, max_lag)
    return int(min_lag + np.argmax(acf[min_lag:]))
