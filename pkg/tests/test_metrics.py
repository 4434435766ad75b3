import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from app.core.errors import InputError, UndefinedCorrelationError
from app.schemas import RunMetrics
from app.services.metrics import aggregate, autocorrelation, dominant_lag, pearson


def _run(seed, error, covariate=None, **extra):
    return RunMetrics(
        experiment="mean",
        seed=seed,
        final_error=error,
        halt_step=10,
        halt_reason="population",
        covariate=covariate,
        extra=extra,
    )


def test_aggregate_constant_errors():
    summary = aggregate([_run(i, 3.0) for i in range(3)])
    assert summary.mae == 3.0
    assert summary.sigma == 0.0
    assert summary.n_runs == 3
    assert summary.rho is None


def test_aggregate_uses_population_sigma():
    summary = aggregate([_run(0, 0.0), _run(1, 4.0)])
    assert summary.mae == 2.0
    assert summary.sigma == 2.0
    assert summary.sigma_convention == "population"


def test_aggregate_empty_batch():
    with pytest.raises(InputError):
        aggregate([])


def test_aggregate_reports_covariate_correlation_and_direction():
    runs = [
        _run(i, float(i), covariate=float(2 * i + 1), signed_error=float(i) - 1.5)
        for i in range(4)
    ]
    summary = aggregate(runs, "series_std")
    assert summary.rho == pytest.approx(1.0)
    assert summary.covariate == "series_std"
    assert summary.fraction_above == 0.5
    assert summary.seeds == [0, 1, 2, 3]


def test_aggregate_skips_rho_for_constant_covariate():
    runs = [_run(i, float(i), covariate=1.0) for i in range(3)]
    assert aggregate(runs, "series_std").rho is None


def test_pearson_exact_lines():
    xs = np.arange(10.0)
    assert pearson(xs, 2 * xs + 1) == pytest.approx(1.0)
    assert pearson(xs, -xs) == pytest.approx(-1.0)


def test_pearson_of_independent_samples():
    rng = np.random.default_rng(11)
    assert abs(pearson(rng.random(10_000), rng.random(10_000))) < 0.05


def test_pearson_errors():
    with pytest.raises(UndefinedCorrelationError):
        pearson([1.0, 1.0, 1.0], [1.0, 2.0, 3.0])
    with pytest.raises(InputError):
        pearson([1.0, 2.0], [1.0, 2.0, 3.0])
    with pytest.raises(InputError):
        pearson([1.0], [2.0])


@given(
    st.lists(
        st.tuples(st.floats(-1e3, 1e3), st.floats(-1e3, 1e3)), min_size=3, max_size=30
    )
)
def test_pearson_agrees_with_two_pass_formula(pairs):
    x = np.array([p[0] for p in pairs])
    y = np.array([p[1] for p in pairs])
    dx, dy = x - x.mean(), y - y.mean()
    denom = np.sqrt((dx @ dx) * (dy @ dy))
    if np.ptp(x) == 0 or np.ptp(y) == 0 or denom < 1e-6:
        return
    expected = float(np.clip((dx @ dy) / denom, -1, 1))
    assert pearson(x, y) == pytest.approx(expected, abs=1e-6)


def test_autocorrelation_finds_period():
    t = np.arange(500)
    signal = np.sin(2 * np.pi * t / 25)
    acf = autocorrelation(signal, 60)
    assert acf[0] == pytest.approx(1.0)
    assert dominant_lag(signal, 10, 40) == 25


def test_autocorrelation_errors():
    with pytest.raises(InputError):
        autocorrelation([1.0, 2.0], 5)
    with pytest.raises(UndefinedCorrelationError):
        autocorrelation([3.0, 3.0, 3.0], 1)
