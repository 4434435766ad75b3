import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from app.core.errors import ContractViolation, InputError
from app.data.series import (
    DataSeries,
    SeriesLayout,
    arithmetic_mean,
    encode_series,
    gen_skewed_series,
    gen_uniform_series,
    geometric_mean,
    harmonic_mean,
    series_from_spec,
)
from app.data.shapes import is_connected
from app.schemas import SeriesEncoding, SeriesSpec


def test_uniform_series_mean_converges():
    series = gen_uniform_series(100_000, 0.0, 100.0, np.random.default_rng(1))
    assert abs(arithmetic_mean(series) - 50.0) < 0.5


def test_uniform_series_narrow_domain():
    series = gen_uniform_series(2, 5.0, 5.0 + 1e-9, np.random.default_rng(1))
    assert all(5.0 <= v <= 5.0 + 1e-9 for v in series.values)


def test_series_generation_is_deterministic():
    a = gen_uniform_series(20, 0, 100, np.random.default_rng(4))
    b = gen_uniform_series(20, 0, 100, np.random.default_rng(4))
    assert a == b
    assert gen_skewed_series(20, np.random.default_rng(4)) == gen_skewed_series(
        20, np.random.default_rng(4)
    )


def test_skewed_series_is_mostly_high():
    series = gen_skewed_series(100_000, np.random.default_rng(2))
    values = series.as_array()
    assert np.mean(values >= 80.0) == pytest.approx(0.9, abs=0.01)
    assert arithmetic_mean(series) == pytest.approx(82.0, abs=0.5)


def test_generators_validate_arguments(rng):
    with pytest.raises(ContractViolation):
        gen_uniform_series(1, 0, 100, rng)
    with pytest.raises(ContractViolation):
        gen_uniform_series(5, 10, 10, rng)
    with pytest.raises(ContractViolation):
        DataSeries((150.0, 1.0))


def test_reference_means():
    series = DataSeries((1.0, 2.0, 3.0))
    assert arithmetic_mean(series) == 2.0
    assert arithmetic_mean(DataSeries((7.0,) * 5)) == 7.0
    assert geometric_mean(series) == pytest.approx(6 ** (1 / 3))
    assert harmonic_mean(series) == pytest.approx(3 / (1 + 1 / 2 + 1 / 3))
    assert geometric_mean(DataSeries((0.0, 5.0))) is None
    assert harmonic_mean(DataSeries((0.0, 5.0))) is None


def test_series_from_spec(rng):
    explicit = series_from_spec(SeriesSpec(values=[30.0, 10.0, 20.0], sorted=True), rng)
    assert explicit.values == (10.0, 20.0, 30.0)
    assert explicit.sorted

    drawn = series_from_spec(SeriesSpec(n=12, distribution="skewed"), rng)
    assert len(drawn) == 12


def test_layout_inverts_value_axis():
    layout = SeriesLayout(SeriesEncoding(), 20, 0.0, 100.0)
    assert layout.row(100.0) < layout.row(0.0)
    assert layout.value(layout.site(0, 37.0)[1]) == pytest.approx(37.0)
    assert abs(layout.value(layout.site(0, 37.4)[1]) - 37.4) < 1.0
    assert layout.width == 2 * 16 + 19 * 20 + 1


def test_constant_series_is_a_band_of_stroke_height():
    enc = SeriesEncoding()
    series = DataSeries((50.0,) * 5)
    mask = encode_series(series, enc)
    layout = SeriesLayout(enc, 5, 0.0, 100.0)
    interior_column = mask.inside[:, int(layout.column(2))]
    assert interior_column.sum() == enc.stroke_width
    assert is_connected(mask)


def test_band_centre_reads_back_as_its_value():
    enc = SeriesEncoding()
    layout = SeriesLayout(enc, 5, 0.0, 100.0)
    for value in (0.0, 23.0, 50.0, 100.0):
        mask = encode_series(DataSeries((value,) * 5), enc)
        ys, _ = np.nonzero(mask.inside)
        assert layout.value(ys.mean()) == pytest.approx(value)


def test_zigzag_matches_polygon_oracle():
    enc = SeriesEncoding()
    series = DataSeries(tuple(100.0 if i % 2 else 0.0 for i in range(6)))
    mask = encode_series(series, enc)
    layout = SeriesLayout(enc, 6, 0.0, 100.0)
    sites = [layout.site(i, v) for i, v in enumerate(series.values)]

    # independent oracle: union of each segment's offset rectangle and vertex discs,
    # sampled at cell coordinates
    ys, xs = np.mgrid[0 : mask.height, 0 : mask.width]
    half = enc.stroke_width / 2.0
    oracle = np.zeros_like(mask.inside)
    for (ax, ay), (bx, by) in zip(sites, sites[1:]):
        dx, dy = bx - ax, by - ay
        length = np.hypot(dx, dy)
        along = ((xs - ax) * dx + (ys - ay) * dy) / length
        across = np.abs((xs - ax) * dy - (ys - ay) * dx) / length
        oracle |= (along >= 0) & (along <= length) & (across <= half)
    for sx, sy in sites:
        oracle |= (xs - sx) ** 2 + (ys - sy) ** 2 <= half * half

    assert abs(mask.count() - oracle.sum()) <= 0.02 * oracle.sum()


def test_encoding_rejects_out_of_bounds():
    series = DataSeries((10.0, 90.0))
    with pytest.raises(InputError):
        encode_series(series, SeriesEncoding(margin=1))


def test_encoding_rejects_disconnected_path(monkeypatch):
    def broken_stroke(width, height, points, half_width):
        inside = np.zeros((height, width), dtype=bool)
        inside[20, 20] = inside[40, 40] = True
        return inside

    monkeypatch.setattr("app.data.series.stroke_mask", broken_stroke)
    with pytest.raises(InputError):
        encode_series(DataSeries((10.0, 90.0, 50.0)), SeriesEncoding())


@given(st.lists(st.floats(0.0, 100.0), min_size=2, max_size=8))
def test_any_series_encodes_to_one_component(values):
    mask = encode_series(DataSeries(tuple(values)), SeriesEncoding())
    assert is_connected(mask)
    assert mask.count() > 0


@given(st.lists(st.floats(0.0, 100.0), min_size=3, max_size=8), st.data())
def test_cutting_a_segment_disconnects_the_encoding(values, data):
    enc = SeriesEncoding()
    mask = encode_series(DataSeries(tuple(values)), enc)
    layout = SeriesLayout(enc, len(values), 0.0, 100.0)
    i = data.draw(st.integers(0, len(values) - 2))
    cut = int(layout.column(i) + enc.spacing / 2)
    mask.inside[:, cut] = False
    assert not is_connected(mask)
