import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from app.core.errors import ContractViolation
from app.core.lattice import (
    IlluminationMask,
    OccupancyGrid,
    StimulusEvent,
    StimulusProgram,
    TrailField,
    deposit,
    diffuse_and_damp,
    disc_sites,
    outside_square,
    project_attractant,
    sample_weighted,
)


def test_uniform_interior_damps_by_factor():
    trail = TrailField(7, 7, np.full((7, 7), 4.0))
    out = diffuse_and_damp(trail, 0.9)
    assert out.values[3, 3] == pytest.approx(3.6)


def test_interior_impulse_spreads_over_neighbourhood():
    trail = TrailField(5, 5)
    trail.values[2, 2] = 9.0
    out = diffuse_and_damp(trail, 0.9)
    np.testing.assert_allclose(out.values[1:4, 1:4], 0.9)
    assert out.values[0, :].sum() == 0.0
    assert out.total() == pytest.approx(8.1)


def test_corner_impulse_leaks_mass():
    trail = TrailField(5, 5)
    trail.values[0, 0] = 9.0
    out = diffuse_and_damp(trail, 1.0)
    np.testing.assert_allclose(out.values[0:2, 0:2], 1.0)
    assert out.total() == pytest.approx(4.0)


def test_diffuse_rejects_bad_damping():
    with pytest.raises(ContractViolation):
        diffuse_and_damp(TrailField(3, 3), 0.0)
    with pytest.raises(ContractViolation):
        diffuse_and_damp(TrailField(3, 3), 1.5)


@given(
    st.lists(
        st.tuples(st.integers(0, 9), st.integers(0, 9), st.floats(0, 100)), min_size=1, max_size=20
    ),
    st.floats(0.5, 1.0),
)
def test_diffusion_keeps_values_non_negative_and_mass_bounded(deposits, damping):
    trail = TrailField(10, 10)
    for x, y, amount in deposits:
        deposit(trail, (x, y), amount)
    before = trail.total()
    trail.diffuse(damping)
    assert (trail.values >= 0).all()
    assert trail.total() <= before * damping * (1 + 1e-12) + 1e-9


@given(
    st.lists(
        st.tuples(st.integers(1, 8), st.integers(1, 8), st.floats(0, 100)), min_size=1, max_size=20
    ),
    st.floats(0.5, 1.0),
)
def test_diffusion_scales_interior_mass_exactly(deposits, damping):
    trail = TrailField(10, 10)
    for x, y, amount in deposits:
        deposit(trail, (x, y), amount)
    before = trail.total()
    trail.diffuse(damping)
    assert trail.total() == pytest.approx(damping * before, rel=1e-9, abs=1e-12)


def test_diffusion_preserves_argmax_of_isolated_peak():
    trail = TrailField(11, 11)
    trail.values[5, 5] = 20.0
    trail.values[5, 6] = 5.0
    out = diffuse_and_damp(trail, 0.9)
    assert np.unravel_index(np.argmax(trail.values), trail.values.shape) == (5, 5)
    assert out.values[5, 5] >= out.values[5, 6]


def test_deposit_accumulates():
    trail = TrailField(4, 4)
    deposit(trail, (1, 2), 5.0)
    assert trail.value(1, 2) == 5.0
    deposit(trail, (1, 2), 5.0)
    assert trail.value(1, 2) == 10.0

    trail.values[0, 0] = 2.5
    deposit(trail, (0, 0), 0.0)
    assert trail.value(0, 0) == 2.5


def test_deposit_outside_lattice_is_contract_violation():
    with pytest.raises(ContractViolation):
        deposit(TrailField(4, 4), (4, 0), 5.0)
    with pytest.raises(ContractViolation):
        deposit(TrailField(4, 4), (0, 0), -1.0)


def test_project_single_site_and_pattern():
    trail = TrailField(6, 6)
    project_attractant(trail, [(2, 3)], 10.0)
    assert trail.value(2, 3) == 10.0

    shape = np.zeros((6, 6), dtype=bool)
    shape[1:3, 1:4] = True
    trail = TrailField(6, 6)
    project_attractant(trail, shape, 10.0)
    assert (trail.values[shape] == 10.0).all()
    assert (trail.values[~shape] == 0.0).all()

    trail = TrailField(6, 6)
    project_attractant(trail, [], 10.0)
    assert trail.total() == 0.0


def test_sample_weighted():
    trail = TrailField(4, 4)
    trail.values[1, 1] = 8.0
    exposed = np.zeros((4, 4), dtype=bool)
    exposed[1, 1] = True

    assert sample_weighted(trail, (1, 1), IlluminationMask(exposed, 0.1)) == pytest.approx(0.8)
    assert sample_weighted(trail, (1, 1), IlluminationMask.inactive(4, 4)) == 8.0
    assert sample_weighted(trail, (1, 1), None) == 8.0
    assert sample_weighted(trail, (-1, 1), IlluminationMask(exposed, 0.1)) == 0.0
    assert sample_weighted(trail, (4, 0), None) == 0.0


def test_occupancy_move_and_counts():
    grid = OccupancyGrid(5, 5)
    grid.place(7, 2, 2)
    assert not grid.is_free(2, 2)
    assert grid.occupant(2, 2) == 7
    assert not grid.is_free(5, 0)

    grid.move(7, (2, 2), (3, 2))
    assert grid.is_free(2, 2)
    assert grid.occupant(3, 2) == 7
    assert grid.count() == 1

    with pytest.raises(ContractViolation):
        grid.place(8, 3, 2)

    grid.place(8, 4, 4)
    counts = grid.window_counts(3)
    assert counts[3, 3] == 2
    assert counts[0, 0] == 0


def test_hold_program_stops_projecting_after_duration():
    shape = np.ones((4, 4), dtype=bool)
    program = StimulusProgram([StimulusEvent(0, 50, "attractant_pattern", shape, 10.0)])
    trail = TrailField(4, 4)
    program.apply(trail, 49)
    assert trail.total() == pytest.approx(160.0)
    program.apply(trail, 50)
    assert trail.total() == pytest.approx(160.0)


def test_program_builds_union_illumination():
    a = np.zeros((4, 4), dtype=bool)
    a[0, 0] = True
    b = np.zeros((4, 4), dtype=bool)
    b[3, 3] = True
    program = StimulusProgram(
        [
            StimulusEvent(0, 5, "illumination_mask", a, 0.1),
            StimulusEvent(2, 5, "illumination_mask", b, 0.2),
        ]
    )
    trail = TrailField(4, 4)
    mask = program.apply(trail, 3)
    assert mask.is_exposed(0, 0) and mask.is_exposed(3, 3)
    assert mask.weight == 0.1
    mask = program.apply(trail, 6)
    assert not mask.is_exposed(0, 0) and mask.is_exposed(3, 3)
    assert not program.apply(trail, 10).active


def test_program_drops_expired_events():
    sites = np.ones((3, 3), dtype=bool)
    program = StimulusProgram()
    for start in range(0, 100, 10):
        program.add(StimulusEvent(start, 5, "illumination_mask", sites, 0.1))
    trail = TrailField(3, 3)
    for step in range(52):
        program.apply(trail, step)
    assert [event.start for event in program.events] == [50, 60, 70, 80, 90]
    program.add(StimulusEvent(95, 5, "attractant_pattern", sites, 1.0))
    assert len(program.active(96)) == 1


def test_projection_adds_magnitude_per_site():
    sites = np.zeros((6, 6), dtype=bool)
    sites[1:4, 2:5] = True
    program = StimulusProgram([StimulusEvent(0, 3, "attractant_pattern", sites, 7.5)])
    trail = TrailField(6, 6)
    trail.values[0, 0] = 2.0
    before = trail.total()
    program.apply(trail, 0)
    assert trail.total() - before == pytest.approx(7.5 * sites.sum())


def test_program_rejects_out_of_order_events():
    sites = np.ones((2, 2), dtype=bool)
    program = StimulusProgram([StimulusEvent(5, 1, "attractant_pattern", sites, 1.0)])
    with pytest.raises(ContractViolation):
        program.add(StimulusEvent(4, 1, "attractant_pattern", sites, 1.0))


def test_site_helpers():
    disc = disc_sites(9, 9, (4, 4), 1)
    assert disc.sum() == 5

    exposed = outside_square(10, 10, (5, 5), 4)
    assert (~exposed).sum() == 16
    assert exposed[0, 0]
