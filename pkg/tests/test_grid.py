import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from conftest import grid_of, grids
from ealm.generators import sin_circle
from ealm.grid import (BinaryGrid, DataPlane, Dataset, GridSpec, InputInput, InputOutput, branch_counts,
                       complement, padded_range, quantize, quantize_points, threshold, to_scalar)

SPEC = GridSpec(8, 6, (0.0, 1.0), (-2.0, 2.0))


def test_dataset_validation():
    with pytest.raises(ValueError, match="empty"):
        Dataset(np.zeros((0, 2)), np.zeros(0))
    with pytest.raises(ValueError, match="non-finite"):
        Dataset([[1.0], [math.nan]], [0.0, 1.0])
    with pytest.raises(ValueError, match="rows"):
        Dataset([[1.0], [2.0]], [0.0])
    ds = Dataset([1.0, 2.0, 3.0], [1.0, 2.0, 3.0])
    assert ds.n_inputs == 1 and len(ds) == 3


def test_gridspec_validation():
    with pytest.raises(ValueError):
        GridSpec(1, 5, (0, 1), (0, 1))
    with pytest.raises(ValueError):
        GridSpec(5, 5, (1, 1), (0, 1))


def test_single_sample_at_minimum_corner():
    g = quantize(Dataset([[0.0]], [-2.0]), InputOutput(0), SPEC)
    assert g.count == 1 and g.cells[0, 0]


def test_single_sample_at_maximum_corner():
    g = quantize(Dataset([[1.0]], [2.0]), InputOutput(0), SPEC)
    assert g.count == 1 and g.cells[SPEC.height - 1, SPEC.width - 1]


def test_out_of_range_samples_are_clipped():
    g = quantize_points([-5.0, 9.0], [-9.0, 9.0], SPEC)
    assert g.cells[0, 0] and g.cells[-1, -1] and g.count == 2


def test_quantize_matches_oracle():
    rng = np.random.default_rng(1)
    u, v = rng.uniform(-0.2, 1.2, 300), rng.uniform(-2.5, 2.5, 300)
    g = quantize_points(u, v, SPEC)
    assert np.array_equal(g.cells, oracles.quantize(u, v, SPEC.x_range, SPEC.y_range, 8, 6))


def test_input_input_plane():
    ds = Dataset([[0.0, 1.0], [1.0, 0.0]], [5.0, 5.0])
    g = quantize(ds, InputInput(0, 1), GridSpec(4, 4, (0, 1), (0, 1)))
    assert g.cells[3, 0] and g.cells[0, 3] and g.count == 2
    with pytest.raises(ValueError):
        InputInput(1, 1)


def test_sin_circle_planes():
    t = np.linspace(0, 10 * math.pi, 200)
    X, y = sin_circle(t)
    ds = Dataset(X, y)
    g1 = quantize(ds, InputOutput(0), GridSpec(64, 64, padded_range(X[:, 0]), padded_range(y)))
    rows, cols = np.nonzero(g1.cells)
    assert np.all(np.abs(rows - cols) <= 1)
    g2 = quantize(ds, InputOutput(1), GridSpec(64, 64, padded_range(X[:, 1]), padded_range(y)))
    rows, cols = np.nonzero(g2.cells)
    radius = np.hypot(rows - 31.5, cols - 31.5)
    # every cell sits on the circle and every octant is covered
    assert np.all(np.abs(radius - 31.5) <= 1.5)
    octants = np.floor((np.arctan2(rows - 31.5, cols - 31.5) + math.pi) / (math.pi / 4)).astype(int) % 8
    assert set(octants.tolist()) == set(range(8))


def test_to_scalar_and_threshold_examples():
    empty = BinaryGrid.empty(SPEC)
    assert not to_scalar(empty).cells.any()
    cells = np.zeros(SPEC.shape, dtype=bool)
    cells[2, 3] = True
    p = to_scalar(empty.with_cells(cells))
    assert p.cells[2, 3] == 1.0 and p.cells.sum() == 1.0
    assert threshold(DataPlane(SPEC, np.zeros(SPEC.shape)), 0.0).count == 0
    vals = np.zeros(SPEC.shape)
    vals[0, 1], vals[0, 2] = 0.4, 0.9
    t = threshold(DataPlane(SPEC, vals), 0.5)
    assert t.count == 1 and t.cells[0, 2]
    with pytest.raises(ValueError):
        threshold(DataPlane(SPEC, vals), -1.0)


def test_complement_examples():
    empty = BinaryGrid.empty(SPEC)
    assert complement(empty).count == SPEC.width * SPEC.height


@given(grids())
def test_scalar_round_trip(g):
    assert np.array_equal(threshold(to_scalar(g), 0.5).cells, g.cells)


@given(grids())
def test_complement_involution_and_partition(g):
    assert complement(complement(g)) == g
    assert g.count + complement(g).count == g.spec.width * g.spec.height


@given(st.lists(st.tuples(st.floats(-3, 3), st.floats(-3, 3)), min_size=1, max_size=60), st.randoms())
def test_quantize_permutation_invariant_and_bounded(points, rnd):
    shuffled = points[:]
    rnd.shuffle(shuffled)
    a = quantize_points([p[0] for p in points], [p[1] for p in points], SPEC)
    b = quantize_points([p[0] for p in shuffled], [p[1] for p in shuffled], SPEC)
    assert a == b
    assert 1 <= a.count <= len(points)


def test_branch_counts_oracle():
    rng = np.random.default_rng(4)
    cells = rng.random((10, 12)) < 0.4
    assert branch_counts(grid_of(cells)).tolist() == oracles.column_run_counts(cells)
