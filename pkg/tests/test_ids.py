import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from conftest import grid_of, grids
from ealm.generators import generate
from ealm.grid import DataPlane, GridSpec, InputOutput, padded_range, quantize
from ealm.ids import (IdsParams, NarrowPath, cog_path, ids, path_truth, plane_truth, plane_variance,
                      pyramid_kernel, truth)

SPEC = GridSpec(9, 7, (0.0, 9.0), (0.0, 7.0))


def column_plane(values):
    """A two-column plane whose first column holds ``values``."""
    cells = np.zeros((max(len(values), 2), 2))
    cells[:len(values), 0] = values
    return DataPlane(GridSpec(2, cells.shape[0], (0.0, 1.0), (0.0, 1.0)), cells)


def test_kernel_shape():
    k = pyramid_kernel(2)
    assert k.shape == (5, 5)
    assert k[2, 2] == 1.0
    assert math.isclose(k[0, 0], 1 / 3) and math.isclose(k[2, 3], 2 / 3)


def test_empty_grid_gives_zero_plane():
    assert not ids(grid_of(np.zeros((6, 6)))).cells.any()


def test_single_source_radius_one():
    cells = np.zeros((7, 7), dtype=bool)
    cells[3, 3] = True
    out = ids(grid_of(cells), IdsParams(1)).cells
    expected = np.zeros((7, 7))
    expected[2:5, 2:5] = 0.5
    expected[3, 3] = 1.0
    assert np.array_equal(out, expected)


def test_two_sources_meet_at_midpoint():
    cells = np.zeros((7, 9), dtype=bool)
    cells[3, 3] = cells[3, 5] = True
    assert ids(grid_of(cells), IdsParams(1)).cells[3, 4] == pytest.approx(1.0, abs=1e-12)


def test_supremum_mode_takes_the_max():
    cells = np.zeros((7, 9), dtype=bool)
    cells[3, 3] = cells[3, 5] = True
    out = ids(grid_of(cells), IdsParams(1, "supremum")).cells
    assert out[3, 4] == 0.5 and out.max() == 1.0


def test_ids_params_validation():
    with pytest.raises(ValueError):
        IdsParams(0)
    with pytest.raises(ValueError):
        IdsParams(2, "cone")


@given(grids(), st.integers(1, 3), st.sampled_from(["additive", "supremum"]))
def test_intensities_finite_and_nonnegative(g, r, mode):
    out = ids(g, IdsParams(r, mode)).cells
    assert np.all(np.isfinite(out)) and np.all(out >= 0)


@given(hnp.arrays(bool, (10, 10)), hnp.arrays(bool, (10, 10)), st.integers(1, 3))
def test_additive_mode_is_linear(a, b, r):
    b = b & ~a
    lhs = ids(grid_of(a | b), IdsParams(r)).cells
    rhs = ids(grid_of(a), IdsParams(r)).cells + ids(grid_of(b), IdsParams(r)).cells
    assert np.allclose(lhs, rhs, atol=1e-12)


@given(hnp.arrays(bool, (6, 6)), st.integers(1, 3))
def test_mass_conservation_away_from_border(inner, r):
    n = 6 + 2 * (r + 1)
    cells = np.zeros((n, n), dtype=bool)
    cells[r + 1:r + 7, r + 1:r + 7] = inner
    total = ids(grid_of(cells), IdsParams(r)).cells.sum()
    assert total == pytest.approx(inner.sum() * pyramid_kernel(r).sum(), abs=1e-9)


# -- centre of gravity -------------------------------------------------------------

def test_cog_symmetric_pair():
    path = cog_path(column_plane([0, 0, 1, 0, 1, 0]))
    assert path.delegate[0] == 3.0
    assert path.confidence[0] == pytest.approx(math.exp(-1.0))


def test_cog_weighted_mean():
    assert cog_path(column_plane([0, 1.0, 0, 0, 3.0, 0])).delegate[0] == pytest.approx(3.25, abs=1e-12)


def test_cog_empty_column_absent():
    p = cog_path(DataPlane(SPEC, np.zeros(SPEC.shape)))
    assert not p.present.any() and np.all(np.isnan(p.confidence))


@given(hnp.arrays(float, (8, 5), elements=st.floats(0, 10)), st.integers(1, 6))
def test_cog_translation_equivariant(w, k):
    base = np.zeros((20, 5))
    base[:8] = w
    moved = np.roll(base, k, axis=0)
    spec = GridSpec(5, 20, (0.0, 1.0), (0.0, 1.0))
    a, b = cog_path(DataPlane(spec, base)), cog_path(DataPlane(spec, moved))
    assert np.array_equal(a.present, b.present)
    assert np.allclose(b.delegate[a.present], a.delegate[a.present] + k, atol=1e-9)


@given(st.lists(st.floats(0, 5), min_size=1, max_size=6), st.integers(0, 1))
def test_cog_symmetric_column_returns_centre(half, odd):
    vals = half + [1.0] * odd + half[::-1]
    if sum(vals) == 0:
        return
    centre = (len(vals) - 1) / 2
    assert abs(cog_path(column_plane(vals)).delegate[0] - centre) <= 1e-12


@given(grids(), st.integers(1, 3))
def test_cog_path_valid(g, r):
    p = cog_path(ids(g, IdsParams(r)))
    d = p.delegate[p.present]
    assert np.all((d >= 0) & (d <= g.spec.height - 1))
    assert np.array_equal(p.present, ~np.isnan(p.confidence))


def test_narrow_path_validation():
    with pytest.raises(ValueError):
        NarrowPath(SPEC, [np.nan] * 8, [np.nan] * 8)
    with pytest.raises(ValueError):
        NarrowPath(SPEC, [7.0] + [np.nan] * 8, [1.0] + [np.nan] * 8)
    with pytest.raises(ValueError):
        NarrowPath(SPEC, [np.nan] * 9, [0.5] + [np.nan] * 8)


# -- truth ------------------------------------------------------------------------

def test_truth_examples():
    assert truth(0.0) == 1.0
    assert truth(math.log(2)) == pytest.approx(0.5, abs=1e-15)
    assert truth(1e6) < 1e-300
    with pytest.raises(ValueError, match="invalid variance"):
        truth(-0.1)
    with pytest.raises(ValueError, match="invalid variance"):
        truth(math.nan)


@given(st.floats(0, 700), st.floats(0, 700))
def test_truth_monotone(a, b):
    a, b = min(a, b), max(a, b)
    assert truth(a) >= truth(b)
    # exp rounds to the same double when the gap is far below its resolution
    if b - a > 1e-9:
        assert truth(a) > truth(b)


def test_plane_truth_of_a_function_is_one():
    assert plane_truth(grid_of(np.eye(6, dtype=bool))) == 1.0


@pytest.mark.parametrize("h", [1, 2, 3])
def test_plane_truth_two_rows(h):
    cells = np.zeros((12, 5), dtype=bool)
    cells[5 - h] = cells[5 + h] = True
    assert plane_truth(grid_of(cells)) == pytest.approx(math.exp(-h * h), rel=1e-12)


def test_plane_truth_empty():
    with pytest.raises(ValueError, match="no data in plane"):
        plane_truth(grid_of(np.zeros((4, 4))))


def test_ring_has_lower_truth_than_diagonal():
    ds, _ = generate("sin-circle", 450, 1, 42)
    planes = [quantize(ds, InputOutput(i), GridSpec(64, 64, padded_range(ds.X[:, i]), padded_range(ds.y)))
              for i in range(2)]
    line, ring = (plane_truth(p) for p in planes)
    assert line > 0.5 and ring < 1e-3 * line


def test_path_truth():
    cells = np.zeros((6, 4), dtype=bool)
    cells[2] = True
    on = NarrowPath(GridSpec(4, 6, (0, 1), (0, 1)), [2.0] * 4, [1.0] * 4)
    off = NarrowPath(GridSpec(4, 6, (0, 1), (0, 1)), [3.0] * 4, [1.0] * 4)
    assert path_truth(grid_of(cells), on) == 1.0
    assert path_truth(grid_of(cells), off) == pytest.approx(math.exp(-1))
    assert plane_variance(grid_of(cells)) == 0.0


def test_cog_flattens_ring_structure():
    ds, _ = generate("circle", 450, 1, 42)
    spec = GridSpec(64, 64, padded_range(ds.X[:, 0]), padded_range(ds.y))
    plane = quantize(ds, InputOutput(0), spec)
    gaps = []
    for c in np.flatnonzero(plane.cells.any(axis=0)):
        rows = np.flatnonzero(plane.cells[:, c])
        gaps.append(np.diff(rows).max(initial=0))
    assert max(gaps) > 10
    path = cog_path(ids(plane))
    filled = path.as_grid().cells
    assert np.all(filled.sum(axis=0)[path.present] == 1)
    assert path.delegate_count() >= plane.cells.any(axis=0).sum()
