import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from conftest import elements, grid_of, grids
from ealm.grid import BinaryGrid, complement
from ealm.morphology import (FULL_3X3, ORIGIN, SEChain, StructuringElement, components, dilate, end_points,
                             erode, standard_chains, hit_or_miss, prune, reflect, remove_staircases, swap_fg_bg,
                             thicken, thicken_once, thicken_pass, thin_once, thin_pass, thin_to_skeleton)
from ealm.extended import EalmConfig, prepare_plane

CHAINS = standard_chains()
OFFSET_SETS = st.lists(st.sampled_from(FULL_3X3), min_size=1, max_size=9, unique=True)


def masks(chain):
    return [se.mask for se in chain]


# -- erosion and dilation -------------------------------------------------------

@given(grids())
def test_origin_is_identity(g):
    assert erode(g, ORIGIN) == g
    assert dilate(g, ORIGIN) == g


@given(grids(), OFFSET_SETS)
def test_erode_dilate_match_oracle(g, offs):
    assert np.array_equal(erode(g, offs).cells, oracles.erode(g.cells, offs))
    assert np.array_equal(dilate(g, offs).cells, oracles.dilate(g.cells, offs))


def test_erode_empty_and_solid_block():
    empty = grid_of(np.zeros((5, 5)))
    assert erode(empty, FULL_3X3).count == 0
    block = np.zeros((7, 7), dtype=bool)
    block[2:5, 2:5] = True
    out = erode(grid_of(block), FULL_3X3)
    assert out.count == 1 and out.cells[3, 3]


def test_empty_offset_set_rejected():
    with pytest.raises(ValueError, match="empty structuring element"):
        erode(grid_of(np.ones((3, 3))), [])
    with pytest.raises(ValueError, match="empty structuring element"):
        dilate(grid_of(np.ones((3, 3))), [])


def test_single_cell_dilates_to_clipped_block():
    cells = np.zeros((5, 5), dtype=bool)
    cells[2, 2] = True
    assert dilate(grid_of(cells), FULL_3X3).cells[1:4, 1:4].all()
    assert dilate(grid_of(cells), FULL_3X3).count == 9
    corner = np.zeros((5, 5), dtype=bool)
    corner[0, 0] = True
    assert dilate(grid_of(corner), FULL_3X3).count == 4


@given(grids(guard=1), OFFSET_SETS)
def test_erosion_dilation_duality(g, offs):
    lhs = complement(erode(g, offs))
    rhs = dilate(complement(g), reflect(offs))
    # interior cells; the bounded complement also agrees on the border
    assert np.array_equal(lhs.cells[1:-1, 1:-1], rhs.cells[1:-1, 1:-1])
    assert lhs == rhs


# -- hit-or-miss ------------------------------------------------------------------

ISOLATED = StructuringElement.parse("000\n010\n000")


def test_isolated_point_detector():
    cells = np.zeros((7, 7), dtype=bool)
    cells[1, 1] = True
    cells[4, 4] = cells[4, 5] = True
    out = hit_or_miss(grid_of(cells), ISOLATED)
    assert np.array_equal(out.cells, oracles.hit_or_miss(cells, ISOLATED.mask))
    assert out.count == 1 and out.cells[1, 1]


@given(grids())
def test_centre_only_element_is_identity(g):
    assert hit_or_miss(g, StructuringElement.parse("***\n*1*\n***")).cells.tolist() == g.cells.tolist()


@given(grids(), elements())
def test_hit_or_miss_matches_oracle_and_erosions(g, se):
    out = hit_or_miss(g, se)
    assert np.array_equal(out.cells, oracles.hit_or_miss(g.cells, se.mask))
    two_way = np.ones_like(g.cells)
    if se.fg:
        two_way &= erode(g, se.fg).cells
    if se.bg:
        two_way &= erode(complement(g), se.bg).cells
    assert np.array_equal(out.cells, two_way)


@given(grids(), elements())
def test_hit_or_miss_complement_law(g, se):
    assert np.array_equal(hit_or_miss(complement(g), swap_fg_bg(se)).cells, hit_or_miss(g, se).cells)


def test_degenerate_element_rejected():
    with pytest.raises(ValueError, match="degenerate"):
        hit_or_miss(grid_of(np.ones((3, 3))), StructuringElement.parse("***\n***\n***"))


# -- thinning and thickening ------------------------------------------------------

@given(grids(), elements())
def test_thin_subset_thicken_superset(g, se):
    assert thin_once(g, se).issubset(g)
    assert g.issubset(thicken_once(g, se))


@given(grids(), elements())
def test_thin_once_examples(g, se):
    if hit_or_miss(g, se).count == 0:
        assert thin_once(g, se) == g
    empty = grid_of(np.zeros(g.cells.shape))
    assert thin_once(empty, se).count == 0
    full = grid_of(np.ones(g.cells.shape))
    assert thicken_once(full, se).count == full.count


@given(grids(guard=2), st.integers(0, 7))
def test_element_duality(g, k):
    thick_se = CHAINS.thickening[k]
    lhs = complement(thin_once(complement(g), swap_fg_bg(thick_se)))
    assert np.array_equal(lhs.cells, thicken_once(g, thick_se).cells)
    # converse form
    thin_se = CHAINS.thinning[k]
    lhs = complement(thicken_once(complement(g), swap_fg_bg(thin_se)))
    assert np.array_equal(lhs.cells, thin_once(g, thin_se).cells)


@given(grids(guard=2))
def test_chain_duality(g):
    lhs = complement(thin_pass(complement(g), CHAINS.thickening.swapped()))
    assert np.array_equal(lhs.cells, thicken_pass(g, CHAINS.thickening).cells)


@given(grids())
def test_passes_match_oracle(g):
    assert np.array_equal(thin_pass(g, CHAINS.thinning).cells, oracles.thin_pass(g.cells, masks(CHAINS.thinning)))
    assert np.array_equal(thicken_pass(g, CHAINS.thickening).cells,
                          oracles.thicken_pass(g.cells, masks(CHAINS.thickening)))


def test_one_pixel_path_survives_a_pass():
    cells = np.zeros((8, 14), dtype=bool)
    for r, c in [(2, 1), (2, 2), (2, 3), (3, 4), (4, 5), (4, 6), (4, 7), (3, 8), (2, 9), (2, 10)]:
        cells[r, c] = True
    out = thin_pass(grid_of(cells), CHAINS.thinning).cells
    assert np.array_equal(out, oracles.thin_pass(cells, masks(CHAINS.thinning)))
    assert np.array_equal(out, cells)


def test_empty_grid_stays_empty():
    empty = grid_of(np.zeros((6, 6)))
    assert thin_pass(empty, CHAINS.thinning).count == 0
    assert thin_to_skeleton(empty).count == 0


def test_bar_skeleton_is_a_line():
    cells = oracles.bar()
    skel = thin_to_skeleton(grid_of(cells)).cells
    assert np.array_equal(skel, oracles.thin_to_fixpoint(cells, masks(CHAINS.thinning)))
    cols = np.flatnonzero(cells.any(axis=0))
    # both ends keep two-column corner stubs, as any thinning of a rectangle does
    assert np.all(skel[:, cols[2:-2]].sum(axis=0) == 1)
    longest = max(len(run) for row in skel for run in "".join("#" if v else "." for v in row).split("."))
    assert longest >= 18
    assert oracles.count_components(skel) == 1


@pytest.mark.parametrize("name", sorted(oracles.SHAPES))
def test_skeleton_keeps_components(name):
    cells = oracles.SHAPES[name]()
    res = thin_to_skeleton(grid_of(cells), return_info=True)
    assert res.converged
    assert res.grid.issubset(grid_of(cells))
    assert oracles.count_components(res.grid.cells) == oracles.count_components(cells)
    assert thin_to_skeleton(res.grid) == res.grid


@given(grids())
def test_skeleton_idempotent(g):
    s = thin_to_skeleton(g)
    assert thin_to_skeleton(s) == s


def test_max_passes_reported():
    res = thin_to_skeleton(grid_of(oracles.disc()), max_passes=1, return_info=True)
    assert res.passes == 1 and not res.converged
    with pytest.raises(ValueError):
        thin_to_skeleton(grid_of(oracles.disc()), max_passes=0)


@given(grids(), st.integers(1, 3))
def test_thicken_monotone(g, p):
    a = thicken(g, passes=p)
    assert g.issubset(a) and a.issubset(thicken(g, passes=p + 1))


def diagonal_dots():
    cells = np.zeros((16, 16), dtype=bool)
    for k in range(2, 14, 2):
        cells[k, k] = True
    return cells


def test_thickening_alone_cannot_grow_isolated_dots():
    # every thickening element needs three set neighbours, so lone cells never grow
    cells = diagonal_dots()
    assert np.array_equal(thicken(grid_of(cells), passes=8).cells, cells)
    assert np.array_equal(oracles.thicken_pass(cells, masks(CHAINS.thickening)), cells)


def test_plane_preparation_joins_sparse_dots():
    prepared = prepare_plane(grid_of(diagonal_dots()), EalmConfig())
    assert oracles.count_components(prepared.cells) == 1


# -- pruning ----------------------------------------------------------------------

@given(grids())
def test_prune_zero_is_identity(g):
    assert prune(g, 0) == g


def test_prune_isolated_cell():
    cells = np.zeros((5, 5), dtype=bool)
    cells[2, 2] = True
    assert prune(grid_of(cells), 1).count == 0


def test_prune_t_shape_branch():
    cells = np.zeros((9, 9), dtype=bool)
    cells[2, 1:8] = True  # main stroke
    cells[3:5, 4] = True  # 2-cell side branch
    out = prune(grid_of(cells), 2).cells
    assert not out[3:5, 4].any()
    assert out[2, 1:8].all()


def test_end_points():
    cells = np.zeros((5, 5), dtype=bool)
    cells[2, 1:4] = True
    assert end_points(grid_of(cells)).cells[2].tolist() == [False, True, False, True, False]


def test_staircase_removal_keeps_connectivity():
    cells = np.zeros((10, 10), dtype=bool)
    for k in range(1, 8):
        cells[k, k] = cells[k, k + 1] = True
    out = remove_staircases(grid_of(cells)).cells
    assert out.sum() < cells.sum()
    assert oracles.count_components(out) == 1
    assert np.all(out.sum(axis=0)[1:9] == 1)


# -- structuring elements -------------------------------------------------------------

def test_standard_first_elements():
    assert CHAINS.thickening[0].mask == ((1, 1, 1), (-1, 0, -1), (0, 0, 0))
    assert CHAINS.thinning[0] == swap_fg_bg(CHAINS.thickening[0])
    assert str(CHAINS.thinning[0]) == "000\n*1*\n111"
    assert str(CHAINS.thinning[1]) == "*00\n110\n11*"


def test_chain_elements_rotate():
    for chain in CHAINS:
        for a, b in zip(chain.elements, chain.elements[1:]):
            assert a.rotated() == b
        # eight 45 degree turns come back to the start
        assert chain[7].rotated() == chain[0]


def test_element_text_format():
    se = StructuringElement.parse("1*0\n*1*\n0*1")
    assert str(se) == "1*0\n*1*\n0*1"
    for bad in ("11\n11\n11", "1110\n111\n111", "1x1\n111\n111", "111\n111"):
        with pytest.raises(ValueError):
            StructuringElement.parse(bad)


def test_chain_parse():
    assert SEChain.parse("111\n*0*\n000") == CHAINS.thickening
    assert SEChain.parse(str(CHAINS.thinning)) == CHAINS.thinning
    with pytest.raises(ValueError):
        SEChain.parse("\n\n".join(["111\n*0*\n000"] * 8))


def test_components_matches_flood_fill():
    rng = np.random.default_rng(7)
    for _ in range(20):
        cells = rng.random((12, 12)) < 0.3
        assert components(grid_of(cells))[1] == oracles.count_components(cells)
