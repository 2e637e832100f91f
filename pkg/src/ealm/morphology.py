"""Binary morphology on bounded grids with 3x3 structuring elements.

Masks are written the way they are printed: the first text row is the *top*
of the element (larger row index on the grid).  A chain is eight elements,
each the previous one turned 45 degrees clockwise.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence, Tuple

import numpy as np
from scipy import ndimage

from .grid import BinaryGrid, complement

FG, BG, DC = 1, 0, -1
_CHARS = {"1": FG, "0": BG, "*": DC}
_SYMBOLS = {FG: "1", BG: "0", DC: "*"}

# clockwise ring of the eight neighbours, starting top-left (printed coords)
_RING = ((0, 0), (0, 1), (0, 2), (1, 2), (2, 2), (2, 1), (2, 0), (1, 0))

FULL_3X3 = tuple((dr, dc) for dr in (-1, 0, 1) for dc in (-1, 0, 1))
ORIGIN = ((0, 0),)

Offset = Tuple[int, int]


def _offset(i: int, j: int) -> Offset:
    # printed row 0 is the top, i.e. one row *up* on the grid
    return (1 - i, j - 1)


@dataclass(frozen=True)
class StructuringElement:
    """3x3 mask of foreground (1), background (0) and don't-care (-1) cells."""

    mask: Tuple[Tuple[int, int, int], ...]

    def __post_init__(self):
        m = tuple(tuple(int(v) for v in row) for row in self.mask)
        if len(m) != 3 or any(len(row) != 3 for row in m):
            raise ValueError("structuring element must be 3x3")
        if any(v not in (FG, BG, DC) for row in m for v in row):
            raise ValueError("mask values must be 1, 0 or -1 (don't care)")
        object.__setattr__(self, "mask", m)

    @classmethod
    def parse(cls, text: str) -> "StructuringElement":
        rows = [line.replace(" ", "") for line in text.strip().splitlines() if line.strip()]
        if len(rows) != 3 or any(len(r) != 3 for r in rows):
            raise ValueError("structuring element text must be 3 lines of 3 characters")
        try:
            return cls(tuple(tuple(_CHARS[ch] for ch in r) for r in rows))
        except KeyError as exc:
            raise ValueError(f"invalid structuring element character {exc}") from None

    def __str__(self):
        return "\n".join("".join(_SYMBOLS[v] for v in row) for row in self.mask)

    def offsets(self, value: int) -> Tuple[Offset, ...]:
        return tuple(_offset(i, j) for i in range(3) for j in range(3) if self.mask[i][j] == value)

    @property
    def fg(self) -> Tuple[Offset, ...]:
        return self.offsets(FG)

    @property
    def bg(self) -> Tuple[Offset, ...]:
        return self.offsets(BG)

    def swapped(self) -> "StructuringElement":
        """Interchange the 1's and 0's."""
        flip = {FG: BG, BG: FG, DC: DC}
        return StructuringElement(tuple(tuple(flip[v] for v in row) for row in self.mask))

    def rotated(self) -> "StructuringElement":
        """The element turned 45 degrees clockwise."""
        m = [list(row) for row in self.mask]
        for k, (i, j) in enumerate(_RING):
            pi, pj = _RING[k - 1]
            m[i][j] = self.mask[pi][pj]
        return StructuringElement(tuple(tuple(row) for row in m))


def swap_fg_bg(se: StructuringElement) -> StructuringElement:
    return se.swapped()


@dataclass(frozen=True)
class SEChain:
    elements: Tuple[StructuringElement, ...]

    def __post_init__(self):
        els = tuple(self.elements)
        if len(els) != 8:
            raise ValueError(f"a chain needs 8 elements, got {len(els)}")
        for a, b in zip(els, els[1:]):
            if a.rotated() != b:
                raise ValueError("each chain element must be the previous one rotated by 45 degrees")
        object.__setattr__(self, "elements", els)

    @classmethod
    def from_generator(cls, se: StructuringElement) -> "SEChain":
        els = [se]
        for _ in range(7):
            els.append(els[-1].rotated())
        return cls(tuple(els))

    @classmethod
    def parse(cls, text: str) -> "SEChain":
        """Read a chain from text: either one element or eight, blank-line separated."""
        lines = [ln for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
        if len(lines) == 3:
            return cls.from_generator(StructuringElement.parse("\n".join(lines)))
        if len(lines) == 24:
            return cls(tuple(StructuringElement.parse("\n".join(lines[k:k + 3])) for k in range(0, 24, 3)))
        raise ValueError("chain text must hold 1 or 8 elements of 3 lines each")

    def swapped(self) -> "SEChain":
        return SEChain(tuple(se.swapped() for se in self.elements))

    def __iter__(self):
        return iter(self.elements)

    def __getitem__(self, i):
        return self.elements[i]

    def __len__(self):
        return 8

    def __str__(self):
        return "\n\n".join(str(se) for se in self.elements)


THICKENING_B1 = StructuringElement.parse("""
111
*0*
000
""")


class Chains(NamedTuple):
    thickening: SEChain
    thinning: SEChain


def standard_chains() -> Chains:
    """The printed thickening chain and its 1/0-interchanged thinning chain."""
    thick = SEChain.from_generator(THICKENING_B1)
    return Chains(thick, thick.swapped())


# -- primitives on raw arrays -------------------------------------------------

def _probe(cells: np.ndarray, outside: bool, dr: int, dc: int) -> np.ndarray:
    """View with ``out[r, c] = cells[r + dr, c + dc]``, ``outside`` past the edge."""
    padded = np.pad(cells, 1, constant_values=outside)
    h, w = cells.shape
    return padded[1 + dr:1 + dr + h, 1 + dc:1 + dc + w]


def _hmt(cells: np.ndarray, outside: bool, fg: Sequence[Offset], bg: Sequence[Offset]) -> np.ndarray:
    padded = np.pad(cells, 1, constant_values=outside)
    h, w = cells.shape
    out = np.ones_like(cells)
    for dr, dc in fg:
        out &= padded[1 + dr:1 + dr + h, 1 + dc:1 + dc + w]
    for dr, dc in bg:
        out &= ~padded[1 + dr:1 + dr + h, 1 + dc:1 + dc + w]
    return out


def _hmt_outside(outside: bool, se: StructuringElement) -> bool:
    # what the hit-or-miss reads in the (uniform) universe beyond the raster
    return (not se.fg or outside) and (not se.bg or not outside)


def _check_offsets(b: Iterable[Offset]) -> Tuple[Offset, ...]:
    b = tuple((int(dr), int(dc)) for dr, dc in b)
    if not b:
        raise ValueError("empty structuring element")
    if any(abs(dr) > 1 or abs(dc) > 1 for dr, dc in b):
        raise ValueError("offsets must lie within the 3x3 neighbourhood")
    return b


def _check_se(se: StructuringElement):
    if not se.fg and not se.bg:
        raise ValueError("degenerate structuring element")


# -- public operators ---------------------------------------------------------

def reflect(b: Iterable[Offset]) -> Tuple[Offset, ...]:
    return tuple((-dr, -dc) for dr, dc in b)


def erode(a: BinaryGrid, b: Iterable[Offset]) -> BinaryGrid:
    b = _check_offsets(b)
    out = np.ones_like(a.cells)
    for dr, dc in b:
        out &= _probe(a.cells, a.outside, dr, dc)
    return a.with_cells(out)


def dilate(a: BinaryGrid, b: Iterable[Offset]) -> BinaryGrid:
    b = _check_offsets(b)
    out = np.zeros_like(a.cells)
    for dr, dc in b:
        out |= _probe(a.cells, a.outside, -dr, -dc)
    return a.with_cells(out)


def hit_or_miss(a: BinaryGrid, se: StructuringElement) -> BinaryGrid:
    _check_se(se)
    return BinaryGrid(a.spec, _hmt(a.cells, a.outside, se.fg, se.bg), _hmt_outside(a.outside, se))


def thin_once(a: BinaryGrid, se: StructuringElement) -> BinaryGrid:
    return a - hit_or_miss(a, se)


def thicken_once(a: BinaryGrid, se: StructuringElement) -> BinaryGrid:
    return a | hit_or_miss(a, se)


def _thin_pass_cells(cells, outside, chain: SEChain):
    for se in chain:
        cells = cells & ~_hmt(cells, outside, se.fg, se.bg)
    return cells


def _thicken_pass_cells(cells, outside, chain: SEChain):
    for se in chain:
        cells = cells | _hmt(cells, outside, se.fg, se.bg)
    return cells


def thin_pass(a: BinaryGrid, chain: SEChain) -> BinaryGrid:
    out = a
    for se in chain:
        out = thin_once(out, se)
    return out


def thicken_pass(a: BinaryGrid, chain: SEChain) -> BinaryGrid:
    out = a
    for se in chain:
        out = thicken_once(out, se)
    return out


class SkeletonResult(NamedTuple):
    grid: BinaryGrid
    passes: int
    converged: bool


def thin_to_skeleton(a: BinaryGrid, chain: SEChain | None = None, max_passes: int = 256,
                     return_info: bool = False):
    """Repeat full thinning passes until nothing changes or ``max_passes`` is hit.

    With ``return_info`` a :class:`SkeletonResult` is returned, which also says
    whether the fixpoint was reached.
    """
    if max_passes < 1:
        raise ValueError("max_passes must be >= 1")
    if chain is None:
        chain = standard_chains().thinning
    for se in chain:
        _check_se(se)
    cells = a.cells
    converged = False
    passes = 0
    while passes < max_passes:
        nxt = _thin_pass_cells(cells, a.outside, chain)
        passes += 1
        if np.array_equal(nxt, cells):
            converged = True
            break
        cells = nxt
    out = a.with_cells(cells)
    return SkeletonResult(out, passes, converged) if return_info else out


def thicken(a: BinaryGrid, chain: SEChain | None = None, passes: int = 3) -> BinaryGrid:
    if passes < 1:
        raise ValueError("passes must be >= 1")
    if chain is None:
        chain = standard_chains().thickening
    for se in chain:
        _check_se(se)
    cells = a.cells
    for _ in range(passes):
        nxt = _thicken_pass_cells(cells, a.outside, chain)
        if np.array_equal(nxt, cells):
            break
        cells = nxt
    return a.with_cells(cells)


# a corner cell whose two perpendicular neighbours already touch diagonally
STAIRCASE = StructuringElement.parse("""
*1*
011
00*
""")


def staircase_elements() -> Tuple[StructuringElement, ...]:
    """The staircase element in its four 90-degree orientations."""
    els = [STAIRCASE]
    for _ in range(3):
        els.append(els[-1].rotated().rotated())
    return tuple(els)


def remove_staircases(a: BinaryGrid, max_passes: int = 256) -> BinaryGrid:
    """Thin 4-connected corners out of a skeleton, leaving 8-connected strokes.

    Thinning with the 45-degree chain stops at staircases and small
    triangles, which show up as doubled cells in a column.  Each deleted
    cell has its remaining neighbours connected through its two arms, so
    connectivity is kept.
    """
    els = staircase_elements()
    cells = a.cells
    for _ in range(max_passes):
        nxt = cells
        for se in els:
            nxt = nxt & ~_hmt(nxt, a.outside, se.fg, se.bg)
        if np.array_equal(nxt, cells):
            break
        cells = nxt
    return a.with_cells(cells)


def neighbour_count(a: BinaryGrid) -> np.ndarray:
    total = np.zeros(a.cells.shape, dtype=int)
    for dr, dc in FULL_3X3:
        if (dr, dc) != (0, 0):
            total += _probe(a.cells, a.outside, dr, dc)
    return total


# neighbours in circular order around the centre
_AROUND = ((1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1), (0, -1), (1, -1))


def end_points(a: BinaryGrid) -> BinaryGrid:
    """Set cells at the tip of a stroke.

    A tip has at most one set 8-neighbour, or up to three that form a single
    unbroken arc around it. The arc case is the root of a side branch hugging a
    straight stroke, which touches three stroke cells but still ends there.
    """
    ring = [_probe(a.cells, a.outside, dr, dc) for dr, dc in _AROUND]
    count = sum(r.astype(int) for r in ring)
    arcs = sum((ring[k] & ~ring[k - 1]).astype(int) for k in range(8))
    return a.with_cells(a.cells & ((count <= 1) | ((arcs == 1) & (count <= 3))))


def _touching(cells: np.ndarray, r: int, c: int):
    h, w = cells.shape
    return [(r + dr, c + dc) for dr, dc in _AROUND
            if 0 <= r + dr < h and 0 <= c + dc < w and cells[r + dr, c + dc]]


def prune(a: BinaryGrid, spur_length: int = 3) -> BinaryGrid:
    """Remove open spurs up to ``spur_length`` cells long.

    Tips are peeled ``spur_length`` times. Surviving strokes are then extended
    back from their tips in reverse peel order, one cell per tip per step, so
    main strokes keep their length while side branches stay removed. A tip that
    could continue in more than one direction stops growing.
    """
    if spur_length < 0:
        raise ValueError("spur_length must be >= 0")
    if spur_length == 0 or a.count == 0:
        return a
    peeled = a
    removed_at = np.zeros(a.cells.shape, dtype=int)
    for k in range(1, spur_length + 1):
        tips = end_points(peeled)
        removed_at[tips.cells] = k
        peeled = peeled - tips
    grown = peeled.cells.copy()
    frontier = end_points(peeled).cells & (neighbour_count(peeled) >= 1)
    for k in range(spur_length, 0, -1):
        children = {}
        for r, c in np.argwhere(removed_at == k):
            near = _touching(grown, r, c)
            roots = [p for p in near if frontier[p]]
            if len(roots) != 1:
                continue
            f = roots[0]
            if all(max(abs(p[0] - f[0]), abs(p[1] - f[1])) <= 1 for p in near):
                children.setdefault(f, []).append((r, c))
        frontier = np.zeros_like(frontier)
        for kids in children.values():
            if len(kids) == 1:
                grown[kids[0]] = True
                frontier[kids[0]] = True
        if not frontier.any():
            break
    return a.with_cells(grown)


def components(a: BinaryGrid) -> Tuple[np.ndarray, int]:
    """8-connected component labels of the set cells."""
    labels, n = ndimage.label(a.cells, structure=np.ones((3, 3), dtype=bool))
    return labels, int(n)
