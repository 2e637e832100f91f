"""Raster data model: datasets, grid specs, binary grids and scalar planes.

Cells are stored as ``cells[row, col]`` with row 0 at the *minimum* of the
vertical axis.  Image export flips this so that the top of a file is the top
of the plane.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence, Tuple, Union

import numpy as np

DEFAULT_RESOLUTION = 64


@dataclass(frozen=True)
class Dataset:
    """Multi-input single-output samples, ``X`` of shape (n, n_inputs)."""

    X: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        X = np.asarray(self.X, dtype=float)
        y = np.asarray(self.y, dtype=float).reshape(-1)
        if X.ndim == 1:
            X = X.reshape(-1, 1)
        if X.ndim != 2:
            raise ValueError("X must be two-dimensional")
        if X.shape[0] != y.shape[0]:
            raise ValueError(f"X has {X.shape[0]} rows but y has {y.shape[0]}")
        if X.shape[0] == 0:
            raise ValueError("empty dataset")
        if X.shape[1] == 0:
            raise ValueError("dataset needs at least one input")
        if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
            raise ValueError("dataset contains non-finite values")
        X.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)

    @property
    def n_inputs(self) -> int:
        return self.X.shape[1]

    def __len__(self) -> int:
        return self.X.shape[0]

    def column(self, axis: int) -> np.ndarray:
        """Input ``axis`` values; ``-1`` selects the output."""
        return self.y if axis == -1 else self.X[:, axis]

    def subset(self, mask: np.ndarray) -> "Dataset":
        return Dataset(self.X[mask], self.y[mask])


@dataclass(frozen=True)
class GridSpec:
    width: int
    height: int
    x_range: Tuple[float, float]
    y_range: Tuple[float, float]

    def __post_init__(self):
        if self.width < 2 or self.height < 2:
            raise ValueError("grid needs at least 2x2 cells")
        x_range = (float(self.x_range[0]), float(self.x_range[1]))
        y_range = (float(self.y_range[0]), float(self.y_range[1]))
        if not x_range[1] > x_range[0] or not y_range[1] > y_range[0]:
            raise ValueError("grid ranges need max > min")
        object.__setattr__(self, "x_range", x_range)
        object.__setattr__(self, "y_range", y_range)

    @property
    def shape(self) -> Tuple[int, int]:
        return (self.height, self.width)

    def col_of(self, v) -> np.ndarray:
        return _bin(v, self.x_range, self.width)

    def row_of(self, v) -> np.ndarray:
        return _bin(v, self.y_range, self.height)

    def x_at(self, col) -> np.ndarray:
        """Continuous x at (possibly fractional) column ``col``, bin centres."""
        lo, hi = self.x_range
        return lo + (np.asarray(col, dtype=float) + 0.5) / self.width * (hi - lo)

    def y_at(self, row) -> np.ndarray:
        lo, hi = self.y_range
        return lo + (np.asarray(row, dtype=float) + 0.5) / self.height * (hi - lo)

    def col_coord(self, x) -> np.ndarray:
        """Fractional column coordinate of ``x`` (inverse of :meth:`x_at`)."""
        lo, hi = self.x_range
        return (np.asarray(x, dtype=float) - lo) / (hi - lo) * self.width - 0.5

    def to_dict(self) -> dict:
        return {
            "width": self.width,
            "height": self.height,
            "x_range": list(self.x_range),
            "y_range": list(self.y_range),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "GridSpec":
        return cls(int(d["width"]), int(d["height"]), tuple(d["x_range"]), tuple(d["y_range"]))


def _bin(v, bounds, n) -> np.ndarray:
    lo, hi = bounds
    idx = np.floor((np.asarray(v, dtype=float) - lo) / (hi - lo) * n)
    return np.clip(idx, 0, n - 1).astype(int)


def padded_range(values: np.ndarray, rel: float = 0.0) -> Tuple[float, float]:
    """(min, max) of ``values``, widened so that max > min always holds."""
    lo, hi = float(np.min(values)), float(np.max(values))
    span = hi - lo
    if span <= 0:
        pad = max(abs(lo), 1.0) * 1e-6
        return lo - pad, hi + pad
    return lo - rel * span, hi + rel * span


@dataclass(frozen=True)
class BinaryGrid:
    """A set of cells on a bounded raster.

    ``outside`` is the value read for probes that leave the raster.  It is
    ``False`` for ordinary grids and flips under :func:`complement`, so the
    complement of a set is taken with respect to the whole plane rather than
    just the visible window.
    """

    spec: GridSpec
    cells: np.ndarray
    outside: bool = False

    def __post_init__(self):
        cells = np.asarray(self.cells, dtype=bool)
        if cells.shape != self.spec.shape:
            raise ValueError(f"cells shape {cells.shape} does not match grid {self.spec.shape}")
        cells = cells.copy()
        cells.setflags(write=False)
        object.__setattr__(self, "cells", cells)
        object.__setattr__(self, "outside", bool(self.outside))

    @classmethod
    def empty(cls, spec: GridSpec) -> "BinaryGrid":
        return cls(spec, np.zeros(spec.shape, dtype=bool))

    @classmethod
    def from_array(cls, cells, spec: GridSpec | None = None) -> "BinaryGrid":
        cells = np.asarray(cells, dtype=bool)
        if spec is None:
            h, w = cells.shape
            spec = GridSpec(w, h, (0.0, float(w)), (0.0, float(h)))
        return cls(spec, cells)

    def with_cells(self, cells) -> "BinaryGrid":
        return BinaryGrid(self.spec, cells, self.outside)

    @property
    def count(self) -> int:
        return int(self.cells.sum())

    def __len__(self) -> int:
        return self.count

    def __eq__(self, other):
        if not isinstance(other, BinaryGrid):
            return NotImplemented
        return (
            self.spec == other.spec
            and self.outside == other.outside
            and np.array_equal(self.cells, other.cells)
        )

    def __hash__(self):
        return hash((self.spec, self.outside, self.cells.tobytes()))

    def __or__(self, other: "BinaryGrid") -> "BinaryGrid":
        return BinaryGrid(self.spec, self.cells | other.cells, self.outside or other.outside)

    def __and__(self, other: "BinaryGrid") -> "BinaryGrid":
        return BinaryGrid(self.spec, self.cells & other.cells, self.outside and other.outside)

    def __sub__(self, other: "BinaryGrid") -> "BinaryGrid":
        return BinaryGrid(self.spec, self.cells & ~other.cells, self.outside and not other.outside)

    def issubset(self, other: "BinaryGrid") -> bool:
        return bool(np.all(~self.cells | other.cells))

    def column_rows(self, col: int) -> np.ndarray:
        return np.flatnonzero(self.cells[:, col])

    def __repr__(self):
        return f"BinaryGrid({self.spec.width}x{self.spec.height}, {self.count} set)"


@dataclass(frozen=True)
class DataPlane:
    spec: GridSpec
    cells: np.ndarray

    def __post_init__(self):
        cells = np.array(self.cells, dtype=float)
        if cells.shape != self.spec.shape:
            raise ValueError(f"cells shape {cells.shape} does not match grid {self.spec.shape}")
        if not np.all(np.isfinite(cells)) or np.any(cells < 0):
            raise ValueError("plane intensities must be finite and non-negative")
        cells.setflags(write=False)
        object.__setattr__(self, "cells", cells)


@dataclass(frozen=True)
class InputOutput:
    """The (x_i, y) plane."""

    i: int

    @property
    def axes(self) -> Tuple[int, int]:
        return (self.i, -1)


@dataclass(frozen=True)
class InputInput:
    """The (x_i, x_j) plane; only built by the extended pipeline."""

    i: int
    j: int

    def __post_init__(self):
        if self.i == self.j:
            raise ValueError("input-input plane needs two distinct inputs")

    @property
    def axes(self) -> Tuple[int, int]:
        return (self.i, self.j)


PlaneKind = Union[InputOutput, InputInput]


def plane_spec(ds: Dataset, kind: PlaneKind, width: int = DEFAULT_RESOLUTION,
               height: int = DEFAULT_RESOLUTION) -> GridSpec:
    """A spec whose ranges are the data extent on the plane's two axes."""
    a, b = kind.axes
    return GridSpec(width, height, padded_range(ds.column(a)), padded_range(ds.column(b)))


def quantize(ds: Dataset, kind: PlaneKind, spec: GridSpec) -> BinaryGrid:
    if len(ds) == 0:
        raise ValueError("empty dataset")
    a, b = kind.axes
    cols = spec.col_of(ds.column(a))
    rows = spec.row_of(ds.column(b))
    cells = np.zeros(spec.shape, dtype=bool)
    cells[rows, cols] = True
    return BinaryGrid(spec, cells)


def quantize_points(u: Sequence[float], v: Sequence[float], spec: GridSpec) -> BinaryGrid:
    """Quantize raw (u, v) pairs without building a :class:`Dataset`."""
    u = np.asarray(u, dtype=float)
    if u.size == 0:
        raise ValueError("empty dataset")
    cells = np.zeros(spec.shape, dtype=bool)
    cells[spec.row_of(v), spec.col_of(u)] = True
    return BinaryGrid(spec, cells)


def to_scalar(g: BinaryGrid) -> DataPlane:
    return DataPlane(g.spec, g.cells.astype(float))


def threshold(p: DataPlane, t: float) -> BinaryGrid:
    if t < 0:
        raise ValueError("threshold must be non-negative")
    return BinaryGrid(p.spec, p.cells > t)


def complement(g: BinaryGrid) -> BinaryGrid:
    return BinaryGrid(g.spec, ~g.cells, not g.outside)


def column_runs(col: np.ndarray) -> list:
    """Maximal runs of consecutive set rows as (start, stop) half-open pairs."""
    rows = np.flatnonzero(col)
    if rows.size == 0:
        return []
    breaks = np.flatnonzero(np.diff(rows) > 1)
    starts = np.concatenate(([rows[0]], rows[breaks + 1]))
    stops = np.concatenate((rows[breaks], [rows[-1]])) + 1
    return list(zip(starts.tolist(), stops.tolist()))


def branch_counts(g: BinaryGrid) -> np.ndarray:
    """Number of separate vertical runs in each column."""
    return np.array([len(column_runs(g.cells[:, c])) for c in range(g.spec.width)])
