"""Ink Drop Spread, centre-of-gravity narrow paths and the Truth measure."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import signal

from .grid import BinaryGrid, DataPlane, GridSpec

ADDITIVE = "additive"
SUPREMUM = "supremum"


@dataclass(frozen=True)
class IdsParams:
    radius: int = 2
    mode: str = ADDITIVE

    def __post_init__(self):
        if int(self.radius) < 1:
            raise ValueError("IDS radius must be >= 1")
        if self.mode not in (ADDITIVE, SUPREMUM):
            raise ValueError(f"unknown IDS mode {self.mode!r}")
        object.__setattr__(self, "radius", int(self.radius))


def pyramid_kernel(radius: int) -> np.ndarray:
    """Square pyramid ``max(0, 1 - max(|dx|, |dy|) / (radius + 1))``."""
    d = np.arange(-radius, radius + 1)
    cheb = np.maximum(np.abs(d)[:, None], np.abs(d)[None, :])
    return np.maximum(0.0, 1.0 - cheb / (radius + 1))


def ids(g: BinaryGrid, p: IdsParams = IdsParams()) -> DataPlane:
    kernel = pyramid_kernel(p.radius)
    src = g.cells.astype(float)
    if p.mode == ADDITIVE:
        out = signal.convolve2d(src, kernel, mode="same")
        # convolution round-off can leave tiny negatives
        out = np.where(out < 1e-12, 0.0, out)
    else:
        out = np.zeros(src.shape)
        h, w = src.shape
        r = p.radius
        padded = np.pad(src, r)
        for i in range(2 * r + 1):
            for j in range(2 * r + 1):
                out = np.maximum(out, kernel[i, j] * padded[i:i + h, j:j + w])
    return DataPlane(g.spec, out)


@dataclass(frozen=True)
class NarrowPath:
    """Per-column delegate row (NaN where absent) and its confidence."""

    spec: GridSpec
    delegate: np.ndarray
    confidence: np.ndarray

    def __post_init__(self):
        d = np.array(self.delegate, dtype=float)
        c = np.array(self.confidence, dtype=float)
        if d.shape != (self.spec.width,) or c.shape != d.shape:
            raise ValueError("path arrays must have one entry per column")
        present = ~np.isnan(d)
        if np.any(d[present] < 0) or np.any(d[present] > self.spec.height - 1):
            raise ValueError("delegate outside the grid")
        if np.any(~np.isnan(c[~present])):
            raise ValueError("confidence given for a column without delegate")
        if np.any((c[present] < 0) | (c[present] > 1)):
            raise ValueError("confidence must lie in [0, 1]")
        d.setflags(write=False)
        c.setflags(write=False)
        object.__setattr__(self, "delegate", d)
        object.__setattr__(self, "confidence", c)

    @property
    def present(self) -> np.ndarray:
        return ~np.isnan(self.delegate)

    def delegate_count(self) -> int:
        return int(self.present.sum())

    def as_grid(self) -> BinaryGrid:
        """The path drawn as one cell per column."""
        cells = np.zeros(self.spec.shape, dtype=bool)
        cols = np.flatnonzero(self.present)
        cells[np.rint(self.delegate[cols]).astype(int), cols] = True
        return BinaryGrid(self.spec, cells)


def truth(variance: float) -> float:
    if not variance >= 0:
        raise ValueError("invalid variance")
    return math.exp(-variance)


def column_moments(weights: np.ndarray):
    """Weighted mean and variance of row index per column (NaN if no mass)."""
    rows = np.arange(weights.shape[0], dtype=float)[:, None]
    mass = weights.sum(axis=0)
    with np.errstate(invalid="ignore", divide="ignore"):
        mean = (rows * weights).sum(axis=0) / mass
        var = (((rows - mean) ** 2) * weights).sum(axis=0) / mass
    mean[mass <= 0] = np.nan
    var[mass <= 0] = np.nan
    return mean, np.maximum(var, 0.0)


def cog_path(p: DataPlane) -> NarrowPath:
    mean, var = column_moments(p.cells)
    conf = np.exp(-var)
    return NarrowPath(p.spec, np.clip(mean, 0, p.spec.height - 1), conf)


def plane_variance(g: BinaryGrid) -> float:
    """Mean over non-empty columns of the row variance of the set cells."""
    if g.count == 0:
        raise ValueError("no data in plane")
    _, var = column_moments(g.cells.astype(float))
    return float(np.nanmean(var))


def plane_truth(g: BinaryGrid) -> float:
    return truth(plane_variance(g))


def path_variance(g: BinaryGrid, path: NarrowPath) -> float:
    """Mean squared row distance of the set cells from the path's delegates."""
    if g.count == 0:
        raise ValueError("no data in plane")
    rows, cols = np.nonzero(g.cells)
    present = path.present
    if not present.any():
        raise ValueError("path has no delegates")
    pc = np.flatnonzero(present)
    d = np.interp(cols.astype(float), pc.astype(float), path.delegate[pc])
    return float(np.mean((rows - d) ** 2))


def path_truth(g: BinaryGrid, path: NarrowPath) -> float:
    """Truth of a narrow path as a representative of the data in ``g``."""
    return truth(path_variance(g, path))
