"""Conventional ALM: IDS + centre-of-gravity paths, Truth-driven axis splits."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Tuple

import numpy as np

from .grid import BinaryGrid, Dataset, GridSpec, InputOutput, padded_range, quantize
from .ids import IdsParams, cog_path, ids, plane_variance, pyramid_kernel
from .rules import (ALM, AxisSplit, EntireDomain, GrownTree, Interval, PathModel, Rule, RuleBase,
                    conjoin)


@dataclass(frozen=True)
class AlmConfig:
    resolution: int = 64
    ids: IdsParams = field(default_factory=IdsParams)
    truth_threshold: float = 0.8
    max_depth: int = 6
    min_samples: int = 3

    def __post_init__(self):
        if not 0 < self.truth_threshold < 1:
            raise ValueError("truth_threshold must lie in (0, 1)")
        if self.max_depth < 0:
            raise ValueError("max_depth must be >= 0")
        if self.resolution < 2:
            raise ValueError("resolution must be >= 2")

    def to_dict(self):
        return {"resolution": self.resolution, "ids_radius": self.ids.radius, "ids_mode": self.ids.mode,
                "truth_threshold": self.truth_threshold, "max_depth": self.max_depth,
                "min_samples": self.min_samples}


def _scan(candidates: np.ndarray, score: Callable[[int], float]) -> Tuple[int, float]:
    """Best-scoring candidate; ties go to the one nearest the middle of the span."""
    scores = np.array([score(int(t)) for t in candidates])
    best = scores.max()
    tied = candidates[np.isclose(scores, best, rtol=0, atol=1e-12)]
    mid = (candidates[0] + candidates[-1]) / 2.0
    return int(tied[np.argmin(np.abs(tied - mid))]), float(best)


def alm_split_point(plane: BinaryGrid, score: Optional[Callable[[int], float]] = None) -> int:
    """Column ``t`` splitting ``plane`` into columns ``< t`` and ``>= t``.

    A split is scored by ``n_left * ln(Truth_left) + n_right * ln(Truth_right)``
    (``n`` counting set cells), i.e. by how much row variance it removes.  The
    fitting code passes its own ``score`` that measures a *dependent* plane.
    """
    nonempty = np.flatnonzero(plane.cells.any(axis=0))
    if nonempty.size < 2:
        raise ValueError("unsplittable plane")

    if score is None:
        def score(t):
            left, right = plane.cells.copy(), plane.cells.copy()
            left[:, t:] = False
            right[:, :t] = False
            return -(left.sum() * plane_variance(plane.with_cells(left))
                     + right.sum() * plane_variance(plane.with_cells(right)))

    return _scan(nonempty[1:], score)[0]


def _bin_rows(y, bounds, n):
    lo, hi = bounds
    return np.clip(np.floor((y - lo) / (hi - lo) * n), 0, n - 1).astype(int)


def _residual_variance(nt: int, shape, t, r, c, kernel: np.ndarray, mode: str) -> np.ndarray:
    """Row variance of set cells about the COG path, for ``nt`` stacked planes.

    The set cells are given as unique (plane, row, col) index triples.
    """
    h, w = shape
    rad = kernel.shape[0] // 2
    if mode == "additive":
        # only each column's ink mass and first row moment are needed
        mass = np.zeros((nt, w + 2 * rad))
        moment = np.zeros((nt, w + 2 * rad))
        for dy in range(-rad, rad + 1):
            ok = (r + dy >= 0) & (r + dy < h)
            flat = t[ok] * w + c[ok]
            s0 = np.bincount(flat, minlength=nt * w).reshape(nt, w)
            s1 = np.bincount(flat, weights=(r[ok] + dy).astype(float), minlength=nt * w).reshape(nt, w)
            for dx in range(-rad, rad + 1):
                k = kernel[dy + rad, dx + rad]
                mass[:, rad + dx:rad + dx + w] += k * s0
                moment[:, rad + dx:rad + dx + w] += k * s1
        mass, moment = mass[:, rad:rad + w], moment[:, rad:rad + w]
    else:
        cells = np.zeros((nt, h + 2 * rad, w + 2 * rad))
        cells[t, r + rad, c + rad] = 1.0
        dropped = np.zeros((nt, h, w))
        for a in range(2 * rad + 1):
            for b in range(2 * rad + 1):
                dropped = np.maximum(dropped, kernel[a, b] * cells[:, a:a + h, b:b + w])
        mass = dropped.sum(axis=1)
        moment = (np.arange(h, dtype=float)[None, :, None] * dropped).sum(axis=1)
    # every set cell's column carries ink, so its delegate is defined
    mean = moment[t, c] / mass[t, c]
    sq = np.bincount(t, weights=(r - mean) ** 2, minlength=nt)
    n = np.bincount(t, minlength=nt)
    return np.where(n > 0, sq / np.maximum(n, 1), 0.0)


class _AlmBuilder:
    def __init__(self, ds: Dataset, cfg: AlmConfig, dump=None):
        self.ds = ds
        self.cfg = cfg
        self.dump = dump
        self.y_range = padded_range(ds.y)
        self.tree = GrownTree()

    def spec(self, X: np.ndarray, i: int) -> GridSpec:
        r = self.cfg.resolution
        return GridSpec(r, r, padded_range(X[:, i]), self.y_range)

    def plane(self, X, y, i) -> BinaryGrid:
        return quantize(Dataset(X, y), InputOutput(i), self.spec(X, i))

    def fit_plane(self, X, y, i):
        """(plane, COG path, mean per-column row variance) for input ``i``."""
        g = self.plane(X, y, i)
        path = cog_path(ids(g, self.cfg.ids))
        return g, path, plane_variance(g)

    @staticmethod
    def path_rule(i, path, v, antecedent, low_confidence=False) -> Rule:
        return Rule(antecedent, PathModel(i, path), max(math.exp(-v), 1e-300), low_confidence)

    def split_scores(self, X, y, i, kcols, cand) -> np.ndarray:
        """Score of every candidate column ``t`` (split ``kcols < t``) for plane ``i``.

        Each half is drawn on its own grid, exactly as ``fit_plane`` would.
        """
        h = w = self.cfg.resolution
        rows = _bin_rows(y, self.y_range, h)
        x = X[:, i]
        kernel = pyramid_kernel(self.cfg.ids.radius)
        score = np.zeros(len(cand))
        for side in (kcols[None, :] < cand[:, None], kcols[None, :] >= cand[:, None]):
            lo = np.where(side, x[None, :], np.inf).min(axis=1)
            hi = np.where(side, x[None, :], -np.inf).max(axis=1)
            pad = np.where(hi > lo, 0.0, np.maximum(np.abs(lo), 1.0) * 1e-6)
            lo, hi = lo - pad, hi + pad
            cols = np.floor((x[None, :] - lo[:, None]) / (hi - lo)[:, None] * w)
            cols = np.clip(cols, 0, w - 1).astype(int)
            ti, pi = np.nonzero(side)
            flat = np.unique((ti * h + rows[pi]) * w + cols[ti, pi])
            tr, rest = np.divmod(flat, h * w)
            rr, cc = np.divmod(rest, w)
            var = _residual_variance(len(cand), (h, w), tr, rr, cc, kernel, self.cfg.ids.mode)
            score -= side.sum(axis=1) * var
        return score

    def best_split(self, X, y, i) -> Optional[Tuple[int, float, float]]:
        """(axis, threshold, score) of the split that most improves plane ``i``."""
        best = None
        m = self.cfg.min_samples
        for k in range(X.shape[1]):
            spec_k = self.spec(X, k)
            cols = spec_k.col_of(X[:, k])
            counts = np.bincount(cols, minlength=spec_k.width)
            below = np.cumsum(counts)
            # t splits off columns < t; both sides need enough samples
            cand = np.array([t for t in np.flatnonzero(counts)[1:]
                             if below[t - 1] >= m and len(y) - below[t - 1] >= m], dtype=int)
            if cand.size == 0:
                continue
            scores = self.split_scores(X, y, i, cols, cand)
            t, s = _scan(cand, lambda c: scores[np.searchsorted(cand, c)])
            if best is None or s > best[2] + 1e-9:
                lo, hi = spec_k.x_range
                best = (k, lo + t * (hi - lo) / spec_k.width, s)
        return best

    def grow(self, X, y, antecedent, planes, depth, node):
        for i in planes:
            g, path, v = self.fit_plane(X, y, i)
            if self.dump is not None:
                self.dump(node, i, g, ids(g, self.cfg.ids), path)
            if math.exp(-v) >= self.cfg.truth_threshold:
                self.tree.leaf(depth, self.path_rule(i, path, v, antecedent))
                continue
            split = None
            if depth < self.cfg.max_depth and len(y) >= 2 * self.cfg.min_samples:
                split = self.best_split(X, y, i)
            fallback = self.path_rule(i, path, v, antecedent, True)
            left = None if split is None else X[:, split[0]] < split[1]
            if left is None or left.all() or not left.any():
                self.tree.leaf(depth, fallback)
                continue
            k, thr, _ = split
            self.tree.split(depth, AxisSplit(k, thr, node, i), fallback)
            self.grow(X[left], y[left], conjoin(antecedent, Interval(k, -math.inf, thr)),
                      [i], depth + 1, node + "0")
            self.grow(X[~left], y[~left], conjoin(antecedent, Interval(k, thr, math.inf)),
                      [i], depth + 1, node + "1")


def alm_fit(ds: Dataset, cfg: AlmConfig = AlmConfig(), *, dump=None, cut: str = "best") -> RuleBase:
    """Fit a conventional ALM rule base.

    Every (x_i, y) plane is ink-dropped and reduced to a centre-of-gravity
    path.  A plane whose Truth (from the raw per-column row variance)
    reaches ``cfg.truth_threshold`` becomes a rule
    over the current region; any other plane is split along the input axis
    and threshold that best reduce the row spread of its two halves about
    their paths, and each half is handled the same way.  Planes still failing at
    ``cfg.max_depth`` become rules flagged ``low_confidence``.

    The grown trees are finally cut at the depth (at most ``cfg.max_depth``)
    with the lowest training MSE, so a larger cap never fits worse.  Pass
    ``cut="full"`` to keep every rule grown.
    """
    if len(ds) < 2:
        raise ValueError("empty dataset: at least 2 rows are needed")
    b = _AlmBuilder(ds, cfg, dump)
    # the root antecedent "x_j is M" names some other input when there is one
    for i in range(ds.n_inputs):
        other = (i + 1) % ds.n_inputs
        b.grow(ds.X, ds.y, EntireDomain(other), [i], 0, "")
    domain = tuple(padded_range(ds.X[:, i]) for i in range(ds.n_inputs))
    build = lambda rules, splits, d: RuleBase(rules, ALM, domain, b.y_range, d, splits, cfg.to_dict())
    return b.tree.cut(build, ds.X, ds.y, cut)
