"""Extended ALM: thickening/thinning paths and y0 splits with linear separators."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from .grid import (BinaryGrid, Dataset, GridSpec, InputOutput, branch_counts, column_runs,
                   padded_range, quantize)
from .ids import NarrowPath, column_moments, plane_truth
from .morphology import (FULL_3X3, SEChain, dilate, standard_chains, prune, remove_staircases, thicken,
                         thin_to_skeleton)
from .rules import (EALM, EntireDomain, GrownTree, Interval, LinearSeparator, PathModel, Rule, RuleBase,
                    Union, YSplit, conjoin)


@dataclass(frozen=True)
class EalmConfig:
    resolution: int = 64
    thicken_passes: int = 3
    bridge: int = 1
    spur_length: int = 3
    error_threshold: float = 0.05
    max_depth: int = 6
    min_samples: int = 3
    max_passes: int = 256
    straddle_ratio: float = 0.5

    def __post_init__(self):
        if self.resolution < 2:
            raise ValueError("resolution must be >= 2")
        if not 0 < self.straddle_ratio <= 1:
            raise ValueError("straddle_ratio must be in (0, 1]")
        if self.min_samples < 1:
            raise ValueError("min_samples must be >= 1")
        if self.error_threshold <= 0:
            raise ValueError("error_threshold must be positive")
        if self.max_depth < 0:
            raise ValueError("max_depth must be >= 0")
        if self.thicken_passes < 1:
            raise ValueError("thicken_passes must be >= 1")
        if self.bridge < 0 or self.spur_length < 0:
            raise ValueError("bridge and spur_length must be >= 0")

    def to_dict(self):
        return {"resolution": self.resolution, "thicken_passes": self.thicken_passes,
                "bridge": self.bridge, "spur_length": self.spur_length,
                "error_threshold": self.error_threshold, "max_depth": self.max_depth,
                "min_samples": self.min_samples, "max_passes": self.max_passes,
                "straddle_ratio": self.straddle_ratio}


# -- y0 search and areas -------------------------------------------------------

def _column_extents(g: BinaryGrid):
    cells = g.cells
    has = cells.any(axis=0)
    h = cells.shape[0]
    lowest = np.where(has, np.argmax(cells, axis=0), h)
    highest = np.where(has, h - 1 - np.argmax(cells[::-1], axis=0), -1)
    return has, lowest, highest


def y0_scores(g: BinaryGrid) -> np.ndarray:
    """For each row y0, the number of columns with cells strictly below and above it."""
    has, lowest, highest = _column_extents(g)
    y0 = np.arange(g.spec.height)[:, None]
    return ((lowest[None, :] < y0) & (highest[None, :] > y0) & has[None, :]).sum(axis=1)


class Y0(NamedTuple):
    y0: int
    plane: int
    score: int


def find_y0(planes: Sequence[BinaryGrid]) -> Y0:
    best = None
    for p, g in enumerate(planes):
        scores = y0_scores(g)
        centre = g.spec.height / 2.0
        for y0, s in enumerate(scores):
            if s <= 0:
                continue
            key = (-int(s), abs(y0 - centre), p, y0)
            if best is None or key < best[0]:
                best = (key, Y0(y0, p, int(s)))
    if best is None:
        raise ValueError("no split needed")
    return best[1]


class Areas(NamedTuple):
    area_i: BinaryGrid
    area_ii: BinaryGrid
    area_iii: BinaryGrid


def column_labels(g: BinaryGrid, y0: int) -> np.ndarray:
    """Per column: 1, 2 or 3 for areas I/II/III, 0 for empty columns."""
    has, lowest, highest = _column_extents(g)
    labels = np.zeros(g.spec.width, dtype=int)
    labels[has & (highest <= y0)] = 1
    labels[has & (lowest > y0)] = 2
    labels[has & (lowest <= y0) & (highest > y0)] = 3
    return labels


def partition_areas(plane: BinaryGrid, y0: int) -> Areas:
    if not 0 < y0 < plane.spec.height:
        raise ValueError("y0 must lie strictly inside the grid")
    labels = column_labels(plane, y0)
    return Areas(*(plane.with_cells(plane.cells & (labels == k)[None, :]) for k in (1, 2, 3)))


# -- separator ----------------------------------------------------------------

def fit_separator(class1, class2, i: int = 0, j: int = 1) -> LinearSeparator:
    """Least-squares discriminant with targets +1 (class 1) and -1 (class 2)."""
    p1 = np.asarray(class1, dtype=float).reshape(-1, 2)
    p2 = np.asarray(class2, dtype=float).reshape(-1, 2)
    if len(p1) == 0 or len(p2) == 0:
        raise ValueError("both classes need at least one point")
    pts = np.vstack([p1, p2])
    if np.allclose(p1.mean(axis=0), p2.mean(axis=0)) and np.allclose(pts, pts[0]):
        raise ValueError("degenerate classes")
    target = np.concatenate([np.ones(len(p1)), -np.ones(len(p2))])
    mu = pts.mean(axis=0)
    sd = pts.std(axis=0)
    sd[sd == 0] = 1.0
    A = np.column_stack([(pts - mu) / sd, np.ones(len(pts))])
    w, *_ = np.linalg.lstsq(A, target, rcond=None)
    a, b = w[0] / sd[0], w[1] / sd[1]
    c = w[2] - a * mu[0] - b * mu[1]
    if abs(a) + abs(b) <= 1e-12 * (1 + abs(c)):
        raise ValueError("degenerate classes")
    v1 = a * p1[:, 0] + b * p1[:, 1] + c
    v2 = a * p2[:, 0] + b * p2[:, 1] + c
    err = (np.sum(v1 < 0) + np.sum(v2 >= 0)) / len(pts)
    return LinearSeparator(i, j, float(a), float(b), float(c), float(err))


# -- plane processing -----------------------------------------------------------

def prepare_plane(g: BinaryGrid, cfg: EalmConfig, chains=None) -> BinaryGrid:
    """Bridge isolated samples, then thicken with the chain."""
    chains = chains or standard_chains()
    out = g
    for _ in range(cfg.bridge):
        out = dilate(out, FULL_3X3)
    return thicken(out, chains.thickening, cfg.thicken_passes)


def skeletonize(thick: BinaryGrid, cfg: EalmConfig, chains=None) -> BinaryGrid:
    chains = chains or standard_chains()
    skel = thin_to_skeleton(thick, chains.thinning, cfg.max_passes)
    return prune(remove_staircases(skel, cfg.max_passes), cfg.spur_length)


def skeleton_path(skel: BinaryGrid, thick: BinaryGrid, raw: BinaryGrid) -> NarrowPath:
    """Delegates from the skeleton; columns the skeleton lost fall back to the raw data.

    Confidence is ``exp(-(w/2)^2)`` with ``w`` the thickened width of the
    column in rows.
    """
    mean, _ = column_moments(skel.cells.astype(float))
    raw_mean, _ = column_moments(raw.cells.astype(float))
    if np.all(np.isnan(mean)):
        mean = raw_mean
    else:
        # keep data columns beyond the skeleton's reach
        cols = np.flatnonzero(~np.isnan(mean))
        outside = (np.arange(len(mean)) < cols[0]) | (np.arange(len(mean)) > cols[-1])
        mean = np.where(np.isnan(mean) & outside, raw_mean, mean)
    width = thick.cells.sum(axis=0).astype(float)
    conf = np.where(np.isnan(mean), np.nan, np.exp(-(width / 2.0) ** 2))
    return NarrowPath(skel.spec, mean, conf)


@dataclass
class PlaneStages:
    raw: BinaryGrid
    thick: BinaryGrid
    skeleton: BinaryGrid


class _EalmBuilder:
    def __init__(self, ds: Dataset, cfg: EalmConfig, spec: Optional[Dict] = None, dump=None):
        self.ds = ds
        self.cfg = cfg
        self.chains = standard_chains()
        self.y_range = padded_range(ds.y) if spec is None else tuple(spec["y_range"])
        self.x_ranges = spec.get("x_ranges") if spec else None
        # error threshold is relative to the spread of the whole output
        self.y_scale = float(np.std(ds.y)) or 1.0
        self.tree = GrownTree()
        self.dump = dump

    def spec(self, X, y, i, root=False) -> GridSpec:
        r = self.cfg.resolution
        if root and self.x_ranges is not None:
            return GridSpec(r, r, self.x_ranges[i], self.y_range)
        if root:
            return GridSpec(r, r, padded_range(X[:, i]), self.y_range)
        return GridSpec(r, r, padded_range(X[:, i]), padded_range(y))

    def stages(self, X, y, i, root=False) -> PlaneStages:
        raw = quantize(Dataset(X, y), InputOutput(i), self.spec(X, y, i, root))
        thick = prepare_plane(raw, self.cfg, self.chains)
        return PlaneStages(raw, thick, skeletonize(thick, self.cfg, self.chains))

    def grow(self, X, y, antecedent, depth, node):
        n_in = X.shape[1]
        stages = [self.stages(X, y, i, root=(node == "")) for i in range(n_in)]
        if self.dump is not None:
            self.dump(node, stages)
        models = [PathModel(i, skeleton_path(s.skeleton, s.thick, s.raw)) for i, s in enumerate(stages)]
        truths = [max(plane_truth(s.raw), 1e-300) for s in stages]
        # held-out error: a path through every sample would otherwise always look exact
        errors = [math.sqrt(loco_sse(X[:, i], y, s.raw.spec) / len(y)) / self.y_scale
                  for i, s in enumerate(stages)]
        best = int(np.argmin(errors))
        thr = self.cfg.error_threshold
        single = [bool(np.all(branch_counts(s.skeleton) <= 1)) for s in stages]

        if all(single) or errors[best] < thr:
            # every plane a function: one rule each; else the accurate functions
            keep = range(n_in) if all(single) else \
                sorted({i for i in range(n_in) if single[i] and errors[i] < thr} | {best})
            for i in keep:
                self.tree.leaf(depth, Rule(antecedent, models[i], truths[i]))
            return
        fallback = Rule(antecedent, models[best], truths[best], True)
        split = None
        if depth < self.cfg.max_depth and len(y) >= 2 * self.cfg.min_samples:
            split = self.choose_split(X, y, stages, node)
        if split is None:
            return self.tree.leaf(depth, fallback)
        ysplit, in_small, in_big, small, big = split
        self.tree.split(depth, ysplit, fallback)
        self.grow(X[in_small], y[in_small], conjoin(antecedent, small), depth + 1, node + "0")
        self.grow(X[in_big], y[in_big], conjoin(antecedent, big), depth + 1, node + "1")

    def honest_sse(self, X, y) -> Tuple[float, int]:
        """Best held-out squared error over the inputs, and that input."""
        best = (math.inf, 0)
        for i in range(X.shape[1]):
            lo, hi = padded_range(X[:, i])
            best = min(best, (loco_sse(X[:, i], y, GridSpec(self.cfg.resolution, 2, (lo, hi), (0.0, 1.0))), i))
        return best

    def choose_split(self, X, y, stages, node):
        """Among rows that nearly all columns straddle, the y0 whose halves fit best."""
        raws = [s.raw for s in stages]
        scores = [y0_scores(g) for g in raws]
        top = max(int(sc.max()) for sc in scores)
        if top <= 0:
            return None
        floor = max(1, math.ceil(self.cfg.straddle_ratio * top))
        limit = len(y) - max(1, len(y) // 16)
        best = None
        for p, sc in enumerate(scores):
            centre = raws[p].spec.height / 2.0
            for y0 in np.flatnonzero(sc >= floor):
                found = Y0(int(y0), p, int(sc[y0]))
                ysplit, small, big = self.y_split(X, y, stages, found, node)
                if ysplit.separator is None:
                    # no input-input plane to separate area III: route by the y side
                    in_small = raws[p].spec.row_of(y) <= y0
                    in_big = ~in_small
                else:
                    in_small = small.degree(X) > 0
                    in_big = big.degree(X) > 0
                ns, nb = int(in_small.sum()), int(in_big.sum())
                # each side must shed a real share of the region
                if ns > limit or nb > limit or min(ns, nb) < self.cfg.min_samples:
                    continue
                err = self.honest_sse(X[in_small], y[in_small])[0] + self.honest_sse(X[in_big], y[in_big])[0]
                key = (err, -found.score, abs(y0 - centre), p, int(y0))
                if best is None or key < best[0]:
                    best = (key, (ysplit, in_small, in_big, small, big))
        return None if best is None else best[1]

    def y_split(self, X, y, stages, found: "Y0", node):
        s = found.plane
        spec_s = stages[s].raw.spec
        # regions come from the thickened plane, which marks sparse straddling
        # columns that the raw samples miss
        labels = column_labels(stages[s].thick, found.y0)
        filled = _fill_empty(labels)

        # the separator learns only from samples whose columns straddle y0 in the data
        cols = spec_s.col_of(X[:, s])
        rows = spec_s.row_of(y)
        in_iii = _fill_empty(column_labels(stages[s].raw, found.y0))[cols] == 3
        c1 = in_iii & (rows > found.y0)
        c2 = in_iii & (rows <= found.y0)

        sep = None
        if X.shape[1] > 1 and c1.any() and c2.any():
            for j in range(X.shape[1]):
                if j == s:
                    continue
                try:
                    cand = fit_separator(X[c1][:, [s, j]], X[c2][:, [s, j]], s, j)
                except ValueError:
                    continue
                if sep is None or cand.misclassification < sep.misclassification:
                    sep = cand

        area = lambda *ks: _column_intervals(spec_s, s, np.isin(filled, ks))
        if sep is not None:
            small = Union(area(1) + (sep.half(-1),))
            big = Union(area(2) + (sep.half(+1),))
        else:
            small = Union(area(1, 3))
            big = Union(area(2, 3))
        areas = tuple(tuple(np.flatnonzero(labels == k).tolist()) for k in (1, 2, 3))
        ysplit = YSplit(found.y0, float(spec_s.y_at(found.y0)), s, sep, areas, node, found.score)
        return ysplit, small, big


def loco_sse(x: np.ndarray, y: np.ndarray, spec: GridSpec) -> float:
    """Leave-one-column-out squared error of a per-column mean path.

    Samples are binned into the columns of ``spec``; each sample is predicted
    by interpolating the (mean x, mean y) points of the neighbouring occupied
    columns, so its own column never informs its prediction.  A lone column
    falls back to its own mean.
    """
    cols = spec.col_of(x)
    n = np.bincount(cols, minlength=spec.width)
    occ = np.flatnonzero(n)
    mx = np.bincount(cols, weights=x, minlength=spec.width)[occ] / n[occ]
    my = np.bincount(cols, weights=y, minlength=spec.width)[occ] / n[occ]
    if occ.size == 1:
        return float(np.sum((y - my[0]) ** 2))
    k = np.searchsorted(occ, cols)
    left = np.clip(k - 1, 0, occ.size - 1)
    right = np.clip(k + 1, 0, occ.size - 1)
    has_l, has_r = k > 0, k < occ.size - 1
    lx, ly, rx, ry = mx[left], my[left], mx[right], my[right]
    with np.errstate(invalid="ignore", divide="ignore"):
        frac = np.clip((x - lx) / (rx - lx), 0.0, 1.0)
    both = ly + frac * (ry - ly)
    pred = np.where(has_l & has_r, both, np.where(has_l, ly, ry))
    return float(np.sum((y - pred) ** 2))


def _fill_empty(labels: np.ndarray) -> np.ndarray:
    """Give empty columns the label of the nearest data column (left wins ties)."""
    data = np.flatnonzero(labels > 0)
    if data.size == 0:
        return labels
    idx = np.arange(len(labels))
    pos = np.searchsorted(data, idx)
    left = data[np.clip(pos - 1, 0, len(data) - 1)]
    right = data[np.clip(pos, 0, len(data) - 1)]
    nearest = np.where(np.abs(idx - left) <= np.abs(right - idx), left, right)
    return np.where(labels > 0, labels, labels[nearest])


def _column_intervals(spec: GridSpec, i: int, mask: np.ndarray) -> tuple:
    """Intervals on input ``i`` covering the selected columns; edge runs are unbounded."""
    lo, hi = spec.x_range
    step = (hi - lo) / spec.width
    out = []
    for start, stop in column_runs(mask):
        a = -math.inf if start == 0 else lo + start * step
        b = math.inf if stop == spec.width else lo + stop * step
        out.append(Interval(i, a, b))
    return tuple(out)


def ealm_fit(ds: Dataset, cfg: EalmConfig = EalmConfig(), *, grid: Optional[Dict] = None,
             dump=None, cut: str = "best") -> RuleBase:
    """Fit an extended ALM rule base.

    Each (x_i, y) plane is bridged, thickened, thinned to a skeleton and
    pruned; the skeleton gives the candidate path for the plane.  A plane
    is accepted when its leave-one-column-out RMSE, divided by the standard
    deviation of the whole output, is below ``cfg.error_threshold``.
    Otherwise the region is split at a row y0 that nearly all columns
    straddle (the one whose halves fit best), the straddling samples are
    separated by a least-squares line in an input-input plane, and the
    resulting Small/Big regions are fitted recursively up to
    ``cfg.max_depth``.  A region whose skeletons are all single-valued is
    never split.  The tree is finally cut at the depth with the lowest
    training MSE, unless ``cut="full"``.

    ``grid`` may fix the root plane ranges (``{"x_ranges": [...],
    "y_range": (lo, hi)}``); ``dump(node, stages)`` is called with every
    node's plane stages.
    """
    if len(ds) < 2:
        raise ValueError("empty dataset: at least 2 rows are needed")
    b = _EalmBuilder(ds, cfg, grid, dump)
    b.grow(ds.X, ds.y, EntireDomain(0), 0, "")
    domain = tuple(padded_range(ds.X[:, i]) for i in range(ds.n_inputs))
    build = lambda rules, splits, d: RuleBase(rules, EALM, domain, tuple(b.y_range), d, splits, cfg.to_dict())
    return b.tree.cut(build, ds.X, ds.y, cut)
