"""Fuzzy rule bases: crisp membership functions, path consequents, inference."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from .grid import GridSpec
from .ids import NarrowPath

ALM = "ALM"
EALM = "EALM"

_TINY = np.finfo(float).tiny


def _as_2d(X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    return X.reshape(1, -1) if X.ndim == 1 else X


def _bound(v):
    return None if v is None or math.isinf(v) else float(v)


# -- membership functions ----------------------------------------------------

@dataclass(frozen=True)
class EntireDomain:
    """The whole range of an input (the "M" of a first-level rule)."""

    input: int

    def degree(self, X) -> np.ndarray:
        return np.ones(_as_2d(X).shape[0])

    def to_dict(self):
        return {"kind": "entire", "input": self.input}

    def describe(self, names):
        return f"{names[self.input]} is M"


@dataclass(frozen=True)
class Interval:
    """``lo <= x_i < hi``; either bound may be infinite."""

    input: int
    lo: float = -math.inf
    hi: float = math.inf

    def __post_init__(self):
        lo = -math.inf if self.lo is None else float(self.lo)
        hi = math.inf if self.hi is None else float(self.hi)
        if not lo < hi:
            raise ValueError("interval needs lo < hi")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    def degree(self, X) -> np.ndarray:
        x = _as_2d(X)[:, self.input]
        return ((x >= self.lo) & (x < self.hi)).astype(float)

    def to_dict(self):
        return {"kind": "interval", "input": self.input, "lo": _bound(self.lo), "hi": _bound(self.hi)}

    def describe(self, names):
        parts = []
        if not math.isinf(self.lo):
            parts.append(f"{self.lo:.4g} <= ")
        parts.append(names[self.input])
        if not math.isinf(self.hi):
            parts.append(f" < {self.hi:.4g}")
        return "".join(parts)


@dataclass(frozen=True)
class HalfPlane:
    """``sign * (a*x_i + b*x_j + c) > 0``; the positive side includes the line."""

    i: int
    j: int
    a: float
    b: float
    c: float
    sign: int = 1

    def __post_init__(self):
        if self.a == 0 and self.b == 0:
            raise ValueError("half-plane needs (a, b) != (0, 0)")
        if self.sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")

    def value(self, X) -> np.ndarray:
        X = _as_2d(X)
        return self.a * X[:, self.i] + self.b * X[:, self.j] + self.c

    def degree(self, X) -> np.ndarray:
        v = self.value(X)
        inside = v >= 0 if self.sign > 0 else v < 0
        return inside.astype(float)

    def to_dict(self):
        return {"kind": "halfplane", "i": self.i, "j": self.j, "a": self.a, "b": self.b,
                "c": self.c, "sign": self.sign}

    def describe(self, names):
        op = ">" if self.sign > 0 else "<"
        return f"({self.a:.4g}*{names[self.i]} + {self.b:.4g}*{names[self.j]} + {self.c:.4g} {op} 0)"


@dataclass(frozen=True)
class Union:
    parts: Tuple["MembershipFunction", ...]

    def __post_init__(self):
        object.__setattr__(self, "parts", tuple(self.parts))

    def degree(self, X) -> np.ndarray:
        X = _as_2d(X)
        out = np.zeros(X.shape[0])
        for p in self.parts:
            out = np.maximum(out, p.degree(X))
        return out

    def to_dict(self):
        return {"kind": "union", "parts": [p.to_dict() for p in self.parts]}

    def describe(self, names):
        if not self.parts:
            return "nothing"
        return "(" + " or ".join(p.describe(names) for p in self.parts) + ")"


@dataclass(frozen=True)
class Intersection:
    """Conjunction of antecedents, produced by nesting splits."""

    parts: Tuple["MembershipFunction", ...]

    def __post_init__(self):
        object.__setattr__(self, "parts", tuple(self.parts))

    def degree(self, X) -> np.ndarray:
        X = _as_2d(X)
        out = np.ones(X.shape[0])
        for p in self.parts:
            out = np.minimum(out, p.degree(X))
        return out

    def to_dict(self):
        return {"kind": "intersection", "parts": [p.to_dict() for p in self.parts]}

    def describe(self, names):
        return " and ".join(p.describe(names) for p in self.parts)


MembershipFunction = (EntireDomain, Interval, HalfPlane, Union, Intersection)


def conjoin(a, b):
    """``a and b`` with EntireDomain absorbed and nested conjunctions flattened."""
    if isinstance(a, EntireDomain):
        return b
    if isinstance(b, EntireDomain):
        return a
    parts = []
    for m in (a, b):
        parts.extend(m.parts if isinstance(m, Intersection) else (m,))
    return Intersection(tuple(parts))


def membership_from_dict(d: dict):
    kind = d["kind"]
    if kind == "entire":
        return EntireDomain(int(d["input"]))
    if kind == "interval":
        lo = -math.inf if d["lo"] is None else d["lo"]
        hi = math.inf if d["hi"] is None else d["hi"]
        return Interval(int(d["input"]), lo, hi)
    if kind == "halfplane":
        return HalfPlane(int(d["i"]), int(d["j"]), float(d["a"]), float(d["b"]), float(d["c"]), int(d["sign"]))
    if kind == "union":
        return Union(tuple(membership_from_dict(p) for p in d["parts"]))
    if kind == "intersection":
        return Intersection(tuple(membership_from_dict(p) for p in d["parts"]))
    raise ValueError(f"unknown membership kind {kind!r}")


# -- consequents ---------------------------------------------------------------

@dataclass(frozen=True)
class PathModel:
    """A single-input curve ``y = f(x_input)`` read off a narrow path."""

    input_index: int
    path: NarrowPath
    fill: str = "linear"

    def __post_init__(self):
        if self.path.delegate_count() == 0:
            raise ValueError("path model needs at least one delegate")
        if self.fill != "linear":
            raise ValueError(f"unknown fill rule {self.fill!r}")

    def rows(self, x) -> np.ndarray:
        """Fractional delegate row at input values ``x``."""
        spec = self.path.spec
        cols = np.flatnonzero(self.path.present)
        # np.interp extends with the end values, i.e. nearest-delegate extension
        return np.interp(spec.col_coord(x), cols.astype(float), self.path.delegate[cols])

    def __call__(self, x) -> np.ndarray:
        return self.path.spec.y_at(self.rows(x))


@dataclass(frozen=True)
class Rule:
    antecedent: object
    consequent: PathModel
    truth: float
    low_confidence: bool = False

    def __post_init__(self):
        if not 0 < self.truth <= 1:
            raise ValueError("rule truth must lie in (0, 1]")


class GrownTree:
    """Rules of a recursively grown tree, kept so it can be cut at any depth.

    A node that splits also records the rule it would have emitted as a
    leaf; cutting at depth ``d`` keeps the leaves above ``d`` and those
    fallback rules of the nodes at ``d``.  Growth never depends on the depth
    cap, so the tree cut at ``d`` equals the tree grown with cap ``d``.
    """

    def __init__(self):
        self.entries: List[Tuple[int, bool, Rule]] = []
        self.split_log: list = []

    def leaf(self, depth: int, rule: Rule) -> None:
        self.entries.append((depth, False, rule))

    def split(self, depth: int, split, fallback: Rule) -> None:
        self.entries.append((depth, True, fallback))
        self.split_log.append((depth, split))

    @property
    def depth(self) -> int:
        return max((d for d, _, _ in self.entries), default=0)

    def rules(self, d: int) -> List[Rule]:
        return [r for k, cut, r in self.entries if (k == d if cut else k <= d)]

    def splits(self, d: int) -> list:
        return [s for k, s in self.split_log if k < d]

    def cut(self, build: Callable[[List[Rule], list, int], "RuleBase"], X, y, how: str = "best") -> "RuleBase":
        """``"full"`` keeps the whole tree, ``"best"`` the cut with the lowest training MSE."""
        if how == "full":
            return build(self.rules(self.depth), self.splits(self.depth), self.depth)
        if how != "best":
            raise ValueError(f"unknown cut {how!r}")
        return self.best_cut(build, X, y)

    def best_cut(self, build: Callable[[List[Rule], list, int], "RuleBase"], X, y) -> "RuleBase":
        """The cut with the lowest training MSE (shallowest on ties)."""
        best = None
        for d in range(self.depth + 1):
            rb = build(self.rules(d), self.splits(d), d)
            mse = float(np.mean((predict(rb, X) - y) ** 2))
            if best is None or mse < best[0]:
                best = (mse, rb)
        return best[1]


# -- splits --------------------------------------------------------------------

@dataclass(frozen=True)
class LinearSeparator:
    """``a*x_i + b*x_j + c``; class 1 lies on the positive side."""

    i: int
    j: int
    a: float
    b: float
    c: float
    misclassification: float = 0.0

    def value(self, X) -> np.ndarray:
        X = _as_2d(X)
        return self.a * X[:, self.i] + self.b * X[:, self.j] + self.c

    def half(self, sign: int) -> HalfPlane:
        return HalfPlane(self.i, self.j, self.a, self.b, self.c, sign)

    def to_dict(self):
        return {"i": self.i, "j": self.j, "a": self.a, "b": self.b, "c": self.c,
                "misclassification": self.misclassification}


@dataclass(frozen=True)
class AxisSplit:
    input: int
    t: float
    node: str = ""
    plane: int = -1

    def to_dict(self):
        return {"kind": "axis", "node": self.node, "plane": self.plane, "input": self.input, "t": self.t}

    def describe(self, names):
        return f"node {self.node or 'root'}: split {names[self.input]} at {self.t:.4g}"


@dataclass(frozen=True)
class YSplit:
    """A split of the output axis at row ``y0`` of plane ``source_plane``."""

    y0: int
    y_value: float
    source_plane: int
    separator: Optional[LinearSeparator] = None
    area_columns: Tuple[Tuple[int, ...], Tuple[int, ...], Tuple[int, ...]] = ((), (), ())
    node: str = ""
    score: int = 0

    def to_dict(self):
        return {
            "kind": "y", "node": self.node, "y0": self.y0, "y_value": self.y_value,
            "source_plane": self.source_plane, "score": self.score,
            "separator": None if self.separator is None else self.separator.to_dict(),
            "areas": {"I": list(self.area_columns[0]), "II": list(self.area_columns[1]),
                      "III": list(self.area_columns[2])},
        }

    def describe(self, names):
        text = (f"node {self.node or 'root'}: y0 = row {self.y0} (y = {self.y_value:.4g}) of plane "
                f"({names[self.source_plane]}, y); areas I/II/III hold "
                f"{'/'.join(str(len(a)) for a in self.area_columns)} columns")
        if self.separator is not None:
            sep = self.separator
            text += (f"; separator {sep.a:.4g}*{names[sep.i]} + {sep.b:.4g}*{names[sep.j]} + {sep.c:.4g},"
                     f" misclassification {sep.misclassification:.3f}")
        return text


def split_from_dict(d: dict):
    if d["kind"] == "axis":
        return AxisSplit(int(d["input"]), float(d["t"]), d.get("node", ""), int(d.get("plane", -1)))
    sep = d.get("separator")
    if sep is not None:
        sep = LinearSeparator(int(sep["i"]), int(sep["j"]), float(sep["a"]), float(sep["b"]),
                              float(sep["c"]), float(sep["misclassification"]))
    areas = d.get("areas", {})
    return YSplit(int(d["y0"]), float(d["y_value"]), int(d["source_plane"]), sep,
                  (tuple(areas.get("I", ())), tuple(areas.get("II", ())), tuple(areas.get("III", ()))),
                  d.get("node", ""), int(d.get("score", 0)))


# -- rule base -----------------------------------------------------------------

@dataclass
class RuleBase:
    rules: List[Rule]
    method: str
    domain: Tuple[Tuple[float, float], ...]
    y_range: Tuple[float, float]
    depth: int = 0
    splits: list = field(default_factory=list)
    config: dict = field(default_factory=dict)

    @property
    def n_inputs(self) -> int:
        return len(self.domain)

    def clip(self, X) -> np.ndarray:
        X = _as_2d(X)
        if X.shape[1] != self.n_inputs:
            raise ValueError(f"expected {self.n_inputs} inputs, got {X.shape[1]}")
        lo = np.array([d[0] for d in self.domain])
        hi = np.array([d[1] for d in self.domain])
        return np.clip(X, lo, hi)

    def memberships(self, X) -> np.ndarray:
        X = self.clip(X)
        return np.array([r.antecedent.degree(X) for r in self.rules]).reshape(len(self.rules), -1)

    def predict(self, X) -> np.ndarray:
        return predict(self, X)

    def describe(self, names: Sequence[str] | None = None) -> str:
        if names is None:
            names = [f"x{i + 1}" for i in range(self.n_inputs)]
        lines = []
        for r in self.rules:
            flag = "  [low confidence]" if r.low_confidence else ""
            lines.append(f"If {r.antecedent.describe(names)} then y = f({names[r.consequent.input_index]});"
                         f" Truth = {r.truth:.4f}{flag}")
        lines.extend(s.describe(names) for s in self.splits)
        return "\n".join(lines)

    def to_dict(self) -> dict:
        rules = []
        for r in self.rules:
            p = r.consequent.path
            rules.append({
                "antecedent": r.antecedent.to_dict(),
                "truth": r.truth,
                "low_confidence": r.low_confidence,
                "input": r.consequent.input_index,
                "fill": r.consequent.fill,
                "spec": p.spec.to_dict(),
                "delegate": [None if np.isnan(v) else float(v) for v in p.delegate],
                "confidence": [None if np.isnan(v) else float(v) for v in p.confidence],
            })
        return {
            "format": "ealm-rulebase/1",
            "method": self.method,
            "n_inputs": self.n_inputs,
            "domain": [list(d) for d in self.domain],
            "y_range": list(self.y_range),
            "depth": self.depth,
            "config": self.config,
            "splits": [s.to_dict() for s in self.splits],
            "rules": rules,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RuleBase":
        rules = []
        for r in d["rules"]:
            spec = GridSpec.from_dict(r["spec"])
            nan = float("nan")
            path = NarrowPath(spec, [nan if v is None else v for v in r["delegate"]],
                              [nan if v is None else v for v in r["confidence"]])
            rules.append(Rule(membership_from_dict(r["antecedent"]),
                              PathModel(int(r["input"]), path, r.get("fill", "linear")),
                              float(r["truth"]), bool(r.get("low_confidence", False))))
        return cls(rules, d["method"], tuple(tuple(x) for x in d["domain"]), tuple(d["y_range"]),
                   int(d.get("depth", 0)), [split_from_dict(s) for s in d.get("splits", [])],
                   dict(d.get("config", {})))

    def save(self, path) -> None:
        with open(path, "w") as fh:
            # repr-exact floats keep predictions bit-identical after a reload
            json.dump(self.to_dict(), fh, indent=1)

    @classmethod
    def load(cls, path) -> "RuleBase":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


def predict(rb: RuleBase, X) -> np.ndarray:
    """Truth-weighted average of the active rules' path outputs."""
    X = rb.clip(X)
    num = np.zeros(X.shape[0])
    den = np.zeros(X.shape[0])
    for r in rb.rules:
        m = r.antecedent.degree(X)
        active = m > 0
        if not active.any():
            continue
        w = m[active] * max(r.truth, _TINY)
        num[active] += w * r.consequent(X[active, r.consequent.input_index])
        den[active] += w
    if np.any(den <= 0):
        bad = int(np.flatnonzero(den <= 0)[0])
        raise ValueError(f"uncovered query at {X[bad].tolist()}")
    return num / den


UNDEFINED = float("nan")


def pearson(a, b) -> float:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.size == 0 or np.all(a == a[0]) or np.all(b == b[0]):
        return UNDEFINED
    da = a - a.mean()
    db = b - b.mean()
    na = math.sqrt(float(da @ da))
    nb = math.sqrt(float(db @ db))
    return float(np.clip((da @ db) / (na * nb), -1.0, 1.0))


def model_error(rb: RuleBase, X, y) -> Tuple[float, float]:
    """(MSE, Pearson correlation); correlation is NaN when either side is constant."""
    y = np.asarray(y, dtype=float).reshape(-1)
    if y.size == 0:
        raise ValueError("empty dataset")
    yhat = predict(rb, X)
    return float(np.mean((yhat - y) ** 2)), pearson(yhat, y)
