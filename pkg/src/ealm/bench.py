"""Benchmark protocol, comparison tables, structure report and PGM dumps."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np

from .alm import AlmConfig, alm_fit
from .extended import EalmConfig, ealm_fit, prepare_plane, skeletonize
from .generators import generate, get_generator
from .grid import BinaryGrid, Dataset, GridSpec, InputOutput, branch_counts, quantize
from .ids import IdsParams, cog_path, ids
from .io import format_pgm, write_dataset
from .rules import model_error

METHODS = ("alm", "ealm")
REPORT_COLUMNS = ("generator", "method", "seed", "n_train", "n_test", "mse", "corr", "rule_count", "fit_ms")


@dataclass
class BenchRow:
    generator: str
    method: str
    seed: int
    n_train: int
    n_test: int
    mse: float = math.nan
    corr: float = math.nan
    rule_count: int = 0
    fit_ms: Optional[float] = None
    error: Optional[str] = None

    @property
    def failed(self) -> bool:
        return self.error is not None


def fit_method(method: str, train: Dataset, alm_cfg: AlmConfig, ealm_cfg: EalmConfig, **kw):
    if method == "alm":
        return alm_fit(train, alm_cfg, **kw)
    if method == "ealm":
        return ealm_fit(train, ealm_cfg, **kw)
    raise ValueError(f"unknown method {method!r}; choose from {', '.join(METHODS)}")


def run_benchmark(generator: str, n_train: int = 450, n_test: int = 1000, seed: int = 42,
                  methods: Sequence[str] = METHODS, alm_cfg: AlmConfig = AlmConfig(),
                  ealm_cfg: EalmConfig = EalmConfig(), timing: bool = True,
                  data: Optional[tuple] = None) -> List[BenchRow]:
    """Fit every method on the training sample and score it on the test sample.

    A method that fails to fit yields a row with ``error`` set; the others
    still run.  With ``timing=False`` the wall time is not recorded, which
    keeps reports byte-for-byte reproducible.
    """
    if n_train < 1 or n_test < 1:
        raise ValueError("n_train and n_test must be >= 1")
    train, test = data if data is not None else generate(generator, n_train, n_test, seed)
    rows = []
    for m in methods:
        row = BenchRow(generator, m, seed, n_train, n_test)
        t0 = time.perf_counter()
        try:
            rb = fit_method(m, train, alm_cfg, ealm_cfg)
            elapsed = (time.perf_counter() - t0) * 1000.0
            row.mse, row.corr = model_error(rb, test.X, test.y)
            row.rule_count = len(rb.rules)
            row.fit_ms = elapsed if timing else None
        except (ValueError, ArithmeticError) as e:
            row.error = str(e)
        rows.append(row)
    return rows


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return "" if math.isnan(v) else repr(v)
    return str(v)


def report_csv(rows: Sequence[BenchRow]) -> str:
    lines = [",".join(REPORT_COLUMNS)]
    for r in rows:
        vals = [r.generator, r.method, r.seed, r.n_train, r.n_test, r.mse, r.corr, r.rule_count,
                None if r.fit_ms is None else round(r.fit_ms, 3)]
        lines.append(",".join(_fmt(v) for v in vals))
    return "\n".join(lines) + "\n"


def report_table(rows: Sequence[BenchRow]) -> str:
    """Aligned text: one line per method with MSE and correlation."""
    head = ("Generator", "Method", "Seed", "MSE", "Corr", "Rules", "Fit ms")
    body = []
    for r in rows:
        if r.failed:
            body.append((r.generator, r.method.upper(), str(r.seed), "failed", r.error or "", "", ""))
            continue
        body.append((r.generator, r.method.upper(), str(r.seed), f"{r.mse:.6g}",
                     "undefined" if math.isnan(r.corr) else f"{r.corr:.4f}", str(r.rule_count),
                     "" if r.fit_ms is None else f"{r.fit_ms:.0f}"))
    widths = [max(len(x[k]) for x in (head, *body)) for k in range(len(head))]
    fmt = lambda cells: "  ".join(c.ljust(w) for c, w in zip(cells, widths)).rstrip()
    lines = [fmt(head), fmt(tuple("-" * w for w in widths))]
    lines.extend(fmt(b) for b in body)
    return "\n".join(lines) + "\n"


def run_dir_name(generator: str, seed: int) -> str:
    return f"bench-{generator}-seed{seed}"


def write_bench_outputs(out_dir, rows: Sequence[BenchRow], train: Dataset,
                        alm_cfg: AlmConfig = AlmConfig(), ealm_cfg: EalmConfig = EalmConfig()) -> Dict[str, Path]:
    """Report files and root-plane PGMs for one benchmark run.

    File names inside ``out_dir``:
      report.csv, report.txt, train.csv,
      alm_x{i}_raw.pgm, alm_x{i}_ids.pgm, alm_x{i}_cog.pgm,
      ealm_x{i}_raw.pgm, ealm_x{i}_thick.pgm, ealm_x{i}_skeleton.pgm
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = {}

    def put(name, text):
        p = out / name
        p.write_text(text)
        written[name] = p

    put("report.csv", report_csv(rows))
    put("report.txt", report_table(rows))
    write_dataset(train, out / "train.csv")
    written["train.csv"] = out / "train.csv"
    for name, grid in root_planes(train, alm_cfg, ealm_cfg).items():
        put(name, format_pgm(grid, comment=name[:-4]))
    return written


def root_planes(ds: Dataset, alm_cfg: AlmConfig = AlmConfig(), ealm_cfg: EalmConfig = EalmConfig()) -> Dict[str, object]:
    """The root-level intermediate planes of both pipelines, keyed by file name."""
    planes: Dict[str, object] = {}
    for i in range(ds.n_inputs):
        raw = quantize(ds, InputOutput(i), _root_spec(ds, i, alm_cfg.resolution))
        ink = ids(raw, alm_cfg.ids)
        planes[f"alm_x{i + 1}_raw.pgm"] = raw
        planes[f"alm_x{i + 1}_ids.pgm"] = ink
        planes[f"alm_x{i + 1}_cog.pgm"] = cog_path(ink).as_grid()
        eraw = quantize(ds, InputOutput(i), _root_spec(ds, i, ealm_cfg.resolution))
        thick = prepare_plane(eraw, ealm_cfg)
        planes[f"ealm_x{i + 1}_raw.pgm"] = eraw
        planes[f"ealm_x{i + 1}_thick.pgm"] = thick
        planes[f"ealm_x{i + 1}_skeleton.pgm"] = skeletonize(thick, ealm_cfg)
    return planes


def _root_spec(ds: Dataset, i: int, r: int) -> GridSpec:
    from .grid import padded_range
    return GridSpec(r, r, padded_range(ds.X[:, i]), padded_range(ds.y))


# -- structure preservation --------------------------------------------------------

@dataclass
class StructureReport:
    plane: BinaryGrid
    cog: BinaryGrid
    skeleton: BinaryGrid
    cog_branches: np.ndarray
    skeleton_branches: np.ndarray
    interior: np.ndarray  # column indices strictly between the tangent columns

    @property
    def two_branch_fraction(self) -> float:
        if self.interior.size == 0:
            return 0.0
        return float(np.mean(self.skeleton_branches[self.interior] == 2))

    @property
    def cog_single(self) -> bool:
        # ink spreads past the data, so columns without samples may carry a delegate too
        present = self.plane.cells.any(axis=0)
        return bool(np.all(self.cog_branches <= 1) and np.all(self.cog_branches[present] == 1))

    def summary(self) -> str:
        return "\n".join([
            f"interior columns: {self.interior.size}",
            f"skeleton two-branch fraction: {self.two_branch_fraction:.3f}",
            f"COG one delegate per column: {'yes' if self.cog_single else 'no'}",
            "column,cog_branches,skeleton_branches",
            *(f"{c},{a},{b}" for c, (a, b) in enumerate(zip(self.cog_branches, self.skeleton_branches))),
        ]) + "\n"


def circle_plane(ds: Dataset, input_index: int = 0, resolution: int = 64, radius_cells: float = 20.0) -> BinaryGrid:
    """The (x_i, y) plane scaled so a unit-extent ring has ``radius_cells`` cells radius."""
    cx = 0.5 * (ds.X[:, input_index].min() + ds.X[:, input_index].max())
    cy = 0.5 * (ds.y.min() + ds.y.max())
    r = 0.5 * max(np.ptp(ds.X[:, input_index]), np.ptp(ds.y)) or 1.0
    half = r * (resolution / 2.0) / radius_cells
    spec = GridSpec(resolution, resolution, (cx - half, cx + half), (cy - half, cy + half))
    return quantize(ds, InputOutput(input_index), spec)


def structure_report(generator: str = "circle", n: int = 450, seed: int = 42, resolution: int = 64,
                     radius_cells: float = 20.0, ids_params: IdsParams = IdsParams(),
                     ealm_cfg: EalmConfig = EalmConfig()) -> StructureReport:
    """COG path versus EALM skeleton on ring-shaped data."""
    if generator not in ("circle", "sin-circle"):
        raise ValueError("structure report needs the circle or sin-circle generator")
    ds, _ = generate(generator, n, 1, seed)
    # the ring lives in (x, y) for circle and in (x2, y) for sin-circle
    plane = circle_plane(ds, 0 if generator == "circle" else 1, resolution, radius_cells)
    cog = cog_path(ids(plane, ids_params)).as_grid()
    skeleton = skeletonize(prepare_plane(plane, ealm_cfg), ealm_cfg)
    cols = np.flatnonzero(plane.cells.any(axis=0))
    interior = np.arange(cols[0] + 1, cols[-1]) if cols.size > 2 else np.array([], dtype=int)
    return StructureReport(plane, cog, skeleton, branch_counts(cog), branch_counts(skeleton), interior)


def write_structure_outputs(out_dir, rep: StructureReport) -> Dict[str, Path]:
    """structure.txt plus plane.pgm, cog.pgm and skeleton.pgm."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    files = {"structure.txt": rep.summary(), "plane.pgm": format_pgm(rep.plane, "plane"),
             "cog.pgm": format_pgm(rep.cog, "cog"), "skeleton.pgm": format_pgm(rep.skeleton, "skeleton")}
    written = {}
    for name, text in files.items():
        (out / name).write_text(text)
        written[name] = out / name
    return written


# -- rotation diagnostic ----------------------------------------------------------

@dataclass
class RotationDiagnostic:
    angle_deg: float
    rules: Dict[str, tuple]  # method -> (plain, rotated)

    def factor(self, method: str) -> float:
        a, b = self.rules[method]
        return b / a


def rotate_inputs(ds: Dataset, angle_deg: float, i: int = 0, j: int = 1) -> Dataset:
    a = math.radians(angle_deg)
    X = ds.X.copy()
    xi, xj = ds.X[:, i], ds.X[:, j]
    X[:, i] = math.cos(a) * xi - math.sin(a) * xj
    X[:, j] = math.sin(a) * xi + math.cos(a) * xj
    return Dataset(X, ds.y)


def rotation_diagnostic(generator: str = "sin-plus-cos", n: int = 450, seed: int = 42, angle_deg: float = 30.0,
                        alm_cfg: AlmConfig = AlmConfig(), ealm_cfg: EalmConfig = EalmConfig()) -> RotationDiagnostic:
    """Rule counts of both methods before and after rotating the (x1, x2) plane."""
    if len(get_generator(generator).bounds) < 1:
        raise ValueError("generator has no inputs")
    ds, _ = generate(generator, n, 1, seed)
    if ds.n_inputs < 2:
        raise ValueError("rotation needs two inputs")
    rot = rotate_inputs(ds, angle_deg)
    rules = {}
    for m in METHODS:
        rules[m] = (len(fit_method(m, ds, alm_cfg, ealm_cfg).rules), len(fit_method(m, rot, alm_cfg, ealm_cfg).rules))
    return RotationDiagnostic(angle_deg, rules)
