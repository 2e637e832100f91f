"""Command-line front end: ``ealm train|eval|bench|export-plane|structure-report``."""

from __future__ import annotations

import argparse
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import bench
from .alm import AlmConfig, alm_fit
from .extended import EalmConfig, ealm_fit, prepare_plane, skeletonize
from .generators import GENERATORS, generate
from .grid import Dataset, GridSpec, InputOutput, padded_range, quantize
from .ids import IdsParams, cog_path, ids
from .io import DataError, read_dataset, write_path_csv, write_pgm
from .rules import RuleBase, model_error

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_FIT = 0, 1, 2, 3
OUT_ENV = "EALM_OUT_DIR"
DEFAULT_OUT = "ealm-out"


class UsageError(Exception):
    pass


class FitError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _positive(v):
    n = int(v)
    if n < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {v}")
    return n


def _nonneg(v):
    n = int(v)
    if n < 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {v}")
    return n


def _add_model_flags(p):
    g = p.add_argument_group("model parameters")
    g.add_argument("--grid-size", type=_positive, default=64, help="cells per plane axis (default 64)")
    g.add_argument("--ids-radius", type=_positive, default=2, help="ALM ink drop radius in cells (default 2)")
    g.add_argument("--ids-mode", choices=("additive", "supremum"), default="additive",
                   help="how overlapping ink drops combine (default additive)")
    g.add_argument("--thicken-passes", type=_positive, default=3, help="EALM thickening passes (default 3)")
    g.add_argument("--spur-length", type=_nonneg, default=3, help="EALM skeleton pruning length (default 3)")
    g.add_argument("--truth-threshold", type=float, default=0.8, help="ALM Truth needed for a rule (default 0.8)")
    g.add_argument("--error-threshold", type=float, default=0.05,
                   help="EALM relative error at which a region stops splitting (default 0.05)")
    g.add_argument("--max-depth", type=_nonneg, default=6, help="maximum split depth (default 6)")


def _configs(a):
    try:
        alm = AlmConfig(a.grid_size, IdsParams(a.ids_radius, a.ids_mode), a.truth_threshold, a.max_depth)
        ealm = EalmConfig(resolution=a.grid_size, thicken_passes=a.thicken_passes, spur_length=a.spur_length,
                          error_threshold=a.error_threshold, max_depth=a.max_depth)
    except ValueError as e:
        raise UsageError(str(e)) from None
    return alm, ealm


def _out_dir(a) -> Path:
    if getattr(a, "out_dir", None):
        return Path(a.out_dir)
    return Path(os.environ.get(OUT_ENV) or DEFAULT_OUT)


def _input_index(a, ds: Dataset) -> int:
    if not 1 <= a.input <= ds.n_inputs:
        raise UsageError(f"--input must be between 1 and {ds.n_inputs}")
    return a.input - 1


def _fmt_corr(c):
    return "undefined" if math.isnan(c) else f"{c:.6f}"


# -- commands -----------------------------------------------------------------

def cmd_train(a) -> int:
    alm_cfg, ealm_cfg = _configs(a)
    ds = _train_data(a)
    dump = None
    out = _out_dir(a)
    if a.dump_planes:
        dump_dir = out / "planes"
        dump_dir.mkdir(parents=True, exist_ok=True)
        dump = _dumper(a.method, dump_dir)
    try:
        if a.method == "alm":
            rb = alm_fit(ds, alm_cfg, dump=dump)
        else:
            rb = ealm_fit(ds, ealm_cfg, dump=dump)
    except (ValueError, ArithmeticError) as e:
        raise FitError(str(e)) from None
    model = Path(a.model) if a.model else out / "model.json"
    model.parent.mkdir(parents=True, exist_ok=True)
    rb.save(model)
    mse, corr = model_error(rb, ds.X, ds.y)
    print(f"method: {rb.method}")
    print(f"rules: {len(rb.rules)}")
    print(f"depth: {rb.depth}")
    print(f"train mse: {mse!r}")
    print(f"train corr: {_fmt_corr(corr)}")
    print(f"model: {model}")
    if a.verbose:
        print(rb.describe())
    return EXIT_OK


def _train_data(a) -> Dataset:
    if a.data:
        return read_dataset(a.data)
    try:
        return generate(a.generator, a.n, 1, a.seed)[0]
    except ValueError as e:
        raise UsageError(str(e)) from None


def _dumper(method, dump_dir: Path):
    """Callback writing every node's intermediate planes as PGM.

    Names: ``node-<path>_x<i>_<stage>.pgm`` with ``<path>`` the 0/1 split
    path from the root (``root`` for the root itself).
    """
    def tag(node):
        return "root" if node == "" else node

    if method == "alm":
        def dump(node, i, raw, ink, path):
            base = dump_dir / f"node-{tag(node)}_x{i + 1}"
            write_pgm(raw, f"{base}_raw.pgm")
            write_pgm(ink, f"{base}_ids.pgm")
            write_pgm(path.as_grid(), f"{base}_cog.pgm")
    else:
        def dump(node, stages):
            for i, s in enumerate(stages):
                base = dump_dir / f"node-{tag(node)}_x{i + 1}"
                write_pgm(s.raw, f"{base}_raw.pgm")
                write_pgm(s.thick, f"{base}_thick.pgm")
                write_pgm(s.skeleton, f"{base}_skeleton.pgm")
    return dump


def cmd_eval(a) -> int:
    try:
        rb = RuleBase.load(a.model)
    except OSError as e:
        raise DataError(f"cannot read {a.model}: {e.strerror}") from None
    except (ValueError, KeyError, TypeError) as e:
        raise DataError(f"{a.model}: not a rule base ({e})") from None
    ds = read_dataset(a.data)
    if ds.n_inputs != rb.n_inputs:
        raise DataError(f"model expects {rb.n_inputs} inputs, {a.data} has {ds.n_inputs}")
    pred = rb.predict(ds.X)
    mse = float(np.mean((pred - ds.y) ** 2))
    _, corr = model_error(rb, ds.X, ds.y)
    print(f"mse: {mse!r}")
    print(f"corr: {_fmt_corr(corr)}")
    if a.predictions:
        lines = ["y,prediction"] + [f"{float(t)!r},{float(p)!r}" for t, p in zip(ds.y, pred)]
        Path(a.predictions).write_text("\n".join(lines) + "\n")
    return EXIT_OK


def cmd_bench(a) -> int:
    alm_cfg, ealm_cfg = _configs(a)
    try:
        train, test = generate(a.generator, a.train, a.test, a.seed)
    except ValueError as e:
        raise UsageError(str(e)) from None
    rows = bench.run_benchmark(a.generator, a.train, a.test, a.seed, a.methods, alm_cfg, ealm_cfg,
                               timing=a.timing, data=(train, test))
    out = _out_dir(a) / bench.run_dir_name(a.generator, a.seed)
    bench.write_bench_outputs(out, rows, train, alm_cfg, ealm_cfg)
    sys.stdout.write(bench.report_table(rows))
    print(f"outputs: {out}")
    return EXIT_FIT if any(r.failed for r in rows) else EXIT_OK


def cmd_export_plane(a) -> int:
    alm_cfg, ealm_cfg = _configs(a)
    if a.data:
        ds = read_dataset(a.data)
    else:
        ds, _ = generate(a.generator, a.n, 1, a.seed)
    i = _input_index(a, ds)
    spec = GridSpec(a.grid_size, a.grid_size, padded_range(ds.X[:, i]), padded_range(ds.y))
    raw = quantize(ds, InputOutput(i), spec)
    path = None
    if a.stage == "raw":
        plane = raw
    elif a.stage in ("ids", "cog"):
        ink = ids(raw, alm_cfg.ids)
        path = cog_path(ink)
        plane = ink if a.stage == "ids" else path.as_grid()
    else:
        thick = prepare_plane(raw, ealm_cfg)
        plane = thick if a.stage == "thick" else skeletonize(thick, ealm_cfg)
        if a.stage == "skeleton":
            from .extended import skeleton_path
            path = skeleton_path(plane, thick, raw)
    out = Path(a.out) if a.out else _out_dir(a) / f"x{i + 1}_{a.stage}.pgm"
    out.parent.mkdir(parents=True, exist_ok=True)
    write_pgm(plane, out, comment=f"x{i + 1} {a.stage}")
    print(f"plane: {out}")
    if a.path_csv:
        if path is None:
            raise UsageError("--path-csv needs --stage cog or skeleton")
        write_path_csv(path, a.path_csv)
        print(f"path: {a.path_csv}")
    return EXIT_OK


def cmd_structure_report(a) -> int:
    _, ealm_cfg = _configs(a)
    rep = bench.structure_report(a.generator, a.n, a.seed, a.grid_size, ids_params=IdsParams(a.ids_radius, a.ids_mode),
                                 ealm_cfg=ealm_cfg)
    out = _out_dir(a) / f"structure-{a.generator}-seed{a.seed}"
    bench.write_structure_outputs(out, rep)
    print(f"interior columns: {rep.interior.size}")
    print(f"skeleton two-branch fraction: {rep.two_branch_fraction:.3f}")
    print(f"COG one delegate per column: {'yes' if rep.cog_single else 'no'}")
    print(f"outputs: {out}")
    return EXIT_OK


# -- parser -------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="ealm", description="Fuzzy rule extraction with ALM and extended ALM.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    out_help = f"output directory (default: ${OUT_ENV} or ./{DEFAULT_OUT})"

    t = sub.add_parser("train", help="fit a rule base on a CSV dataset")
    tsrc = t.add_mutually_exclusive_group(required=True)
    tsrc.add_argument("data", nargs="?", help="CSV with columns x1..xn,y")
    tsrc.add_argument("--generator", help=f"generate data instead: one of {', '.join(GENERATORS)}")
    t.add_argument("--n", type=_positive, default=450, help="samples to generate (default 450)")
    t.add_argument("--seed", type=int, default=42, help="random seed (default 42)")
    t.add_argument("--method", choices=("alm", "ealm"), default="ealm")
    t.add_argument("--model", help="rule base JSON to write (default: <out-dir>/model.json)")
    t.add_argument("--out-dir", help=out_help)
    t.add_argument("--dump-planes", action="store_true",
                   help="write every intermediate plane as PGM under <out-dir>/planes")
    t.add_argument("--verbose", "-v", action="store_true", help="print the rules")
    _add_model_flags(t)
    t.set_defaults(func=cmd_train)

    e = sub.add_parser("eval", help="score a saved rule base on a CSV dataset")
    e.add_argument("model", help="rule base JSON")
    e.add_argument("data", help="CSV with columns x1..xn,y")
    e.add_argument("--predictions", help="write y,prediction per row to this CSV")
    e.set_defaults(func=cmd_eval)

    b = sub.add_parser("bench", help="fit both methods on a generated benchmark")
    b.add_argument("--generator", default="sinc2d", help=f"one of {', '.join(GENERATORS)}")
    b.add_argument("--train", type=_positive, default=450, help="training samples (default 450)")
    b.add_argument("--test", type=_positive, default=1000, help="test samples (default 1000)")
    b.add_argument("--seed", type=int, default=42, help="random seed (default 42)")
    b.add_argument("--methods", nargs="+", choices=("alm", "ealm"), default=["alm", "ealm"])
    b.add_argument("--timing", action="store_true",
                   help="record fit wall time in fit_ms (makes the report non-reproducible)")
    b.add_argument("--out-dir", help=out_help)
    _add_model_flags(b)
    b.set_defaults(func=cmd_bench)

    x = sub.add_parser("export-plane", help="write one (x_i, y) plane stage as PGM")
    src = x.add_mutually_exclusive_group(required=True)
    src.add_argument("--data", help="CSV dataset")
    src.add_argument("--generator", help=f"generate data instead: one of {', '.join(GENERATORS)}")
    x.add_argument("--n", type=_positive, default=450, help="samples to generate (default 450)")
    x.add_argument("--seed", type=int, default=42, help="random seed (default 42)")
    x.add_argument("--input", type=int, default=1, help="1-based input index i of the (x_i, y) plane")
    x.add_argument("--stage", choices=("raw", "ids", "cog", "thick", "skeleton"), default="raw")
    x.add_argument("--out", help="PGM file (default: <out-dir>/x<i>_<stage>.pgm)")
    x.add_argument("--path-csv", help="also write the cog or skeleton path as CSV")
    x.add_argument("--out-dir", help=out_help)
    _add_model_flags(x)
    x.set_defaults(func=cmd_export_plane)

    s = sub.add_parser("structure-report", help="COG path versus skeleton on ring data")
    s.add_argument("--generator", choices=("circle", "sin-circle"), default="circle")
    s.add_argument("--n", type=_positive, default=450, help="samples (default 450)")
    s.add_argument("--seed", type=int, default=42, help="random seed (default 42)")
    s.add_argument("--out-dir", help=out_help)
    _add_model_flags(s)
    s.set_defaults(func=cmd_structure_report)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    a = parser.parse_args(argv)
    try:
        return a.func(a)
    except UsageError as e:
        print(f"ealm: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as e:
        print(f"ealm: data error: {e}", file=sys.stderr)
        return EXIT_DATA
    except FitError as e:
        print(f"ealm: fit failed: {e}", file=sys.stderr)
        return EXIT_FIT


if __name__ == "__main__":
    sys.exit(main())
