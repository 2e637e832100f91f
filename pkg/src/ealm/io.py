"""File formats: dataset CSV, PGM (P2) planes, structuring-element text, path CSV."""

from __future__ import annotations

import csv
import io
import math
import os
from pathlib import Path
from typing import Union

import numpy as np

from .grid import BinaryGrid, DataPlane, Dataset, GridSpec
from .ids import NarrowPath
from .morphology import SEChain, StructuringElement

PathLike = Union[str, os.PathLike]


class DataError(ValueError):
    """Malformed input file; the message names the offending line."""


# -- dataset CSV --------------------------------------------------------------

def _parse_row(fields, lineno):
    try:
        return [float(f) for f in fields]
    except ValueError:
        raise DataError(f"line {lineno}: non-numeric field in {','.join(fields)!r}") from None


def parse_dataset(text: str, source: str = "<string>") -> Dataset:
    """Rows ``x1,...,xn,y``; a first line with any non-numeric field is a header."""
    rows = []
    width = None
    for lineno, fields in enumerate(csv.reader(io.StringIO(text)), start=1):
        fields = [f.strip() for f in fields]
        if not fields or all(f == "" for f in fields):
            continue
        if width is None and lineno == 1:
            try:
                [float(f) for f in fields]
            except ValueError:
                continue  # header
        values = _parse_row(fields, lineno)
        if width is None:
            width = len(values)
            if width < 2:
                raise DataError(f"{source}: line {lineno}: need at least one input and the output")
        elif len(values) != width:
            raise DataError(f"{source}: line {lineno}: expected {width} fields, found {len(values)}")
        if not all(math.isfinite(v) for v in values):
            raise DataError(f"{source}: line {lineno}: non-finite value")
        rows.append(values)
    if len(rows) < 2:
        raise DataError(f"{source}: empty dataset: at least 2 rows are needed, found {len(rows)}")
    a = np.array(rows)
    return Dataset(a[:, :-1], a[:, -1])


def read_dataset(path: PathLike) -> Dataset:
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise DataError(f"cannot read {path}: {e.strerror}") from None
    return parse_dataset(text, str(path))


def format_dataset(ds: Dataset) -> str:
    names = [f"x{i + 1}" for i in range(ds.n_inputs)] + ["y"]
    lines = [",".join(names)]
    for xs, y in zip(ds.X, ds.y):
        lines.append(",".join(repr(float(v)) for v in (*xs, y)))
    return "\n".join(lines) + "\n"


def write_dataset(ds: Dataset, path: PathLike) -> None:
    Path(path).write_text(format_dataset(ds))


# -- PGM ------------------------------------------------------------------------

def _to_gray(plane) -> np.ndarray:
    if isinstance(plane, BinaryGrid):
        return np.where(plane.cells, 255, 0)
    cells = np.asarray(plane.cells if isinstance(plane, DataPlane) else plane, dtype=float)
    if cells.dtype == bool:
        return np.where(cells, 255, 0)
    top = cells.max() if cells.size else 0.0
    if top <= 0:
        return np.zeros(cells.shape, dtype=int)
    return np.rint(cells / top * 255).astype(int)


def format_pgm(plane, comment: str | None = None) -> str:
    """P2 text with the plane's top row (maximum y) first.

    Binary grids map to 0/255; scalar planes are rescaled so their maximum
    is 255.
    """
    gray = _to_gray(plane)[::-1]
    h, w = gray.shape
    out = ["P2"]
    if comment:
        out.append(f"# {comment}")
    out.append(f"{w} {h}")
    out.append("255")
    for row in gray:
        out.append(" ".join(str(int(v)) for v in row))
    return "\n".join(out) + "\n"


def write_pgm(plane, path: PathLike, comment: str | None = None) -> None:
    Path(path).write_text(format_pgm(plane, comment))


def parse_pgm(text: str) -> np.ndarray:
    """Gray levels with row 0 = bottom of the plane (the storage convention)."""
    tokens = []
    for line in text.splitlines():
        line = line.split("#", 1)[0]
        tokens.extend(line.split())
    if not tokens or tokens[0] != "P2":
        raise DataError("not a P2 PGM file")
    try:
        w, h, maxval = int(tokens[1]), int(tokens[2]), int(tokens[3])
        values = [int(t) for t in tokens[4:]]
    except (IndexError, ValueError):
        raise DataError("malformed PGM header or pixel data") from None
    if w < 1 or h < 1 or maxval < 1:
        raise DataError("PGM dimensions must be positive")
    if len(values) != w * h:
        raise DataError(f"PGM expects {w * h} pixels, found {len(values)}")
    a = np.array(values).reshape(h, w)
    if a.min() < 0 or a.max() > maxval:
        raise DataError("PGM pixel outside [0, maxval]")
    return a[::-1].copy()


def read_pgm(path: PathLike) -> np.ndarray:
    return parse_pgm(Path(path).read_text())


def grid_from_pgm(path: PathLike, spec: GridSpec | None = None) -> BinaryGrid:
    """Binary grid of the non-zero pixels of a PGM file."""
    gray = read_pgm(path)
    h, w = gray.shape
    if spec is None:
        spec = GridSpec(w, h, (0.0, float(w)), (0.0, float(h)))
    elif spec.shape != gray.shape:
        raise DataError(f"PGM is {w}x{h}, grid spec is {spec.width}x{spec.height}")
    return BinaryGrid(spec, gray > 0)


# -- structuring elements -----------------------------------------------------------

def read_chain(path: PathLike) -> SEChain:
    """One element (rotated into a chain of 8) or eight elements, blank-line separated."""
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise DataError(f"cannot read {path}: {e.strerror}") from None
    try:
        return SEChain.parse(text)
    except ValueError as e:
        raise DataError(f"{path}: {e}") from None


def write_chain(chain: SEChain, path: PathLike) -> None:
    Path(path).write_text("\n\n".join(str(e) for e in chain.elements) + "\n")


def write_element(se: StructuringElement, path: PathLike) -> None:
    Path(path).write_text(str(se) + "\n")


# -- narrow paths ---------------------------------------------------------------------

def format_path_csv(path: NarrowPath) -> str:
    lines = ["column_index,delegate_row,confidence"]
    for c, (d, k) in enumerate(zip(path.delegate, path.confidence)):
        if np.isnan(d):
            lines.append(f"{c},,")
        else:
            lines.append(f"{c},{float(d)!r},{float(k)!r}")
    return "\n".join(lines) + "\n"


def write_path_csv(path: NarrowPath, dest: PathLike) -> None:
    Path(dest).write_text(format_path_csv(path))


def parse_path_csv(text: str, spec: GridSpec) -> NarrowPath:
    delegate = np.full(spec.width, np.nan)
    conf = np.full(spec.width, np.nan)
    seen = set()
    for lineno, fields in enumerate(csv.reader(io.StringIO(text)), start=1):
        if lineno == 1 and fields and fields[0].strip() == "column_index":
            continue
        if not fields:
            continue
        if len(fields) != 3:
            raise DataError(f"line {lineno}: expected 3 fields")
        try:
            c = int(fields[0])
        except ValueError:
            raise DataError(f"line {lineno}: bad column index {fields[0]!r}") from None
        if not 0 <= c < spec.width or c in seen:
            raise DataError(f"line {lineno}: column {c} out of range or repeated")
        seen.add(c)
        d, k = fields[1].strip(), fields[2].strip()
        if d == "" and k == "":
            continue
        try:
            delegate[c], conf[c] = float(d), float(k)
        except ValueError:
            raise DataError(f"line {lineno}: delegate and confidence must both be numbers or both empty") from None
    try:
        return NarrowPath(spec, delegate, conf)
    except ValueError as e:
        raise DataError(str(e)) from None


def read_path_csv(path: PathLike, spec: GridSpec) -> NarrowPath:
    return parse_path_csv(Path(path).read_text(), spec)
