"""Plain-text file formats and binary PGM export.

All numeric text uses 17 significant digits, which round-trips IEEE doubles
bit-exactly, so parse(serialize(x)) == x for every format here.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .data import Dataset
from .errors import DimensionMismatchError, FormatError
from .evaluation import EvalReport
from .filters import FilterKind, FilterParams
from .objective import DescentTrace
from .reconstruction import ReconstructionModel

FORMAT_VERSION = "1"
MATRIX_MAGIC = "DDF-MAT"
LABELS_MAGIC = "DDF-LBL"
FILTER_MAGIC = "DDF-FLT"
RECON_MAGIC = "DDF-RCN"

TRACE_HEADER = "eval,R,JstarA,JstarB,gradnorm,step"
REPORT_HEADER = "leg,two_afc_a,two_afc_b,j_star_a,j_star_b,notes"
SWEEP_HEADER = "gamma,recon_error,j_star_a,j_star_b"


def _fmt(v: float) -> str:
    return format(float(v), ".17g")


def _header(line: str, magic: str, n_fields: int) -> list[str]:
    parts = line.split()
    if len(parts) != 2 + n_fields or parts[0] != magic or parts[1] != FORMAT_VERSION:
        raise FormatError(f"expected '{magic} {FORMAT_VERSION}' header, got {line!r}")
    return parts[2:]


def write_matrix(path, m: np.ndarray) -> None:
    m = np.atleast_2d(np.asarray(m, dtype=np.float64))
    rows, cols = m.shape
    lines = [f"{MATRIX_MAGIC} {FORMAT_VERSION} {rows} {cols}"]
    for r in range(rows):
        lines.append(" ".join(_fmt(v) for v in m[r]))
    Path(path).write_text("\n".join(lines) + "\n")


def _parse_matrix(lines: list[str], path) -> np.ndarray:
    fields = _header(lines[0], MATRIX_MAGIC, 2)
    try:
        rows, cols = int(fields[0]), int(fields[1])
    except ValueError as exc:
        raise FormatError(f"{path}: bad matrix dimensions {fields}") from exc
    body = lines[1:]
    if len(body) != rows:
        raise FormatError(f"{path}: expected {rows} rows, found {len(body)}")
    m = np.empty((rows, cols))
    for r, line in enumerate(body):
        vals = line.split()
        if len(vals) != cols:
            raise FormatError(f"{path}: row {r} has {len(vals)} values, expected {cols}")
        try:
            m[r] = [float(v) for v in vals]
        except ValueError as exc:
            raise FormatError(f"{path}: row {r} has a non-numeric value") from exc
    return m


def read_matrix(path) -> np.ndarray:
    lines = Path(path).read_text().splitlines()
    if not lines:
        raise FormatError(f"{path}: empty file")
    return _parse_matrix(lines, path)


def write_labels(path, labels_a, labels_b) -> None:
    labels_a = np.asarray(labels_a)
    labels_b = np.asarray(labels_b)
    if labels_a.shape != labels_b.shape or labels_a.ndim != 1:
        raise DimensionMismatchError("label vectors must be 1-D and equal length")
    n = labels_a.shape[0]
    lines = [f"{LABELS_MAGIC} {FORMAT_VERSION} {n}"]
    lines += [f"{int(a)} {int(b)}" for a, b in zip(labels_a, labels_b)]
    Path(path).write_text("\n".join(lines) + "\n")


def read_labels(path) -> tuple[np.ndarray, np.ndarray]:
    lines = Path(path).read_text().splitlines()
    if not lines:
        raise FormatError(f"{path}: empty file")
    (n_str,) = _header(lines[0], LABELS_MAGIC, 1)
    n = int(n_str)
    body = lines[1:]
    if len(body) != n:
        raise FormatError(f"{path}: expected {n} label rows, found {len(body)}")
    ya = np.empty(n, dtype=np.int64)
    yb = np.empty(n, dtype=np.int64)
    for i, line in enumerate(body):
        vals = line.split()
        if len(vals) != 2 or any(v not in ("0", "1") for v in vals):
            raise FormatError(f"{path}: label row {i} must be two 0/1 values")
        ya[i], yb[i] = int(vals[0]), int(vals[1])
    return ya, yb


def write_filter(path, fp: FilterParams) -> None:
    lines = [f"{FILTER_MAGIC} {FORMAT_VERSION} {fp.kind.value} {fp.size}"]
    lines += [_fmt(v) for v in fp.theta]
    Path(path).write_text("\n".join(lines) + "\n")


def read_filter(path) -> FilterParams:
    lines = Path(path).read_text().splitlines()
    if not lines:
        raise FormatError(f"{path}: empty file")
    kind_str, size_str = _header(lines[0], FILTER_MAGIC, 2)
    try:
        kind = FilterKind(kind_str)
    except ValueError as exc:
        raise FormatError(f"{path}: unknown filter kind {kind_str!r}") from exc
    size = int(size_str)
    try:
        theta = np.array([float(v) for v in lines[1:]])
    except ValueError as exc:
        raise FormatError(f"{path}: non-numeric parameter value") from exc
    expected = size if kind is FilterKind.MASK else size * size
    if theta.shape[0] != expected:
        raise FormatError(
            f"{path}: {kind.value} filter of size {size} needs {expected} "
            f"parameters, found {theta.shape[0]}"
        )
    return FilterParams(kind, size, theta)


def write_recon_model(path, model: ReconstructionModel) -> None:
    d = model.dim
    lines = [f"{RECON_MAGIC} {FORMAT_VERSION} {_fmt(model.gamma)}",
             f"{MATRIX_MAGIC} {FORMAT_VERSION} {d} {d + 1}"]
    for r in range(d):
        lines.append(" ".join(_fmt(v) for v in model.map_p[r]))
    Path(path).write_text("\n".join(lines) + "\n")


def read_recon_model(path) -> ReconstructionModel:
    lines = Path(path).read_text().splitlines()
    if len(lines) < 2:
        raise FormatError(f"{path}: truncated model file")
    (gamma_str,) = _header(lines[0], RECON_MAGIC, 1)
    p = _parse_matrix(lines[1:], path)
    return ReconstructionModel(p, float(gamma_str))


def write_dataset(directory, ds: Dataset) -> tuple[Path, Path]:
    """Write data.mat and labels.lbl into a directory; returns the two paths."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    data_path = directory / "data.mat"
    labels_path = directory / "labels.lbl"
    write_matrix(data_path, ds.samples)
    write_labels(labels_path, ds.labels_a, ds.labels_b)
    return data_path, labels_path


def read_dataset(data_path, labels_path) -> Dataset:
    samples = read_matrix(data_path)
    ya, yb = read_labels(labels_path)
    if ya.shape[0] != samples.shape[1]:
        raise FormatError(
            f"{labels_path}: {ya.shape[0]} labels for {samples.shape[1]} samples"
        )
    return Dataset.from_arrays(samples, ya, yb)


def write_trace_csv(path, trace: DescentTrace) -> None:
    lines = [TRACE_HEADER]
    for e in trace.entries:
        lines.append(",".join([
            str(e.eval_index), _fmt(e.r_value), _fmt(e.j_star_a),
            _fmt(e.j_star_b), _fmt(e.grad_norm), _fmt(e.step),
        ]))
    Path(path).write_text("\n".join(lines) + "\n")


def write_eval_reports_csv(path, reports: list[tuple[str, EvalReport]]) -> None:
    lines = [REPORT_HEADER]
    for leg, rep in reports:
        lines.append(",".join([
            leg, _fmt(rep.two_afc_a), _fmt(rep.two_afc_b),
            _fmt(rep.j_star_a), _fmt(rep.j_star_b), rep.notes,
        ]))
    Path(path).write_text("\n".join(lines) + "\n")


def export_pgm(column, side: int, path) -> None:
    """Write one sample as a binary PGM image (P5, maxval 255).

    The value range is rescaled affinely onto [0, 255]; a constant image maps
    to the mid gray 128.
    """
    v = np.asarray(column, dtype=np.float64).ravel()
    if v.shape[0] != side * side:
        raise DimensionMismatchError(
            f"column of length {v.shape[0]} is not a {side}x{side} image"
        )
    lo, hi = float(v.min()), float(v.max())
    if hi > lo:
        scaled = np.rint((v - lo) / (hi - lo) * 255.0)
    else:
        scaled = np.full(v.shape, 128.0)
    data = scaled.astype(np.uint8).tobytes()
    with open(path, "wb") as fh:
        fh.write(f"P5\n{side} {side}\n255\n".encode("ascii"))
        fh.write(data)
