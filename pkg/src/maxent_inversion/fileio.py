"""Readers and writers for the file formats the command line works with.

* numeric CSV (no quoting, no header), written with 17 significant digits
  so doubles survive a round trip exactly;
* IDX3 image archives (the MNIST layout), uncompressed;
* binary 8-bit PGM (``P5``);
* JSON run reports.
"""

from dataclasses import dataclass
import json
import math
import os
import struct
import tempfile

import numpy as np

from .errors import FormatError, ParseError, ShapeError, TruncatedFile

__all__ = [
    "ImageBatch",
    "read_matrix_csv",
    "read_vector_csv",
    "write_matrix_csv",
    "write_vector_csv",
    "read_kinds_csv",
    "read_idx_images",
    "write_idx_images",
    "write_pgm",
    "read_pgm",
    "to_bytes",
    "nudge_interior",
    "make_report",
    "write_report",
]

IDX3_MAGIC = 0x00000803


def _atomic_write(path, data):
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        umask = os.umask(0)
        os.umask(umask)
        os.chmod(tmp, 0o666 & ~umask)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _parse_rows(path):
    rows = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            row = []
            for col, cell in enumerate(line.split(","), start=1):
                try:
                    row.append(float(cell))
                except ValueError:
                    raise ParseError(
                        f"{path}: row {lineno}, column {col}: not a number: {cell.strip()!r}",
                        row=lineno,
                        column=col,
                    ) from None
            rows.append((lineno, row))
    return rows


def read_matrix_csv(path):
    rows = _parse_rows(path)
    if not rows:
        raise ShapeError(f"{path}: no data")
    width = len(rows[0][1])
    for lineno, row in rows:
        if len(row) != width:
            raise ShapeError(f"{path}: row {lineno} has {len(row)} values, expected {width}")
    return np.array([r for _, r in rows], dtype=float)


def read_vector_csv(path):
    """Read a vector stored as one row or as one column."""
    mat = read_matrix_csv(path)
    if mat.shape[0] != 1 and mat.shape[1] != 1:
        raise ShapeError(f"{path}: expected a single row or column, got {mat.shape[0]}x{mat.shape[1]}")
    return mat.ravel()


def _fmt(v):
    return format(float(v), ".17g")


def write_matrix_csv(path, matrix):
    mat = np.atleast_2d(np.asarray(matrix, dtype=float))
    text = "".join(",".join(_fmt(v) for v in row) + "\n" for row in mat)
    _atomic_write(path, text.encode("utf-8"))


def write_vector_csv(path, vector):
    """Write one value per line."""
    vec = np.asarray(vector, dtype=float).ravel()
    _atomic_write(path, "".join(_fmt(v) + "\n" for v in vec).encode("utf-8"))


def read_kinds_csv(path):
    """Prior kind names, comma- or newline-separated."""
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    return [tok.strip() for tok in text.replace("\n", ",").split(",") if tok.strip()]


@dataclass(frozen=True, eq=False)
class ImageBatch:
    """Images as rows of a ``(count, side * side)`` array with values in [0, 1]."""

    pixels: np.ndarray
    side: int

    @property
    def count(self):
        return self.pixels.shape[0]


def read_idx_images(path, limit=None):
    """Read up to ``limit`` images from an uncompressed IDX3 archive."""
    with open(path, "rb") as fh:
        header = fh.read(16)
        if len(header) < 16:
            raise TruncatedFile(f"{path}: header is {len(header)} bytes, expected 16")
        magic, count, rows, cols = struct.unpack(">IIII", header)
        if magic != IDX3_MAGIC:
            raise FormatError(f"{path}: magic 0x{magic:08x} is not an IDX3 image archive (0x{IDX3_MAGIC:08x})")
        if rows != cols:
            raise FormatError(f"{path}: images are {rows}x{cols}, only square images are supported")
        take = count if limit is None else min(int(limit), count)
        nbytes = take * rows * cols
        data = fh.read(nbytes)
    if len(data) < nbytes:
        raise TruncatedFile(f"{path}: expected {nbytes} pixel bytes, found {len(data)}")
    raw = np.frombuffer(data, dtype=np.uint8).reshape(take, rows * cols)
    return ImageBatch(pixels=raw.astype(float) / 255.0, side=rows)


def write_idx_images(path, images):
    """Write a ``(count, side, side)`` uint8 array as an IDX3 archive."""
    arr = np.asarray(images)
    if arr.ndim != 3 or arr.dtype != np.uint8:
        raise ShapeError("expected a (count, rows, cols) uint8 array")
    header = struct.pack(">IIII", IDX3_MAGIC, *arr.shape)
    _atomic_write(path, header + arr.tobytes())


def to_bytes(image, clamp=True):
    """Map values in [0, 1] to bytes with ``round(255 v)``, halves away from zero.

    Returns ``(bytes_array, clipped_count)``.  Without ``clamp`` any value
    outside [0, 1] is an error.
    """
    v = np.asarray(image, dtype=float).ravel()
    outside = (v < 0.0) | (v > 1.0) | ~np.isfinite(v)
    if outside.any() and not clamp:
        raise ValueError(f"{int(outside.sum())} pixel values lie outside [0, 1]")
    v = np.clip(np.nan_to_num(v, nan=0.0), 0.0, 1.0)
    return np.floor(255.0 * v + 0.5).astype(np.uint8), int(outside.sum())


def write_pgm(path, image, side, clamp=True):
    """Write a binary 8-bit PGM; returns the number of clipped pixels."""
    v = np.asarray(image, dtype=float).ravel()
    if v.size != side * side:
        raise ShapeError(f"image has {v.size} values, expected {side}x{side}")
    data, clipped = to_bytes(v, clamp=clamp)
    _atomic_write(path, f"P5\n{side} {side}\n255\n".encode("ascii") + data.tobytes())
    return clipped


def read_pgm(path):
    """Read a binary PGM with maxval 255; returns a ``(rows, cols)`` uint8 array."""
    with open(path, "rb") as fh:
        data = fh.read()
    tokens = []
    pos = 0
    while len(tokens) < 4:
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if data[pos : pos + 1] == b"#":
            while pos < len(data) and data[pos : pos + 1] != b"\n":
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        if start == pos:
            raise TruncatedFile(f"{path}: incomplete PGM header")
        tokens.append(data[start:pos])
    if tokens[0] != b"P5":
        raise FormatError(f"{path}: not a binary PGM")
    cols, rows, maxval = (int(t) for t in tokens[1:])
    if maxval != 255:
        raise FormatError(f"{path}: maxval {maxval} not supported")
    body = data[pos + 1 : pos + 1 + rows * cols]
    if len(body) < rows * cols:
        raise TruncatedFile(f"{path}: pixel data truncated")
    return np.frombuffer(body, dtype=np.uint8).reshape(rows, cols)


def nudge_interior(x, lo=0.0, hi=1.0, eps=1e-6):
    """Move values on or beyond ``[lo, hi]`` inside by ``eps``; returns ``(x, count)``."""
    x = np.asarray(x, dtype=float)
    moved = (x <= lo + eps) | (x >= hi - eps)
    return np.clip(x, lo + eps, hi - eps), int(moved.sum())


def _clean(value):
    if isinstance(value, dict):
        return {str(k): _clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_clean(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_clean(v) for v in value.tolist()]
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


def make_report(command, parameters, residual_inf, iterations, entropy=None, timings_ms=None, **extra):
    """Build a run report with the standard key order.

    ``entropy`` is an ``EntropyReport`` (or ``None`` when the reconstruction
    is not strictly positive).  Additional keys follow ``entropy``.
    """
    report = {
        "command": command,
        "parameters": parameters,
        "residual_inf": residual_inf,
        "iterations": iterations,
        "entropy": None
        if entropy is None
        else {"h_ds": entropy.h_ds, "h_s": entropy.h_s, "h_e": entropy.h_e},
    }
    report.update(extra)
    report["timings_ms"] = timings_ms or {}
    return _clean(report)


def write_report(path, report):
    text = json.dumps(report, indent=2, allow_nan=False) + "\n"
    _atomic_write(path, text.encode("utf-8"))
