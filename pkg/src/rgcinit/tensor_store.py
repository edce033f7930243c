"""On-disk formats: FMAT feature matrices, LVEC label vectors, CSV features and
text model documents.

All binary layouts are little-endian::

    FMAT  magic(4) version:u16=1 dtype:u8 (1=f32, 2=f64) reserved:u8=0
          rows:u64 cols:u64 payload[rows*cols] row-major
    LVEC  magic(4) version:u16=1 reserved:u16=0 count:u64 num_classes:u64
          labels:u32[count]

Readers and writers are pure functions; writing the same path from two
threads at once is the caller's problem.
"""
from __future__ import annotations

import csv
import json
import math
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from .errors import FormatError, LengthError, ShapeError, ValidationError

FMAT_MAGIC = b"FMAT"
LVEC_MAGIC = b"LVEC"
FORMAT_VERSION = 1
MODEL_FORMAT_VERSION = 1

_FMAT_HEADER = struct.Struct("<4sHBBQQ")
_LVEC_HEADER = struct.Struct("<4sHHQQ")
_DTYPE_CODES = {1: np.dtype("<f4"), 2: np.dtype("<f8")}
_CODE_FOR = {np.dtype("float32"): 1, np.dtype("float64"): 2}


@dataclass
class LabelVector:
    labels: np.ndarray
    num_classes: int

    def __post_init__(self):
        self.labels = np.asarray(self.labels, dtype=np.int64).ravel()
        self.num_classes = int(self.num_classes)
        if self.labels.size and (self.labels.min() < 0 or self.labels.max() >= self.num_classes):
            bad = int(np.flatnonzero((self.labels < 0) | (self.labels >= self.num_classes))[0])
            raise ValidationError(
                f"label {int(self.labels[bad])} at index {bad} outside [0, {self.num_classes})"
            )

    def __len__(self) -> int:
        return self.labels.size


@dataclass
class LinearClassifier:
    """Softmax head: scores are ``x @ weights.T + bias``."""

    weights: np.ndarray
    bias: np.ndarray
    metadata: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        self.weights = np.array(self.weights, dtype=np.float64, ndmin=2)
        self.bias = np.asarray(self.bias, dtype=np.float64).ravel()
        if self.weights.ndim != 2:
            raise ShapeError(f"weights must be K x d, got shape {self.weights.shape}")
        if self.bias.shape != (self.weights.shape[0],):
            raise ShapeError(
                f"bias length {self.bias.size} does not match {self.weights.shape[0]} classes"
            )
        if not (np.all(np.isfinite(self.weights)) and np.all(np.isfinite(self.bias))):
            raise ValidationError("classifier has non-finite parameters")

    @property
    def num_classes(self) -> int:
        return self.weights.shape[0]

    @property
    def dim(self) -> int:
        return self.weights.shape[1]

    def scores(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if x.ndim != 2 or x.shape[1] != self.dim:
            raise ShapeError(f"features have shape {x.shape}, model expects {self.dim} columns")
        return x @ self.weights.T + self.bias


def _check_finite(data: np.ndarray) -> None:
    bad = ~np.isfinite(data.ravel())
    if bad.any():
        idx = int(np.flatnonzero(bad)[0])
        raise ValidationError(f"non-finite element at flat index {idx}")


def write_features(m, path, dtype=None) -> None:
    """Write a 2-D array as FMAT. ``dtype`` defaults to the array's own (f32/f64)."""
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] < 1 or m.shape[1] < 1:
        raise ShapeError(f"feature matrix must be N x d with N, d >= 1, got {m.shape}")
    dt = np.dtype(dtype) if dtype is not None else m.dtype
    if dt not in _CODE_FOR:
        dt = np.dtype("float64")
    data = np.ascontiguousarray(m, dtype=dt.newbyteorder("<"))
    _check_finite(data)
    header = _FMAT_HEADER.pack(FMAT_MAGIC, FORMAT_VERSION, _CODE_FOR[dt], 0, *m.shape)
    try:
        with open(path, "wb") as fh:
            fh.write(header)
            fh.write(data.tobytes())
    except OSError as exc:
        raise OSError(f"cannot write features to {path}: {exc}") from exc


def read_features(path, *, keep_dtype: bool = False) -> np.ndarray:
    """Read an FMAT file. binary32 payloads are upcast to float64 unless ``keep_dtype``."""
    raw = Path(path).read_bytes()
    if len(raw) < _FMAT_HEADER.size:
        raise LengthError(f"{path}: truncated header ({len(raw)} bytes)")
    magic, version, code, reserved, rows, cols = _FMAT_HEADER.unpack_from(raw)
    if magic != FMAT_MAGIC:
        raise FormatError(f"{path}: bad magic {magic!r}")
    if version != FORMAT_VERSION:
        raise FormatError(f"{path}: unsupported version {version}")
    if code not in _DTYPE_CODES:
        raise FormatError(f"{path}: unknown dtype code {code}")
    if reserved != 0:
        raise FormatError(f"{path}: reserved byte is {reserved}, expected 0")
    if rows < 1 or cols < 1:
        raise FormatError(f"{path}: empty matrix {rows} x {cols}")
    dt = _DTYPE_CODES[code]
    payload = len(raw) - _FMAT_HEADER.size
    expected = rows * cols * dt.itemsize
    if payload != expected:
        raise LengthError(
            f"{path}: payload is {payload} bytes, header declares {rows} x {cols} ({expected} bytes)"
        )
    data = np.frombuffer(raw, dtype=dt, offset=_FMAT_HEADER.size).reshape(rows, cols)
    _check_finite(data)
    if keep_dtype:
        return data.astype(dt.newbyteorder("="))
    return data.astype(np.float64)


def write_labels(y: LabelVector, path) -> None:
    if len(y) < 1:
        raise ValidationError("label vector is empty")
    if y.num_classes < 2:
        raise ValidationError(f"num_classes must be >= 2, got {y.num_classes}")
    if y.num_classes > 2**32:
        raise ValidationError("num_classes does not fit uint32 labels")
    header = _LVEC_HEADER.pack(LVEC_MAGIC, FORMAT_VERSION, 0, len(y), y.num_classes)
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(y.labels.astype("<u4").tobytes())


def read_labels(path) -> LabelVector:
    raw = Path(path).read_bytes()
    if len(raw) < _LVEC_HEADER.size:
        raise LengthError(f"{path}: truncated header ({len(raw)} bytes)")
    magic, version, reserved, count, num_classes = _LVEC_HEADER.unpack_from(raw)
    if magic != LVEC_MAGIC:
        raise FormatError(f"{path}: bad magic {magic!r}")
    if version != FORMAT_VERSION:
        raise FormatError(f"{path}: unsupported version {version}")
    if reserved != 0:
        raise FormatError(f"{path}: reserved field is {reserved}, expected 0")
    if count < 1:
        raise ValidationError(f"{path}: label vector is empty")
    if num_classes < 2:
        raise ValidationError(f"{path}: num_classes must be >= 2, got {num_classes}")
    payload = len(raw) - _LVEC_HEADER.size
    if payload != 4 * count:
        raise LengthError(f"{path}: payload is {payload} bytes, header declares {count} labels")
    labels = np.frombuffer(raw, dtype="<u4", offset=_LVEC_HEADER.size).astype(np.int64)
    return LabelVector(labels, num_classes)


def read_csv_features(path, has_header: bool = False) -> np.ndarray:
    rows: list[list[float]] = []
    width = None
    with open(path, newline="") as fh:
        for lineno, record in enumerate(csv.reader(fh), start=1):
            if has_header and lineno == 1:
                continue
            if not record or all(not cell.strip() for cell in record):
                continue
            if width is None:
                width = len(record)
            elif len(record) != width:
                raise FormatError(
                    f"{path}: line {lineno} has {len(record)} columns, expected {width}"
                )
            values = []
            for col, cell in enumerate(record, start=1):
                try:
                    values.append(float(cell))
                except ValueError:
                    raise FormatError(
                        f"{path}: non-numeric cell {cell!r} at line {lineno}, column {col}"
                    ) from None
            rows.append(values)
    if not rows:
        raise FormatError(f"{path}: no data rows")
    data = np.array(rows, dtype=np.float64)
    _check_finite(data)
    return data


# -- structured text documents ------------------------------------------------
#
# Models, reports and truth sidecars share one JSON layout. Floats are written
# with 17 significant digits so binary64 values survive the round-trip.


def _encode(obj, indent: int, level: int) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if isinstance(obj, (bool, np.bool_)) or obj is None:
        return json.dumps(bool(obj) if obj is not None else None)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        value = float(obj)
        if not math.isfinite(value):
            raise ValidationError("cannot serialize non-finite number")
        text = format(value, ".17g")
        if "e" not in text and "." not in text and "n" not in text:
            text += ".0"
        return text
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_encode(v, indent, level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(not isinstance(v, (list, tuple, dict, np.ndarray)) for v in obj):
            return "[" + ", ".join(_encode(v, indent, level + 1) for v in obj) + "]"
        items = [pad + _encode(v, indent, level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps_document(doc: dict) -> str:
    return _encode(doc, 2, 0) + "\n"


def write_document(doc: dict, path) -> None:
    Path(path).write_text(dumps_document(doc))


def read_document(path) -> dict:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: not a valid document ({exc})") from exc
    if not isinstance(doc, dict):
        raise FormatError(f"{path}: top level must be a mapping")
    return doc


def model_to_document(c: LinearClassifier) -> dict:
    meta = dict(c.metadata)
    meta.setdefault("source", "trained")
    meta.setdefault("calibration", None)
    return {
        "format_version": MODEL_FORMAT_VERSION,
        "num_classes": c.num_classes,
        "dim": c.dim,
        "weights": c.weights,
        "bias": c.bias,
        "metadata": meta,
    }


def model_from_document(doc: dict, origin="<document>") -> LinearClassifier:
    try:
        version = doc["format_version"]
        k = doc["num_classes"]
        d = doc["dim"]
        weights = doc["weights"]
        bias = doc["bias"]
    except KeyError as exc:
        raise FormatError(f"{origin}: missing field {exc.args[0]!r}") from None
    if version != MODEL_FORMAT_VERSION:
        raise FormatError(f"{origin}: unsupported model format_version {version}")
    if not isinstance(weights, list) or len(weights) != k:
        raise ValidationError(f"{origin}: expected {k} weight rows")
    for i, row in enumerate(weights):
        if not isinstance(row, list) or len(row) != d:
            raise ValidationError(f"{origin}: weight row {i} does not have dim={d} entries")
    if not isinstance(bias, list) or len(bias) != k:
        raise ValidationError(f"{origin}: expected {k} bias entries")
    try:
        w = np.array(weights, dtype=np.float64).reshape(k, d)
        b = np.array(bias, dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"{origin}: non-numeric parameters ({exc})") from None
    meta = dict(doc.get("metadata") or {})
    meta.setdefault("calibration", None)
    return LinearClassifier(w, b, meta)


def write_model(c: LinearClassifier, path) -> None:
    write_document(model_to_document(c), path)


def read_model(path) -> LinearClassifier:
    return model_from_document(read_document(path), origin=path)
