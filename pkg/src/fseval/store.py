"""Embedding dataset loading/saving.

Binary format "FSE1": magic ``FSE1``, then little-endian u32 n, u32 d, u32 c,
u8 kind (0 = fused, 1 = tokens). Fused payload: n*d f32 row-major features,
then n u32 labels. Tokens payload: u32 p, then per sample
[cls: d f32][patches: p*d f32][attn: p f32], then n u32 labels.

Features are stored as 32-bit floats and held internally as 64-bit.
"""

from __future__ import annotations

import csv
import struct
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    BadMagic,
    EmptyClass,
    IoFailure,
    LabelOutOfRange,
    NonFiniteValue,
    ParseError,
    RaggedRow,
    TruncatedFile,
    VersionMismatch,
)

MAGIC = b"FSE1"
KIND_FUSED = 0
KIND_TOKENS = 1


def _class_index(labels: np.ndarray, c: int) -> list[np.ndarray]:
    return [np.flatnonzero(labels == j) for j in range(c)]


@dataclass
class EmbeddingSet:
    """Labeled feature matrix with a per-class row index."""

    features: np.ndarray  # (n, d) float64
    labels: np.ndarray  # (n,) int64
    c: int
    class_index: list[np.ndarray] = field(default_factory=list)

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def d(self) -> int:
        return self.features.shape[1]

    def __post_init__(self):
        self.features = np.ascontiguousarray(self.features, dtype=np.float64)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.labels.shape != (self.features.shape[0],):
            raise LabelOutOfRange("label array length does not match sample count")
        if not np.isfinite(self.features).all():
            raise NonFiniteValue("feature matrix contains NaN or Inf")
        if self.labels.size and (self.labels.min() < 0 or self.labels.max() >= self.c):
            raise LabelOutOfRange(
                f"labels must lie in [0, {self.c}); found "
                f"[{self.labels.min()}, {self.labels.max()}]"
            )
        if not self.class_index:
            self.class_index = _class_index(self.labels, self.c)
        for j, idx in enumerate(self.class_index):
            if len(idx) == 0:
                raise EmptyClass(f"class {j} has no samples")

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, EmbeddingSet)
            and self.c == other.c
            and np.array_equal(self.features, other.features)
            and np.array_equal(self.labels, other.labels)
        )


@dataclass
class TokenEmbeddingSet:
    """Per-sample cls token, patch tokens, and attention weights."""

    cls_tokens: np.ndarray  # (n, d) float64
    patch_tokens: np.ndarray  # (n, p, d) float64
    attn_weights: np.ndarray  # (n, p) float64
    labels: np.ndarray  # (n,) int64
    c: int
    class_index: list[np.ndarray] = field(default_factory=list)

    @property
    def n(self) -> int:
        return self.cls_tokens.shape[0]

    @property
    def d(self) -> int:
        return self.cls_tokens.shape[1]

    @property
    def p(self) -> int:
        return self.patch_tokens.shape[1]

    def __post_init__(self):
        self.cls_tokens = np.ascontiguousarray(self.cls_tokens, dtype=np.float64)
        self.patch_tokens = np.ascontiguousarray(self.patch_tokens, dtype=np.float64)
        self.attn_weights = np.ascontiguousarray(self.attn_weights, dtype=np.float64)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        n, d = self.cls_tokens.shape
        p = self.patch_tokens.shape[1]
        if self.patch_tokens.shape != (n, p, d) or self.attn_weights.shape != (n, p):
            raise RaggedRow("token arrays have inconsistent shapes")
        for arr, name in (
            (self.cls_tokens, "cls"),
            (self.patch_tokens, "patch"),
            (self.attn_weights, "attn"),
        ):
            if not np.isfinite(arr).all():
                raise NonFiniteValue(f"{name} tokens contain NaN or Inf")
        if (self.attn_weights < 0).any():
            raise NonFiniteValue("attention weights must be nonnegative")
        if (self.attn_weights.sum(axis=1) == 0).any():
            raise NonFiniteValue("a sample has all-zero attention weights")
        if self.labels.size and (self.labels.min() < 0 or self.labels.max() >= self.c):
            raise LabelOutOfRange(f"labels must lie in [0, {self.c})")
        if not self.class_index:
            self.class_index = _class_index(self.labels, self.c)
        for j, idx in enumerate(self.class_index):
            if len(idx) == 0:
                raise EmptyClass(f"class {j} has no samples")

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, TokenEmbeddingSet)
            and self.c == other.c
            and np.array_equal(self.cls_tokens, other.cls_tokens)
            and np.array_equal(self.patch_tokens, other.patch_tokens)
            and np.array_equal(self.attn_weights, other.attn_weights)
            and np.array_equal(self.labels, other.labels)
        )


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, count: int) -> bytes:
        if self.pos + count > len(self.data):
            raise TruncatedFile(
                f"expected {count} more bytes at offset {self.pos}, "
                f"file has {len(self.data)}"
            )
        out = self.data[self.pos : self.pos + count]
        self.pos += count
        return out

    def u32(self) -> int:
        return struct.unpack("<I", self.take(4))[0]

    def u8(self) -> int:
        return self.take(1)[0]

    def f32_array(self, count: int) -> np.ndarray:
        raw = self.take(4 * count)
        return np.frombuffer(raw, dtype="<f4", count=count).astype(np.float64)

    def u32_array(self, count: int) -> np.ndarray:
        raw = self.take(4 * count)
        return np.frombuffer(raw, dtype="<u4", count=count).astype(np.int64)


def load(path) -> EmbeddingSet | TokenEmbeddingSet:
    """Parse an FSE1 file into an embedding set, validating all invariants."""
    try:
        with open(path, "rb") as fh:
            data = fh.read()
    except OSError as exc:
        raise IoFailure(str(exc)) from exc
    r = _Reader(data)
    magic = r.take(4)
    if magic != MAGIC:
        if magic[:3] == MAGIC[:3]:
            raise VersionMismatch(f"unsupported format version {magic!r}")
        raise BadMagic(f"bad magic {magic!r}, expected {MAGIC!r}")
    n, d, c = r.u32(), r.u32(), r.u32()
    kind = r.u8()
    if kind == KIND_FUSED:
        features = r.f32_array(n * d).reshape(n, d)
        labels = r.u32_array(n)
        out = EmbeddingSet(features=features, labels=labels, c=c)
    elif kind == KIND_TOKENS:
        p = r.u32()
        cls = np.empty((n, d))
        patches = np.empty((n, p, d))
        attn = np.empty((n, p))
        for i in range(n):
            cls[i] = r.f32_array(d)
            patches[i] = r.f32_array(p * d).reshape(p, d)
            attn[i] = r.f32_array(p)
        labels = r.u32_array(n)
        out = TokenEmbeddingSet(
            cls_tokens=cls, patch_tokens=patches, attn_weights=attn,
            labels=labels, c=c,
        )
    else:
        raise ParseError(f"unknown kind byte {kind}")
    if r.pos != len(data):
        raise ParseError(f"{len(data) - r.pos} trailing bytes after payload")
    return out


def save(es: EmbeddingSet | TokenEmbeddingSet, path) -> None:
    """Write an FSE1 file; load(save(x)) == x bit-exactly for f32 features."""
    parts = [MAGIC]
    if isinstance(es, EmbeddingSet):
        parts.append(struct.pack("<IIIB", es.n, es.d, es.c, KIND_FUSED))
        parts.append(es.features.astype("<f4").tobytes())
    elif isinstance(es, TokenEmbeddingSet):
        parts.append(struct.pack("<IIIB", es.n, es.d, es.c, KIND_TOKENS))
        parts.append(struct.pack("<I", es.p))
        for i in range(es.n):
            parts.append(es.cls_tokens[i].astype("<f4").tobytes())
            parts.append(es.patch_tokens[i].astype("<f4").tobytes())
            parts.append(es.attn_weights[i].astype("<f4").tobytes())
    else:
        raise TypeError(f"cannot save object of type {type(es)!r}")
    parts.append(es.labels.astype("<u4").tobytes())
    try:
        with open(path, "wb") as fh:
            fh.write(b"".join(parts))
    except OSError as exc:
        raise IoFailure(str(exc)) from exc


def load_csv(path) -> EmbeddingSet:
    """CSV fallback with header ``label,f0,...,f{d-1}``."""
    try:
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise IoFailure(str(exc)) from exc
    if not rows:
        raise ParseError("empty CSV file")
    header = rows[0]
    if len(header) < 2 or header[0] != "label":
        raise ParseError(f"bad header {header!r}; expected label,f0,...")
    d = len(header) - 1
    for j in range(d):
        if header[j + 1] != f"f{j}":
            raise ParseError(f"bad header column {header[j + 1]!r}, expected f{j}")
    body = [row for row in rows[1:] if row]
    features = np.empty((len(body), d))
    labels = np.empty(len(body), dtype=np.int64)
    for i, row in enumerate(body):
        if len(row) != d + 1:
            raise RaggedRow(f"row {i + 1} has {len(row)} fields, expected {d + 1}")
        try:
            labels[i] = int(row[0])
            features[i] = [float(v) for v in row[1:]]
        except ValueError as exc:
            raise ParseError(f"row {i + 1}: {exc}") from exc
    if labels.size and labels.min() < 0:
        raise LabelOutOfRange("negative label in CSV")
    c = int(labels.max()) + 1 if labels.size else 0
    return EmbeddingSet(features=features, labels=labels, c=c)
