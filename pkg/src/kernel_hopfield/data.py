"""Pattern generation, pattern/embedding file I/O, and binarization.

File conventions: patterns and embeddings are headerless UTF-8 CSV, one row
per pattern (integer -1/+1 fields for patterns, decimal floats for
embeddings), with a JSON sidecar `<name>.meta.json` carrying shape, seed,
and provenance.  Desk-scale sizes keep text formats practical and
inspectable.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import PatternSet


class EmbeddingParseError(ValueError):
    """Malformed embedding/pattern file; message names the offending line."""


@dataclass(frozen=True)
class EmbeddingSet:
    """P rows of D-dimensional real feature vectors plus source metadata."""

    data: np.ndarray  # (P, D) float64, all finite
    source: dict

    def __post_init__(self):
        data = np.asarray(self.data, dtype=np.float64)
        if data.ndim != 2 or data.shape[1] < 1:
            raise ValueError(f"embeddings must be a P x D matrix, got shape {data.shape}")
        if not np.all(np.isfinite(data)):
            raise ValueError("embedding entries must all be finite")
        object.__setattr__(self, "data", data)

    @property
    def p(self) -> int:
        return self.data.shape[0]

    @property
    def d(self) -> int:
        return self.data.shape[1]


def gen_random_patterns(n: int, p: int, seed) -> PatternSet:
    """P i.i.d. uniform bipolar patterns of dimension N from a seeded stream."""
    if n < 1 or p < 1:
        raise ValueError(f"need n >= 1 and p >= 1, got n={n}, p={p}")
    rng = np.random.default_rng(seed)
    data = rng.integers(0, 2, size=(p, n)).astype(np.float64) * 2.0 - 1.0
    return PatternSet(data=data)


def meta_path(path: str) -> str:
    base, _ext = os.path.splitext(path)
    return base + ".meta.json"


def _write_sidecar(path: str, meta: dict):
    with open(meta_path(path), "w", encoding="utf-8") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_sidecar(path: str) -> Optional[dict]:
    mp = meta_path(path)
    if not os.path.exists(mp):
        return None
    with open(mp, encoding="utf-8") as fh:
        return json.load(fh)


def save_patterns(patterns: PatternSet, path: str, extra_meta: Optional[dict] = None):
    """Write patterns as integer CSV rows plus a JSON sidecar."""
    with open(path, "w", encoding="utf-8") as fh:
        for row in patterns.data:
            fh.write(",".join(str(int(v)) for v in row))
            fh.write("\n")
    meta = {"kind": "patterns", "n": patterns.n, "p": patterns.p}
    if extra_meta:
        meta.update(extra_meta)
    _write_sidecar(path, meta)


def _parse_numeric_csv(path: str) -> np.ndarray:
    rows = []
    width = None
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            fields = line.split(",")
            if width is None:
                width = len(fields)
            elif len(fields) != width:
                raise EmbeddingParseError(
                    f"{path}: line {lineno}: expected {width} fields, found {len(fields)}"
                )
            try:
                row = [float(f) for f in fields]
            except ValueError as exc:
                raise EmbeddingParseError(f"{path}: line {lineno}: {exc}") from exc
            if not all(np.isfinite(row)):
                raise EmbeddingParseError(f"{path}: line {lineno}: non-finite value")
            rows.append(row)
    if not rows:
        raise EmbeddingParseError(f"{path}: no data rows")
    return np.asarray(rows, dtype=np.float64)


def load_embeddings(path: str) -> EmbeddingSet:
    """Load a headerless numeric CSV as an EmbeddingSet (sidecar optional)."""
    data = _parse_numeric_csv(path)
    meta = read_sidecar(path) or {}
    source = {"path": path, "count": data.shape[0]}
    source.update({k: meta[k] for k in meta if k not in source})
    return EmbeddingSet(data=data, source=source)


def load_patterns(path: str) -> PatternSet:
    """Load a pattern CSV (entries must be exactly +-1)."""
    data = _parse_numeric_csv(path)
    try:
        return PatternSet(data=data)
    except ValueError as exc:
        raise EmbeddingParseError(f"{path}: {exc}") from exc


def save_embeddings(emb: EmbeddingSet, path: str, extra_meta: Optional[dict] = None):
    """Write embeddings as float CSV rows (round-trip precision) plus sidecar."""
    with open(path, "w", encoding="utf-8") as fh:
        for row in emb.data:
            fh.write(",".join(repr(float(v)) for v in row))
            fh.write("\n")
    meta = {"kind": "embeddings", "p": emb.p, "d": emb.d}
    if extra_meta:
        meta.update(extra_meta)
    _write_sidecar(path, meta)


def binarize_embeddings(emb: EmbeddingSet) -> PatternSet:
    """Center each dimension over all rows, then sign (sign(0) -> +1)."""
    if emb.p < 2:
        raise ValueError("binarization needs at least two rows to center against")
    centered = emb.data - emb.data.mean(axis=0)
    return PatternSet(data=np.where(centered >= 0.0, 1.0, -1.0))
