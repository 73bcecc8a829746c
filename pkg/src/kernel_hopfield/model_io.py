"""Model persistence: one JSON document, lossless for dynamics.

The file stores the kernel config, training metadata, the stored patterns as
integer arrays, and alpha at full float precision (Python repr round-trip),
under a magic/version header so incompatible files fail loudly.
"""

from __future__ import annotations

import json
from typing import Tuple

from .core import DualWeights, KernelConfig, PatternSet

import numpy as np

MODEL_MAGIC = "khop-model"
MODEL_VERSION = 1


class ModelFormatError(ValueError):
    """Wrong magic, unsupported version, or structurally corrupt model file."""


def save_model(weights: DualWeights, patterns: PatternSet, path: str):
    if weights.alpha.shape != (patterns.p, patterns.n):
        raise ValueError(
            f"alpha shape {weights.alpha.shape} does not match patterns ({patterns.p}, {patterns.n})"
        )
    doc = {
        "format": MODEL_MAGIC,
        "version": MODEL_VERSION,
        "n": patterns.n,
        "p": patterns.p,
        "kernel": {"gamma": weights.kernel.gamma},
        "mode": weights.mode,
        "training_meta": weights.training_meta,
        "patterns": [[int(v) for v in row] for row in patterns.data],
        "alpha": [[float(v) for v in row] for row in weights.alpha],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh)
        fh.write("\n")


def load_model(path: str) -> Tuple[DualWeights, PatternSet]:
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ModelFormatError(f"{path}: not valid JSON: {exc}") from exc
    if not isinstance(doc, dict) or doc.get("format") != MODEL_MAGIC:
        raise ModelFormatError(f"{path}: missing or wrong magic (expected {MODEL_MAGIC!r})")
    if doc.get("version") != MODEL_VERSION:
        raise ModelFormatError(
            f"{path}: unsupported model version {doc.get('version')!r} (expected {MODEL_VERSION})"
        )
    try:
        patterns = PatternSet(data=np.asarray(doc["patterns"], dtype=np.float64))
        weights = DualWeights(
            alpha=np.asarray(doc["alpha"], dtype=np.float64),
            kernel=KernelConfig(gamma=float(doc["kernel"]["gamma"])),
            mode=doc["mode"],
            training_meta=dict(doc.get("training_meta", {})),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ModelFormatError(f"{path}: corrupt model document: {exc}") from exc
    if (patterns.p, patterns.n) != (doc.get("p"), doc.get("n")):
        raise ModelFormatError(f"{path}: declared shape does not match stored arrays")
    if weights.alpha.shape != (patterns.p, patterns.n):
        raise ModelFormatError(f"{path}: alpha shape does not match patterns")
    return weights, patterns
