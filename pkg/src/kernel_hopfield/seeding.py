"""Deterministic stream derivation for seeded experiments.

Every random stream in the harness is derived from a 64-bit master seed and a
sequence of string/integer labels:

    digest  = SHA-256("khop|<master>|<label_1>|...|<label_k>")
    derived = first 16 digest bytes as a big-endian unsigned integer
    rng     = numpy.random.default_rng(derived)   # PCG64 via SeedSequence

Derived seeds are a pure function of (master seed, labels); in particular a
per-trial seed depends only on (master, experiment, P, trial index), so
changing the trial count or the P-grid never changes earlier trials'
streams.  The scheme is fixed here so independent implementations can match
trial structure; bit-identical streams across RNG implementations are not a
goal.
"""

from __future__ import annotations

import hashlib

import numpy as np


def derive_seed(master_seed: int, *labels) -> int:
    """128-bit derived seed, a pure function of (master_seed, labels)."""
    text = "|".join(["khop", str(int(master_seed)), *[str(l) for l in labels]])
    digest = hashlib.sha256(text.encode("utf-8")).digest()
    return int.from_bytes(digest[:16], "big")


def derived_rng(master_seed: int, *labels) -> np.random.Generator:
    """Independent generator for the stream named by `labels`."""
    return np.random.default_rng(derive_seed(master_seed, *labels))
