"""Kernel evaluation, Gram matrices, local fields, pseudo-energy, and overlap.

The model is a kernel associative memory over bipolar states s in {-1,+1}^N.
Neuron i sees the local field

    h_i(s) = sum_mu alpha[mu, i] * K(s, xi^mu)

where K is the RBF kernel K(x, y) = exp(-gamma * ||x - y||^2) and xi^mu are
the stored patterns.  A pseudo-energy V(s) = -sum_i s_i h_i(s) is defined as
a diagnostic; it is a heuristic quantity, not a Lyapunov function of the
synchronous dynamics.

For bipolar vectors the squared distance reduces to the exact identity
||x - y||^2 = 2*(N - x.y), which lets every kernel batch be computed from a
single inner product.  For continuous-valued states (used by the effective
potential, which evaluates the field along an interpolation path projected
onto the sphere of radius sqrt(N)) the general form ||s||^2 + N - 2*s.xi is
used instead; the two coincide whenever ||s||^2 = N.

All arrays are float64.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

GRAM_MAX_PATTERNS = 20000  # ~3 GB of float64; refuse anything bigger


class DimensionError(ValueError):
    """Inputs have inconsistent shapes."""


class GramSizeError(ValueError):
    """Pattern count would produce an unreasonably large Gram matrix."""


@dataclass(frozen=True)
class KernelConfig:
    """RBF locality parameter gamma (per squared-distance unit)."""

    gamma: float = 0.02

    def __post_init__(self):
        if not (self.gamma > 0):
            raise ValueError(f"gamma must be positive, got {self.gamma}")


@dataclass(frozen=True)
class PatternSet:
    """P stored bipolar patterns of dimension N, rows xi^1 .. xi^P."""

    data: np.ndarray  # (P, N) float64, entries exactly +-1

    def __post_init__(self):
        data = np.asarray(self.data, dtype=np.float64)
        if data.ndim != 2 or data.shape[0] < 1 or data.shape[1] < 1:
            raise DimensionError(f"patterns must be a P x N matrix, got shape {data.shape}")
        if not np.all(np.abs(data) == 1.0):
            raise ValueError("pattern entries must be exactly -1 or +1")
        object.__setattr__(self, "data", data)

    @property
    def p(self) -> int:
        return self.data.shape[0]

    @property
    def n(self) -> int:
        return self.data.shape[1]


@dataclass(frozen=True)
class DualWeights:
    """Learned dual variables alpha[mu, i] plus training provenance."""

    alpha: np.ndarray  # (P, N) float64
    kernel: KernelConfig
    mode: str  # "auto" or "sequence"
    training_meta: dict = field(default_factory=dict)

    def __post_init__(self):
        alpha = np.asarray(self.alpha, dtype=np.float64)
        if alpha.ndim != 2:
            raise DimensionError(f"alpha must be a P x N matrix, got shape {alpha.shape}")
        if not np.all(np.isfinite(alpha)):
            raise ValueError("alpha entries must all be finite")
        if self.mode not in ("auto", "sequence"):
            raise ValueError(f"mode must be 'auto' or 'sequence', got {self.mode!r}")
        object.__setattr__(self, "alpha", alpha)


def as_state(s, n: Optional[int] = None) -> np.ndarray:
    """Validate a bipolar state vector, returning it as float64.

    A network state is a length-N vector with entries exactly +-1.
    """
    s = np.asarray(s, dtype=np.float64)
    if s.ndim != 1:
        raise DimensionError(f"state must be a vector, got shape {s.shape}")
    if n is not None and s.shape[0] != n:
        raise DimensionError(f"state has length {s.shape[0]}, expected {n}")
    if not np.all(np.abs(s) == 1.0):
        raise ValueError("state entries must be exactly -1 or +1")
    return s


def _sq_dists_to_patterns(s: np.ndarray, patterns: PatternSet) -> np.ndarray:
    """||s - xi^mu||^2 for all mu; exact for bipolar s, general otherwise."""
    s = np.asarray(s, dtype=np.float64)
    if s.shape != (patterns.n,):
        raise DimensionError(
            f"state has shape {s.shape}, patterns have dimension {patterns.n}"
        )
    # For bipolar s, s.s sums N exact ones, so this is the bipolar shortcut
    # 2*(N - s.xi) with no extra rounding.
    return float(s @ s) + patterns.n - 2.0 * (patterns.data @ s)


def rbf_kernel(x, y, cfg: KernelConfig) -> float:
    """K(x, y) = exp(-gamma * ||x - y||^2), symmetric, equal to 1 iff x == y."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise DimensionError(f"kernel arguments must be equal-length vectors, got {x.shape} and {y.shape}")
    d = x - y
    return float(np.exp(-cfg.gamma * (d @ d)))


def kernel_to_patterns(s, patterns: PatternSet, cfg: KernelConfig) -> np.ndarray:
    """Vector of K(s, xi^mu) over all stored patterns."""
    return np.exp(-cfg.gamma * _sq_dists_to_patterns(s, patterns))


def gram_matrix(patterns: PatternSet, cfg: KernelConfig) -> np.ndarray:
    """P x P kernel matrix, G[mu, nu] = K(xi^mu, xi^nu).

    Symmetric with unit diagonal.  Refuses P > GRAM_MAX_PATTERNS before
    allocating anything.
    """
    if patterns.p > GRAM_MAX_PATTERNS:
        raise GramSizeError(
            f"P={patterns.p} exceeds the Gram matrix limit of {GRAM_MAX_PATTERNS} "
            f"(dense P x P float64 would exceed the memory envelope)"
        )
    x = patterns.data
    # bipolar shortcut: ||xi^mu - xi^nu||^2 = 2*(N - xi^mu . xi^nu), exact
    g = np.exp(-2.0 * cfg.gamma * (patterns.n - x @ x.T))
    # enforce exact symmetry and unit diagonal against BLAS rounding
    g = 0.5 * (g + g.T)
    np.fill_diagonal(g, 1.0)
    return g


def local_field(s, patterns: PatternSet, weights: DualWeights, cfg: KernelConfig) -> np.ndarray:
    """h_i(s) = sum_mu alpha[mu, i] * K(s, xi^mu); accepts continuous s."""
    if weights.alpha.shape != (patterns.p, patterns.n):
        raise DimensionError(
            f"alpha shape {weights.alpha.shape} does not match patterns ({patterns.p}, {patterns.n})"
        )
    k = kernel_to_patterns(s, patterns, cfg)
    return k @ weights.alpha


def pseudo_energy(s, patterns: PatternSet, weights: DualWeights, cfg: KernelConfig) -> float:
    """V(s) = -sum_i s_i h_i(s).  Heuristic diagnostic, not a Lyapunov function."""
    s = np.asarray(s, dtype=np.float64)
    return float(-(s @ local_field(s, patterns, weights, cfg)))


def overlap(s, xi) -> float:
    """(1/N) sum_i s_i xi_i; equals 1 - 2d/N when bipolar states differ in d bits."""
    s = np.asarray(s, dtype=np.float64)
    xi = np.asarray(xi, dtype=np.float64)
    if s.shape != xi.shape or s.ndim != 1:
        raise DimensionError(f"overlap arguments must be equal-length vectors, got {s.shape} and {xi.shape}")
    return float(s @ xi) / s.shape[0]
