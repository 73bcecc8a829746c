"""Per-neuron kernel logistic regression shared over one Gram matrix.

Each neuron i solves an independent binary logistic regression in kernel dual
form: with margins z[mu, i] = y[mu, i] * (G @ alpha)[mu, i], the loss is

    L(alpha) = norm * sum_{mu,i} ln(1 + exp(-z[mu, i]))

where `norm` is 1 in "sum" normalization and 1/(P*N) in "mean" normalization.
Training is full-batch gradient descent with decoupled weight decay
(shrink-then-step):

    alpha <- alpha * (1 - lr * wd) - lr * grad L(alpha)

The default normalization is "sum".  With "mean", the gradient magnitude
scales like 1/(P*N) while the decay term does not, so at the default
learning rate the decay equilibrium pins ||alpha|| near zero and the network
stores nothing at experimental sizes; "mean" is kept available as an option.

Targets: auto-associative mode trains each pattern onto itself
(y = patterns); sequence mode trains each pattern onto its successor with
cyclic wrap xi^{P+1} = xi^1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from .core import DimensionError, DualWeights, KernelConfig, PatternSet, gram_matrix

MODES = ("auto", "sequence")
NORMALIZATIONS = ("mean", "sum")


class TrainingDivergedError(RuntimeError):
    """Non-finite loss encountered during training."""

    def __init__(self, iteration: int):
        self.iteration = iteration
        super().__init__(f"training diverged: non-finite loss at iteration {iteration}")


@dataclass(frozen=True)
class TrainingConfig:
    mode: str = "auto"
    learning_rate: float = 0.1
    iterations: int = 500
    weight_decay: float = 0.01
    loss_normalization: str = "sum"
    seed: int = 0

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.loss_normalization not in NORMALIZATIONS:
            raise ValueError(
                f"loss_normalization must be one of {NORMALIZATIONS}, got {self.loss_normalization!r}"
            )
        if self.iterations < 0:
            raise ValueError("iterations must be nonnegative")
        if self.iterations > 0 and not (self.learning_rate > 0):
            raise ValueError("learning_rate must be positive when iterations > 0")
        if self.weight_decay < 0:
            raise ValueError("weight_decay must be nonnegative")


@dataclass(frozen=True)
class TargetSet:
    """Desired output row y^mu for each input pattern xi^mu."""

    y: np.ndarray  # (P, N) float64, entries +-1


def build_targets(patterns: PatternSet, mode: str) -> TargetSet:
    """auto: y = patterns row-for-row; sequence: row mu holds xi^{mu+1}, cyclic."""
    if mode == "auto":
        return TargetSet(y=patterns.data)
    if mode == "sequence":
        return TargetSet(y=np.roll(patterns.data, -1, axis=0))
    raise ValueError(f"mode must be one of {MODES}, got {mode!r}")


def _norm_factor(p: int, n: int, cfg: TrainingConfig) -> float:
    return 1.0 / (p * n) if cfg.loss_normalization == "mean" else 1.0


def _check_shapes(alpha: np.ndarray, gram: np.ndarray, y: np.ndarray):
    p, n = y.shape
    if alpha.shape != (p, n):
        raise DimensionError(f"alpha shape {alpha.shape} does not match targets {(p, n)}")
    if gram.shape != (p, p):
        raise DimensionError(f"gram shape {gram.shape} does not match P={p}")


def logistic_loss(alpha: np.ndarray, gram: np.ndarray, targets: TargetSet, cfg: TrainingConfig) -> float:
    """norm * sum_{mu,i} ln(1 + exp(-z)), z = y * (G @ alpha).  Decay excluded."""
    y = targets.y
    _check_shapes(alpha, gram, y)
    z = y * (gram @ alpha)
    return _norm_factor(*y.shape, cfg) * float(np.logaddexp(0.0, -z).sum())


def loss_gradient(alpha: np.ndarray, gram: np.ndarray, targets: TargetSet, cfg: TrainingConfig) -> np.ndarray:
    """Exact gradient of logistic_loss: -norm * G @ (y * sigmoid(-z))."""
    y = targets.y
    _check_shapes(alpha, gram, y)
    z = y * (gram @ alpha)
    return -_norm_factor(*y.shape, cfg) * (gram @ (y * expit(-z)))


def train_klr(patterns: PatternSet, cfg: TrainingConfig, kernel: KernelConfig) -> DualWeights:
    """Gradient-descent KLR training from alpha = 0.

    Runs exactly cfg.iterations update steps; deterministic given
    (patterns, cfg, kernel).  Raises TrainingDivergedError naming the
    iteration if the loss becomes non-finite.
    """
    targets = build_targets(patterns, cfg.mode)
    y = targets.y
    gram = gram_matrix(patterns, kernel)
    norm = _norm_factor(patterns.p, patterns.n, cfg)
    shrink = 1.0 - cfg.learning_rate * cfg.weight_decay

    alpha = np.zeros((patterns.p, patterns.n))
    for it in range(cfg.iterations):
        m = gram @ alpha
        if not np.all(np.isfinite(m)):
            # finite margins <=> finite logaddexp loss
            raise TrainingDivergedError(it)
        grad = -norm * (gram @ (y * expit(-(y * m))))
        alpha = alpha * shrink - cfg.learning_rate * grad

    if not np.all(np.isfinite(alpha)):
        raise TrainingDivergedError(cfg.iterations)

    meta = {
        "mode": cfg.mode,
        "learning_rate": cfg.learning_rate,
        "iterations": cfg.iterations,
        "weight_decay": cfg.weight_decay,
        "loss_normalization": cfg.loss_normalization,
        "seed": cfg.seed,
    }
    return DualWeights(alpha=alpha, kernel=kernel, mode=cfg.mode, training_meta=meta)
