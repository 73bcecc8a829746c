"""Attractor-boundary geometry, SNR decomposition, and effective dimension.

Morphing probes the boundary between two stored attractors xi^A and xi^B by
initializing the dynamics at

    s_i = sign((1 - r) xi^A_i + r xi^B_i + eps_i),   eps_i ~ N(0, nu^2)

for interpolation ratios r on a grid, and recording where the converged
state lands (overlap with each parent, steps to converge, and the rate of
"spurious" outcomes where the final state resembles neither parent).

The effective potential evaluates the pseudo-energy along the deterministic
interpolation path projected onto the sphere of radius sqrt(N) — a
continuous-state probe of the same boundary, with no noise term.

The SNR decomposition splits each neuron's trained local field at a stored
pattern into the contribution of that pattern's own dual weight (signal) and
the crosstalk from all other patterns (noise), pooled over all (mu, i):

    signal[mu,i] = y[mu,i] * alpha[mu,i]            (K_diag = 1)
    noise[mu,i]  = y[mu,i] * sum_{nu != mu} alpha[nu,i] * K[mu,nu]

S is the mean signal sample, sigma the population std of the noise samples.

Effective dimension is the participation ratio of the Gram spectrum,
D_eff = (sum lambda)^2 / sum lambda^2, and 2*D_eff serves as the
Cover-style linear-separability reference capacity.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from .core import (
    DimensionError,
    DualWeights,
    KernelConfig,
    PatternSet,
    gram_matrix,
    local_field,
    overlap,
    pseudo_energy,
)
from .dynamics import DEFAULT_MAX_STEPS, recall_noisy, run_sequence, run_to_convergence
from .seeding import derive_seed, derived_rng
from .training import TrainingConfig, build_targets, train_klr

SPURIOUS_OVERLAP_THRESHOLD = 0.9  # below this (for both parents) a trial is spurious
DEFAULT_MORPH_GRID_POINTS = 101


class SingularInterpolationError(ValueError):
    """Interpolation vector has zero norm (xi^A = -xi^B at r = 0.5)."""


def default_ratio_grid(points: int = DEFAULT_MORPH_GRID_POINTS) -> np.ndarray:
    return np.linspace(0.0, 1.0, points)


@dataclass(frozen=True)
class MorphConfig:
    ratio_grid: np.ndarray = field(default_factory=default_ratio_grid)
    nu: float = 0.01
    trials: int = 10
    seed: int = 0
    max_steps: int = DEFAULT_MAX_STEPS

    def __post_init__(self):
        grid = np.asarray(self.ratio_grid, dtype=np.float64)
        if grid.ndim != 1 or grid.size < 2:
            raise ValueError("ratio_grid must be a 1-D grid with at least two points")
        if not (np.all(np.diff(grid) > 0) and grid[0] == 0.0 and grid[-1] == 1.0):
            raise ValueError("ratio_grid must be strictly increasing from 0.0 to 1.0")
        if self.nu < 0:
            raise ValueError("nu must be nonnegative")
        if self.trials < 1:
            raise ValueError("trials must be positive")
        object.__setattr__(self, "ratio_grid", grid)


@dataclass(frozen=True)
class MorphResult:
    """Per-r aggregates over trials of the morphing experiment."""

    ratio_grid: np.ndarray
    mean_overlap_a: np.ndarray
    std_overlap_a: np.ndarray
    mean_overlap_b: np.ndarray
    std_overlap_b: np.ndarray
    mean_steps: np.ndarray
    spurious_rate: np.ndarray
    nonconverged_rate: np.ndarray  # fraction of trials that hit max_steps


@dataclass(frozen=True)
class SnrResult:
    signal_mean: float
    noise_std: float
    snr: float  # nan when undefined (sigma = 0)
    undefined: bool
    n_samples: int  # pooled (mu, i) samples per term


@dataclass(frozen=True)
class SpectrumResult:
    eigenvalues: np.ndarray  # sorted descending, PSD-clamped
    d_eff: float
    cover_bound: float


def morph_state(xiA, xiB, r: float, nu: float, rng: np.random.Generator) -> np.ndarray:
    """s_i = sign((1-r) xi^A_i + r xi^B_i + eps_i), sign(0) -> +1."""
    xiA = np.asarray(xiA, dtype=np.float64)
    xiB = np.asarray(xiB, dtype=np.float64)
    if xiA.shape != xiB.shape or xiA.ndim != 1:
        raise DimensionError(f"morph endpoints must be equal-length vectors, got {xiA.shape} and {xiB.shape}")
    if not (0.0 <= r <= 1.0):
        raise ValueError(f"r must lie in [0, 1], got {r}")
    if nu < 0:
        raise ValueError(f"nu must be nonnegative, got {nu}")
    v = (1.0 - r) * xiA + r * xiB
    if nu > 0:
        v = v + rng.normal(0.0, nu, size=xiA.shape[0])
    return np.where(v >= 0.0, 1.0, -1.0)


def _require_stored(xi, patterns: PatternSet, name: str) -> np.ndarray:
    xi = np.asarray(xi, dtype=np.float64)
    if xi.shape != (patterns.n,):
        raise DimensionError(f"{name} has shape {xi.shape}, expected ({patterns.n},)")
    if not np.any(np.all(patterns.data == xi, axis=1)):
        raise ValueError(f"{name} is not a stored pattern")
    return xi


def _morph_runs(xiA, xiB, patterns, weights, kernel, cfg: MorphConfig):
    """Per-(r, trial) records (m_a, m_b, steps, converged) of the morph protocol.

    Each (r_index, trial) pair owns a derived RNG stream, so results are
    independent of evaluation order and safe to parallelize.
    """
    xiA = _require_stored(xiA, patterns, "xi^A")
    xiB = _require_stored(xiB, patterns, "xi^B")
    if np.array_equal(xiA, xiB):
        raise ValueError("morph endpoints must be distinct stored patterns")
    grid = cfg.ratio_grid
    m_a = np.empty((grid.size, cfg.trials))
    m_b = np.empty((grid.size, cfg.trials))
    steps = np.empty((grid.size, cfg.trials))
    conv = np.empty((grid.size, cfg.trials), dtype=bool)
    for ri, r in enumerate(grid):
        for t in range(cfg.trials):
            rng = derived_rng(cfg.seed, "morph", ri, t)
            s0 = morph_state(xiA, xiB, float(r), cfg.nu, rng)
            s_fin, status = run_to_convergence(s0, patterns, weights, kernel, cfg.max_steps)
            m_a[ri, t] = overlap(s_fin, xiA)
            m_b[ri, t] = overlap(s_fin, xiB)
            steps[ri, t] = status.steps
            conv[ri, t] = status.kind == "converged"
    return m_a, m_b, steps, conv


def morph_experiment(
    xiA, xiB, patterns: PatternSet, weights: DualWeights, kernel: KernelConfig, cfg: MorphConfig
) -> MorphResult:
    """Run the morphing protocol over cfg.ratio_grid and aggregate over trials."""
    m_a, m_b, steps, conv = _morph_runs(xiA, xiB, patterns, weights, kernel, cfg)
    spurious = np.maximum(np.abs(m_a), np.abs(m_b)) < SPURIOUS_OVERLAP_THRESHOLD
    return MorphResult(
        ratio_grid=cfg.ratio_grid,
        mean_overlap_a=m_a.mean(axis=1),
        std_overlap_a=m_a.std(axis=1),
        mean_overlap_b=m_b.mean(axis=1),
        std_overlap_b=m_b.std(axis=1),
        mean_steps=steps.mean(axis=1),
        spurious_rate=spurious.mean(axis=1),
        nonconverged_rate=(~conv).mean(axis=1),
    )


def slowdown_profile(
    xiA, xiB, patterns: PatternSet, weights: DualWeights, kernel: KernelConfig, cfg: MorphConfig
):
    """Per-r mean convergence steps of the morph protocol.

    Returns (ratio_grid, mean_steps, nonconverged_rate); runs that hit
    max_steps enter the mean at max_steps and are flagged via the rate.
    """
    m_a, m_b, steps, conv = _morph_runs(xiA, xiB, patterns, weights, kernel, cfg)
    return cfg.ratio_grid, steps.mean(axis=1), (~conv).mean(axis=1)


def effective_potential_profile(
    xiA, xiB, patterns: PatternSet, weights: DualWeights, kernel: KernelConfig, ratio_grid
) -> np.ndarray:
    """U(r) = pseudo_energy of the interpolation projected onto the sphere.

    s~(r) = sqrt(N) * v / ||v||, v = (1-r) xi^A + r xi^B; no noise term.
    At the endpoints the projection is an identity, so U(0) and U(1) equal
    the pseudo-energies of the stored patterns exactly.
    """
    xiA = np.asarray(xiA, dtype=np.float64)
    xiB = np.asarray(xiB, dtype=np.float64)
    if xiA.shape != xiB.shape or xiA.ndim != 1:
        raise DimensionError(f"endpoints must be equal-length vectors, got {xiA.shape} and {xiB.shape}")
    grid = np.asarray(ratio_grid, dtype=np.float64)
    sqrt_n = np.sqrt(patterns.n)
    u = np.empty(grid.size)
    for i, r in enumerate(grid):
        v = (1.0 - r) * xiA + r * xiB
        norm = np.linalg.norm(v)
        if norm == 0.0:
            raise SingularInterpolationError(
                f"interpolation vector vanishes at r={r} (xi^A = -xi^B)"
            )
        u[i] = pseudo_energy(sqrt_n * v / norm, patterns, weights, kernel)
    return u


def snr_analysis(
    patterns: PatternSet,
    weights: DualWeights,
    gram: Optional[np.ndarray] = None,
    mode: Optional[str] = None,
) -> SnrResult:
    """Signal/crosstalk decomposition of the trained fields at the stored patterns.

    mode defaults to the weights' training mode (auto targets y = xi^mu,
    sequence targets y = xi^{mu+1} cyclic).
    """
    if weights.alpha.shape != (patterns.p, patterns.n):
        raise DimensionError(
            f"alpha shape {weights.alpha.shape} does not match patterns ({patterns.p}, {patterns.n})"
        )
    if gram is None:
        gram = gram_matrix(patterns, weights.kernel)
    elif gram.shape != (patterns.p, patterns.p):
        raise DimensionError(f"gram shape {gram.shape} does not match P={patterns.p}")
    y = build_targets(patterns, mode or weights.mode).y
    signal = y * weights.alpha
    noise = y * (gram @ weights.alpha - weights.alpha)  # K_diag = 1 exactly
    s_mean = float(signal.mean())
    sigma = float(noise.std())  # population std, pooled over all (mu, i)
    undefined = sigma == 0.0
    return SnrResult(
        signal_mean=s_mean,
        noise_std=sigma,
        snr=float("nan") if undefined else s_mean / sigma,
        undefined=undefined,
        n_samples=patterns.p * patterns.n,
    )


def participation_ratio(eigenvalues) -> float:
    """D_eff = (sum lambda)^2 / sum lambda^2."""
    lam = np.asarray(eigenvalues, dtype=np.float64)
    denom = float(lam @ lam)
    if denom == 0.0:
        raise ValueError("participation ratio undefined for an all-zero spectrum")
    return float(lam.sum()) ** 2 / denom


def eigen_spectrum(gram: np.ndarray) -> SpectrumResult:
    """Spectrum of a symmetric PSD (Gram) matrix, sorted descending.

    Small negative eigenvalues within -1e-8*P are clamped to zero (numerical
    PSD repair); anything more negative, or an eigenvalue-sum drifting from
    the trace by more than 1e-6*P, raises.
    """
    gram = np.asarray(gram, dtype=np.float64)
    if gram.ndim != 2 or gram.shape[0] != gram.shape[1]:
        raise DimensionError(f"gram must be square, got shape {gram.shape}")
    if not np.allclose(gram, gram.T, rtol=0.0, atol=1e-12):
        raise ValueError("gram must be symmetric")
    p = gram.shape[0]
    lam = np.linalg.eigvalsh(gram)[::-1].copy()
    neg_tol = 1e-8 * p
    if np.any(lam < -neg_tol):
        raise ValueError(
            f"matrix is not PSD within tolerance: min eigenvalue {lam.min():.3e} < -{neg_tol:.3e}"
        )
    lam[lam < 0.0] = 0.0
    trace = float(np.trace(gram))
    if abs(float(lam.sum()) - trace) > 1e-6 * max(p, 1):
        raise ValueError("eigenvalue sum drifted from the matrix trace beyond tolerance")
    d_eff = participation_ratio(lam)
    return SpectrumResult(eigenvalues=lam, d_eff=d_eff, cover_bound=2.0 * d_eff)


def cover_comparison(
    n: int,
    p_grid: Sequence[int],
    kernel: KernelConfig,
    trainer_cfg: TrainingConfig,
    trials: int,
    master_seed: int = 0,
    mode: str = "sequence",
    noise_fraction: float = 0.1,
    max_steps: int = DEFAULT_MAX_STEPS,
) -> List[dict]:
    """Per-P rows (P, d_eff, cover_bound, accuracy) comparing measured recall
    against the 2*D_eff separability reference.

    Sequence mode scores the fraction of trials whose cyclic recall succeeds;
    auto mode scores the mean fraction of stored patterns recalled exactly
    from noisy cues.  The spectrum (hence d_eff) is computed from the first
    trial's pattern draw.
    """
    from .data import gen_random_patterns  # local import to keep module layers acyclic

    if list(p_grid) != sorted(p_grid):
        raise ValueError("p_grid must be ascending")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rows = []
    for p in p_grid:
        accs = []
        d_eff = None
        for t in range(trials):
            pats = gen_random_patterns(n, p, derive_seed(master_seed, "cover", p, t))
            if t == 0:
                d_eff = eigen_spectrum(gram_matrix(pats, kernel)).d_eff
            cfg = TrainingConfig(
                mode=mode,
                learning_rate=trainer_cfg.learning_rate,
                iterations=trainer_cfg.iterations,
                weight_decay=trainer_cfg.weight_decay,
                loss_normalization=trainer_cfg.loss_normalization,
                seed=trainer_cfg.seed,
            )
            weights = train_klr(pats, cfg, kernel)
            if mode == "sequence":
                accs.append(1.0 if run_sequence(pats, weights, kernel).success else 0.0)
            else:
                ok = 0
                for mu in range(p):
                    res = recall_noisy(
                        pats, weights, kernel, mu, noise_fraction, 1,
                        derive_seed(master_seed, "cover-recall", p, t, mu),
                        max_steps,
                    )
                    ok += int(res[0]["success"])
                accs.append(ok / p)
        rows.append(
            {
                "P": int(p),
                "d_eff": float(d_eff),
                "cover_bound": 2.0 * float(d_eff),
                "accuracy": float(np.mean(accs)),
            }
        )
    return rows
