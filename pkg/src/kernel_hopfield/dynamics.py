"""Synchronous retrieval dynamics, convergence detection, and recall protocols.

All neurons update simultaneously from the same local field:

    s_i(t+1) = sign(h_i(s(t))),  sign(0) -> +1.

Synchronous Hopfield-type dynamics admit period-2 cycles as well as fixed
points, so runs stop on either s(t+1) == s(t) (converged) or
s(t+1) == s(t-1) (period-2 cycle), or after max_steps updates.

Step counting: `steps` is the number of synchronous updates applied before a
repeat is observed.  A state whose first update leaves it unchanged reports
steps=1.

Sequence recall follows a fixed protocol: start at s(0) = xi^1, run 6*P
synchronous updates; at step t (1-based) the cyclic target is
xi^{(t mod P)+1}.  The run succeeds iff some window of P consecutive steps
has all target overlaps exactly 1.0 (a full clean cycle, transient allowed).
Success is recomputable from the stored overlap trace alone.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from .core import (
    DualWeights,
    KernelConfig,
    PatternSet,
    as_state,
    local_field,
    overlap,
)

DEFAULT_MAX_STEPS = 100
SEQUENCE_STEP_FACTOR = 6  # run 6*P updates in a sequence trial


@dataclass(frozen=True)
class RunStatus:
    kind: str  # "converged" | "period2_cycle" | "max_steps_reached"
    steps: int


@dataclass(frozen=True)
class SequenceRunResult:
    success: bool
    first_error_step: Optional[int]  # 1-based, None if no error before the first clean cycle
    target_overlap_trace: np.ndarray  # length 6*P


def update_sync(s, patterns: PatternSet, weights: DualWeights, kernel: KernelConfig) -> np.ndarray:
    """One synchronous update: s'_i = +1 if h_i(s) >= 0 else -1."""
    h = local_field(s, patterns, weights, kernel)
    return np.where(h >= 0.0, 1.0, -1.0)


def run_to_convergence(
    s0,
    patterns: PatternSet,
    weights: DualWeights,
    kernel: KernelConfig,
    max_steps: int = DEFAULT_MAX_STEPS,
) -> Tuple[np.ndarray, RunStatus]:
    """Iterate update_sync until a fixed point, a 2-cycle, or max_steps."""
    if max_steps < 1:
        raise ValueError("max_steps must be >= 1")
    s = as_state(s0, patterns.n)
    prev_prev = None
    for t in range(1, max_steps + 1):
        s_new = update_sync(s, patterns, weights, kernel)
        if np.array_equal(s_new, s):
            return s_new, RunStatus(kind="converged", steps=t)
        if prev_prev is not None and np.array_equal(s_new, prev_prev):
            return s_new, RunStatus(kind="period2_cycle", steps=t)
        prev_prev = s
        s = s_new
    return s, RunStatus(kind="max_steps_reached", steps=max_steps)


def flip_bits(xi: np.ndarray, noise_fraction: float, rng: np.random.Generator) -> np.ndarray:
    """Flip exactly round(noise_fraction * N) distinct uniformly chosen bits."""
    if not (0.0 <= noise_fraction <= 1.0):
        raise ValueError(f"noise_fraction must lie in [0, 1], got {noise_fraction}")
    n = xi.shape[0]
    k = int(np.floor(noise_fraction * n + 0.5))  # round half up
    cue = xi.copy()
    if k > 0:
        idx = rng.choice(n, size=k, replace=False)
        cue[idx] = -cue[idx]
    return cue


def recall_noisy(
    patterns: PatternSet,
    weights: DualWeights,
    kernel: KernelConfig,
    pattern_index: int,
    noise_fraction: float,
    trials: int,
    rng_seed,
    max_steps: int = DEFAULT_MAX_STEPS,
) -> List[dict]:
    """Noisy-cue recall of one stored pattern.

    Per trial: corrupt xi^mu with a fixed budget of random bit flips, run to
    convergence, succeed iff the final state equals xi^mu exactly.
    rng_seed may be an int or a numpy SeedSequence/Generator.
    """
    if not (0 <= pattern_index < patterns.p):
        raise IndexError(f"pattern_index {pattern_index} out of range for P={patterns.p}")
    rng = np.random.default_rng(rng_seed)
    xi = patterns.data[pattern_index]
    out = []
    for _ in range(trials):
        cue = flip_bits(xi, noise_fraction, rng)
        final, _status = run_to_convergence(cue, patterns, weights, kernel, max_steps)
        out.append(
            {
                "success": bool(np.array_equal(final, xi)),
                "final_overlap": overlap(final, xi),
            }
        )
    return out


def sequence_success_from_trace(trace: np.ndarray, p: int) -> bool:
    """True iff some window of p consecutive steps has target overlap exactly 1.0."""
    exact = np.asarray(trace) == 1.0
    run = 0
    for ok in exact:
        run = run + 1 if ok else 0
        if run >= p:
            return True
    return False


def _first_error_step(trace: np.ndarray, p: int) -> Optional[int]:
    """Earliest 1-based step with overlap != 1.0 before the first clean cycle completes."""
    exact = np.asarray(trace) == 1.0
    run = 0
    for t, ok in enumerate(exact, start=1):
        run = run + 1 if ok else 0
        if not ok:
            return t
        if run >= p:
            return None
    return None


def run_sequence(
    patterns: PatternSet, weights: DualWeights, kernel: KernelConfig
) -> SequenceRunResult:
    """Run the 6*P-step cyclic sequence-recall protocol from s(0) = xi^1."""
    if weights.mode != "sequence":
        raise ValueError(
            f"run_sequence requires sequence-mode weights, got mode={weights.mode!r}"
        )
    p = patterns.p
    total = SEQUENCE_STEP_FACTOR * p
    s = patterns.data[0].copy()
    trace = np.empty(total)
    for t in range(1, total + 1):
        s = update_sync(s, patterns, weights, kernel)
        target = patterns.data[t % p]  # row index of xi^{(t mod P)+1}
        trace[t - 1] = overlap(s, target)
    return SequenceRunResult(
        success=sequence_success_from_trace(trace, p),
        first_error_step=_first_error_step(trace, p),
        target_overlap_trace=trace,
    )
