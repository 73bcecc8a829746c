"""Experiment orchestration: capacity sweeps, CSV emission, and manifests.

Every experiment is fully determined by (code version, manifest): the
manifest JSON written next to each output records the experiment kind, all
config values, the master seed, and the derived per-job seeds.  CSV data
rows are byte-identical across reruns of the same manifest; timestamps live
only in the manifest.

Independent (P, trial) jobs may fan out to a thread pool (BLAS releases the
GIL); every job owns a derived RNG stream and results are aggregated in
sorted (P, trial) order, so output never depends on scheduling.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import __version__
from .analysis import snr_analysis
from .core import KernelConfig, PatternSet, gram_matrix
from .data import gen_random_patterns
from .dynamics import run_sequence
from .seeding import derive_seed
from .training import TrainingConfig, train_klr

CSV_SCHEMAS = {
    "sequence": "step,target_overlap",
    "morph": "r,mean_overlap_a,std_overlap_a,mean_overlap_b,std_overlap_b,mean_steps,spurious_rate",
    "potential": "r,U",
    "snr": "P,S,sigma,snr",
    "cover": "P,d_eff,cover_bound,accuracy",
    "capacity": "P,trials,successes,p_c_flag",
}


def fmt_value(v) -> str:
    """Round-trip, byte-stable CSV field: ints plain, floats via repr."""
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def write_csv(path: str, schema: str, rows: Sequence[Sequence]):
    header = CSV_SCHEMAS[schema]
    ncols = len(header.split(","))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(header + "\n")
        for row in rows:
            if len(row) != ncols:
                raise ValueError(f"row has {len(row)} fields, schema {schema!r} needs {ncols}")
            fh.write(",".join(fmt_value(v) for v in row) + "\n")


def manifest_path(out_path: str) -> str:
    return out_path + ".manifest.json"


def write_manifest(
    out_path: str,
    experiment: str,
    config: dict,
    master_seed: int,
    derived_seeds: Optional[dict] = None,
):
    doc = {
        "experiment": experiment,
        "config": config,
        "master_seed": int(master_seed),
        "derived_seeds": derived_seeds or {},
        "software_version": __version__,
        "created": datetime.now(timezone.utc).isoformat(),
    }
    with open(manifest_path(out_path), "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


@dataclass(frozen=True)
class CapacityResult:
    """Per-P sequence-recall outcomes plus the measured capacity p_c."""

    p_grid: List[int]
    trials: int
    successes: Dict[int, int]
    mean_min_overlap: Dict[int, float]
    snr_mean: Dict[int, float]  # mean over trials of the trained-model SNR
    s_mean: Dict[int, float]
    sigma_mean: Dict[int, float]
    p_c: Optional[int]  # largest grid P with all-trials success, None if none

    def capacity_rows(self) -> List[Tuple]:
        return [
            (p, self.trials, self.successes[p], 1 if p == self.p_c else 0)
            for p in self.p_grid
        ]

    def snr_rows(self) -> List[Tuple]:
        return [(p, self.s_mean[p], self.sigma_mean[p], self.snr_mean[p]) for p in self.p_grid]


def _capacity_job(args) -> Tuple[int, int, bool, float, float, float, float]:
    n, p, trial, master_seed, kernel, trainer_cfg = args
    pats = gen_random_patterns(n, p, derive_seed(master_seed, "capacity", p, trial))
    cfg = TrainingConfig(
        mode="sequence",
        learning_rate=trainer_cfg.learning_rate,
        iterations=trainer_cfg.iterations,
        weight_decay=trainer_cfg.weight_decay,
        loss_normalization=trainer_cfg.loss_normalization,
        seed=trainer_cfg.seed,
    )
    weights = train_klr(pats, cfg, kernel)
    res = run_sequence(pats, weights, kernel)
    snr = snr_analysis(pats, weights)
    return (
        p,
        trial,
        res.success,
        float(res.target_overlap_trace.min()),
        snr.signal_mean,
        snr.noise_std,
        snr.snr,
    )


def capacity_sweep(
    n: int,
    p_grid: Sequence[int],
    trials: int,
    master_seed: int,
    kernel: KernelConfig,
    trainer_cfg: TrainingConfig,
    threads: int = 1,
) -> CapacityResult:
    """Sequence-recall capacity over a P grid, 10-trials-style.

    Per (P, trial): fresh random patterns from a derived seed, sequence-mode
    training, one 6P-step recall run.  Also records the trained-model SNR so
    a sweep yields the SNR-vs-P curve for free.  p_c is the largest tested P
    for which every trial succeeds.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    p_grid = [int(p) for p in p_grid]
    if p_grid != sorted(p_grid):
        raise ValueError("p_grid must be ascending")
    jobs = [(n, p, t, master_seed, kernel, trainer_cfg) for p in p_grid for t in range(trials)]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(_capacity_job, jobs))
    else:
        results = [_capacity_job(j) for j in jobs]
    results.sort(key=lambda r: (r[0], r[1]))  # deterministic aggregation order

    successes: Dict[int, int] = {p: 0 for p in p_grid}
    min_ovl: Dict[int, List[float]] = {p: [] for p in p_grid}
    s_vals: Dict[int, List[float]] = {p: [] for p in p_grid}
    sig_vals: Dict[int, List[float]] = {p: [] for p in p_grid}
    snr_vals: Dict[int, List[float]] = {p: [] for p in p_grid}
    for p, _t, ok, mo, s, sigma, snr in results:
        successes[p] += int(ok)
        min_ovl[p].append(mo)
        s_vals[p].append(s)
        sig_vals[p].append(sigma)
        snr_vals[p].append(snr)

    all_pass = [p for p in p_grid if successes[p] == trials]
    return CapacityResult(
        p_grid=p_grid,
        trials=trials,
        successes=successes,
        mean_min_overlap={p: float(np.mean(min_ovl[p])) for p in p_grid},
        s_mean={p: float(np.mean(s_vals[p])) for p in p_grid},
        sigma_mean={p: float(np.mean(sig_vals[p])) for p in p_grid},
        snr_mean={p: float(np.mean(snr_vals[p])) for p in p_grid},
        p_c=max(all_pass) if all_pass else None,
    )


def capacity_seed_table(master_seed: int, p_grid: Sequence[int], trials: int) -> dict:
    """Derived seeds actually used by capacity_sweep, for the manifest."""
    return {
        f"P={p}/trial={t}": derive_seed(master_seed, "capacity", p, t)
        for p in p_grid
        for t in range(trials)
    }
