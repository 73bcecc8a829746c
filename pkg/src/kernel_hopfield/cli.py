"""Experiment CLI: one subcommand per experiment, CSV + manifest outputs.

Every run writes its primary output to --out plus a manifest JSON at
`<out>.manifest.json` recording the experiment kind, config, master seed,
and seed-derivation scheme; identical manifests reproduce byte-identical
CSV data rows.  Errors are reported as a single machine-readable JSON line
on stderr with a nonzero exit code.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import List, Optional

import numpy as np

from . import __version__
from .analysis import (
    MorphConfig,
    cover_comparison,
    effective_potential_profile,
    eigen_spectrum,
    morph_experiment,
    slowdown_profile,
    snr_analysis,
)
from .core import KernelConfig, gram_matrix
from .data import (
    binarize_embeddings,
    gen_random_patterns,
    load_embeddings,
    load_patterns,
    save_patterns,
)
from .dynamics import DEFAULT_MAX_STEPS, recall_noisy, run_sequence
from .experiments import (
    CSV_SCHEMAS,
    capacity_seed_table,
    capacity_sweep,
    write_csv,
    write_manifest,
)
from .model_io import load_model, save_model
from .seeding import derive_seed
from .training import TrainingConfig, train_klr

EXTRA_SCHEMAS = {
    "recall": "pattern_index,trial,success,final_overlap",
    "slowdown": "r,mean_steps,nonconverged_rate",
    "effdim": "P,d_eff,cover_bound",
}


def _write_plain_csv(path: str, header: str, rows):
    from .experiments import fmt_value

    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(header + "\n")
        for row in rows:
            fh.write(",".join(fmt_value(v) for v in row) + "\n")


class _Parser(argparse.ArgumentParser):
    """argparse that reports failures as one machine-readable stderr line."""

    def error(self, message):
        print(json.dumps({"error": "usage", "message": message}), file=sys.stderr)
        raise SystemExit(2)


def _default_threads() -> int:
    env = os.environ.get("KHOP_THREADS")
    try:
        return max(1, int(env)) if env else 1
    except ValueError:
        return 1


def _int_list(text: str) -> List[int]:
    try:
        return [int(tok) for tok in text.split(",") if tok.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="khop", description=__doc__)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name: str, help_text: str, *, seed=True, gamma=False, out=True, threads=False, max_steps=False):
        p = sub.add_parser(name, help=help_text)
        if seed:
            p.add_argument("--seed", type=int, default=0, help="master seed (default 0)")
        if gamma:
            p.add_argument("--gamma", type=float, default=0.02, help="RBF locality parameter (default 0.02)")
        if out:
            p.add_argument("--out", required=True, help="output file path")
        if threads:
            p.add_argument("--threads", type=int, default=_default_threads(),
                           help="worker threads for independent jobs (default $KHOP_THREADS or 1)")
        if max_steps:
            p.add_argument("--max-steps", type=int, default=DEFAULT_MAX_STEPS,
                           help=f"max synchronous updates per run (default {DEFAULT_MAX_STEPS})")
        return p

    p = add("gen-patterns", "generate random bipolar patterns")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--p", type=int, required=True)

    p = add("binarize", "center and sign-binarize an embedding CSV into patterns", seed=False)
    p.add_argument("--embeddings", required=True, help="input embedding CSV")

    p = add("train", "train dual weights on a pattern file", gamma=True)
    p.add_argument("--patterns", required=True)
    p.add_argument("--mode", choices=("auto", "sequence"), default="auto")
    p.add_argument("--lr", type=float, default=0.1)
    p.add_argument("--iters", type=int, default=500)
    p.add_argument("--wd", type=float, default=0.01)
    p.add_argument("--norm", choices=("mean", "sum"), default="sum")

    p = add("recall", "noisy-cue recall of stored patterns", max_steps=True)
    p.add_argument("--model", required=True)
    p.add_argument("--noise", type=float, default=0.1)
    p.add_argument("--trials", type=int, default=10)
    p.add_argument("--pattern", type=int, default=None, help="single pattern index (default: all)")

    p = add("sequence", "run the 6P-step cyclic sequence-recall protocol", seed=False)
    p.add_argument("--model", required=True)

    p = add("capacity-sweep", "sequence capacity over a P grid", gamma=True, threads=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--grid", type=_int_list, required=True, help="comma-separated ascending P values")
    p.add_argument("--trials", type=int, default=10)
    p.add_argument("--lr", type=float, default=0.1)
    p.add_argument("--iters", type=int, default=500)
    p.add_argument("--wd", type=float, default=0.01)
    p.add_argument("--norm", choices=("mean", "sum"), default="sum")
    p.add_argument("--snr-out", default=None, help="optional per-P SNR CSV")

    p = add("morph", "attractor-boundary morphing between two stored patterns", max_steps=True)
    p.add_argument("--model", required=True)
    p.add_argument("--a", type=int, required=True, help="index of xi^A")
    p.add_argument("--b", type=int, required=True, help="index of xi^B")
    p.add_argument("--grid", type=int, default=101, help="number of interpolation points (default 101)")
    p.add_argument("--nu", type=float, default=0.01)
    p.add_argument("--trials", type=int, default=10)

    p = add("potential", "effective potential along the interpolation path", seed=False)
    p.add_argument("--model", required=True)
    p.add_argument("--a", type=int, required=True)
    p.add_argument("--b", type=int, required=True)
    p.add_argument("--grid", type=int, default=101)

    p = add("slowdown", "convergence-steps profile along the morph path", max_steps=True)
    p.add_argument("--model", required=True)
    p.add_argument("--a", type=int, required=True)
    p.add_argument("--b", type=int, required=True)
    p.add_argument("--grid", type=int, default=101)
    p.add_argument("--nu", type=float, default=0.01)
    p.add_argument("--trials", type=int, default=10)

    p = add("snr", "signal/crosstalk decomposition of a trained model", seed=False)
    p.add_argument("--model", required=True)
    p.add_argument("--mode", choices=("auto", "sequence"), default=None,
                   help="target mode (default: the model's training mode)")

    p = add("effdim", "participation-ratio effective dimension of a pattern set", seed=False, gamma=True)
    p.add_argument("--patterns", required=True)

    p = add("cover", "effective-dimension bound vs measured accuracy over a P grid",
            gamma=True, threads=True, max_steps=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--grid", type=_int_list, required=True)
    p.add_argument("--trials", type=int, default=10)
    p.add_argument("--mode", choices=("sequence", "auto"), default="sequence")
    p.add_argument("--noise", type=float, default=0.1)
    p.add_argument("--lr", type=float, default=0.1)
    p.add_argument("--iters", type=int, default=500)
    p.add_argument("--wd", type=float, default=0.01)
    p.add_argument("--norm", choices=("mean", "sum"), default="sum")

    return parser


def _trainer_cfg(args, mode: Optional[str] = None) -> TrainingConfig:
    return TrainingConfig(
        mode=mode or getattr(args, "mode", "auto") or "auto",
        learning_rate=args.lr,
        iterations=args.iters,
        weight_decay=args.wd,
        loss_normalization=args.norm,
        seed=getattr(args, "seed", 0),
    )


def _cmd_gen_patterns(args) -> int:
    pats = gen_random_patterns(args.n, args.p, derive_seed(args.seed, "gen-patterns"))
    save_patterns(pats, args.out, extra_meta={"seed": args.seed, "source": "gen-patterns"})
    write_manifest(args.out, "gen-patterns", {"n": args.n, "p": args.p}, args.seed,
                   {"scheme": "derive_seed(master, 'gen-patterns')"})
    return 0


def _cmd_binarize(args) -> int:
    emb = load_embeddings(args.embeddings)
    pats = binarize_embeddings(emb)
    save_patterns(pats, args.out, extra_meta={"source": args.embeddings, "binarized": True})
    write_manifest(args.out, "binarize", {"embeddings": args.embeddings,
                                          "p": pats.p, "n": pats.n}, 0)
    return 0


def _cmd_train(args) -> int:
    pats = load_patterns(args.patterns)
    cfg = _trainer_cfg(args)
    weights = train_klr(pats, cfg, KernelConfig(gamma=args.gamma))
    meta = dict(weights.training_meta)
    meta["patterns_source"] = args.patterns
    weights = type(weights)(alpha=weights.alpha, kernel=weights.kernel,
                            mode=weights.mode, training_meta=meta)
    save_model(weights, pats, args.out)
    write_manifest(args.out, "train",
                   {"patterns": args.patterns, "mode": cfg.mode, "gamma": args.gamma,
                    "learning_rate": cfg.learning_rate, "iterations": cfg.iterations,
                    "weight_decay": cfg.weight_decay,
                    "loss_normalization": cfg.loss_normalization},
                   args.seed)
    return 0


def _cmd_recall(args) -> int:
    weights, pats = load_model(args.model)
    indices = range(pats.p) if args.pattern is None else [args.pattern]
    rows = []
    for mu in indices:
        per_trial = recall_noisy(
            pats, weights, weights.kernel, mu, args.noise, args.trials,
            derive_seed(args.seed, "recall", mu), args.max_steps,
        )
        for t, rec in enumerate(per_trial):
            rows.append((mu, t, rec["success"], rec["final_overlap"]))
    _write_plain_csv(args.out, EXTRA_SCHEMAS["recall"], rows)
    write_manifest(args.out, "recall",
                   {"model": args.model, "noise": args.noise, "trials": args.trials,
                    "pattern": args.pattern, "max_steps": args.max_steps},
                   args.seed,
                   {"scheme": "derive_seed(master, 'recall', pattern_index)"})
    return 0


def _cmd_sequence(args) -> int:
    weights, pats = load_model(args.model)
    res = run_sequence(pats, weights, weights.kernel)
    rows = [(t + 1, v) for t, v in enumerate(res.target_overlap_trace)]
    write_csv(args.out, "sequence", rows)
    write_manifest(args.out, "sequence",
                   {"model": args.model, "p": pats.p, "n": pats.n,
                    "success": res.success, "first_error_step": res.first_error_step},
                   0)
    return 0


def _cmd_capacity_sweep(args) -> int:
    kernel = KernelConfig(gamma=args.gamma)
    result = capacity_sweep(args.n, args.grid, args.trials, args.seed, kernel,
                            _trainer_cfg(args, mode="sequence"), threads=args.threads)
    write_csv(args.out, "capacity", result.capacity_rows())
    if args.snr_out:
        write_csv(args.snr_out, "snr", result.snr_rows())
        write_manifest(args.snr_out, "capacity-sweep-snr",
                       {"n": args.n, "grid": args.grid, "trials": args.trials,
                        "gamma": args.gamma}, args.seed)
    write_manifest(args.out, "capacity-sweep",
                   {"n": args.n, "grid": args.grid, "trials": args.trials,
                    "gamma": args.gamma, "learning_rate": args.lr,
                    "iterations": args.iters, "weight_decay": args.wd,
                    "loss_normalization": args.norm, "threads": args.threads,
                    "p_c": result.p_c},
                   args.seed,
                   capacity_seed_table(args.seed, args.grid, args.trials))
    return 0


def _morph_cfg(args) -> MorphConfig:
    return MorphConfig(
        ratio_grid=np.linspace(0.0, 1.0, args.grid),
        nu=args.nu,
        trials=args.trials,
        seed=args.seed,
        max_steps=args.max_steps,
    )


def _cmd_morph(args) -> int:
    weights, pats = load_model(args.model)
    xa, xb = pats.data[args.a], pats.data[args.b]
    res = morph_experiment(xa, xb, pats, weights, weights.kernel, _morph_cfg(args))
    rows = [
        (r, res.mean_overlap_a[i], res.std_overlap_a[i],
         res.mean_overlap_b[i], res.std_overlap_b[i],
         res.mean_steps[i], res.spurious_rate[i])
        for i, r in enumerate(res.ratio_grid)
    ]
    write_csv(args.out, "morph", rows)
    write_manifest(args.out, "morph",
                   {"model": args.model, "a": args.a, "b": args.b,
                    "grid_points": args.grid, "nu": args.nu, "trials": args.trials,
                    "max_steps": args.max_steps},
                   args.seed,
                   {"scheme": "derive_seed(master, 'morph', r_index, trial)"})
    return 0


def _cmd_potential(args) -> int:
    weights, pats = load_model(args.model)
    grid = np.linspace(0.0, 1.0, args.grid)
    u = effective_potential_profile(pats.data[args.a], pats.data[args.b],
                                    pats, weights, weights.kernel, grid)
    write_csv(args.out, "potential", list(zip(grid, u)))
    write_manifest(args.out, "potential",
                   {"model": args.model, "a": args.a, "b": args.b,
                    "grid_points": args.grid}, 0)
    return 0


def _cmd_slowdown(args) -> int:
    weights, pats = load_model(args.model)
    grid, steps, nonconv = slowdown_profile(pats.data[args.a], pats.data[args.b],
                                            pats, weights, weights.kernel, _morph_cfg(args))
    _write_plain_csv(args.out, EXTRA_SCHEMAS["slowdown"], zip(grid, steps, nonconv))
    write_manifest(args.out, "slowdown",
                   {"model": args.model, "a": args.a, "b": args.b,
                    "grid_points": args.grid, "nu": args.nu, "trials": args.trials,
                    "max_steps": args.max_steps},
                   args.seed,
                   {"scheme": "derive_seed(master, 'morph', r_index, trial)"})
    return 0


def _cmd_snr(args) -> int:
    weights, pats = load_model(args.model)
    res = snr_analysis(pats, weights, mode=args.mode)
    write_csv(args.out, "snr", [(pats.p, res.signal_mean, res.noise_std, res.snr)])
    write_manifest(args.out, "snr",
                   {"model": args.model, "mode": args.mode or weights.mode,
                    "undefined": res.undefined}, 0)
    return 0


def _cmd_effdim(args) -> int:
    pats = load_patterns(args.patterns)
    spec = eigen_spectrum(gram_matrix(pats, KernelConfig(gamma=args.gamma)))
    _write_plain_csv(args.out, EXTRA_SCHEMAS["effdim"],
                     [(pats.p, spec.d_eff, spec.cover_bound)])
    write_manifest(args.out, "effdim",
                   {"patterns": args.patterns, "gamma": args.gamma, "p": pats.p}, 0)
    return 0


def _cmd_cover(args) -> int:
    rows = cover_comparison(
        args.n, args.grid, KernelConfig(gamma=args.gamma),
        _trainer_cfg(args, mode=args.mode), args.trials,
        master_seed=args.seed, mode=args.mode,
        noise_fraction=args.noise, max_steps=args.max_steps,
    )
    write_csv(args.out, "cover",
              [(r["P"], r["d_eff"], r["cover_bound"], r["accuracy"]) for r in rows])
    write_manifest(args.out, "cover",
                   {"n": args.n, "grid": args.grid, "trials": args.trials,
                    "gamma": args.gamma, "mode": args.mode, "noise": args.noise},
                   args.seed,
                   {"scheme": "derive_seed(master, 'cover', P, trial)"})
    return 0


_COMMANDS = {
    "gen-patterns": _cmd_gen_patterns,
    "binarize": _cmd_binarize,
    "train": _cmd_train,
    "recall": _cmd_recall,
    "sequence": _cmd_sequence,
    "capacity-sweep": _cmd_capacity_sweep,
    "morph": _cmd_morph,
    "potential": _cmd_potential,
    "slowdown": _cmd_slowdown,
    "snr": _cmd_snr,
    "effdim": _cmd_effdim,
    "cover": _cmd_cover,
}


def cli_main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except SystemExit as exc:
        return int(exc.code or 0)
    except Exception as exc:  # report every failure as one parseable line
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}),
              file=sys.stderr)
        return 2


def main():
    raise SystemExit(cli_main())


if __name__ == "__main__":
    main()
