"""Kernel-logistic-regression-trained Hopfield associative memories.

A library and experiment CLI for studying RBF-kernel associative memories
whose dual weights are learned by per-neuron kernel logistic regression:
storage capacity far beyond the classical Hopfield limit, cyclic sequence
recall, attractor-boundary geometry (morphing, effective potential,
critical slowing down), signal-to-noise collapse, and participation-ratio
effective dimension.
"""

__version__ = "0.1.0"

from .core import (
    DimensionError,
    DualWeights,
    GramSizeError,
    KernelConfig,
    PatternSet,
    as_state,
    gram_matrix,
    kernel_to_patterns,
    local_field,
    overlap,
    pseudo_energy,
    rbf_kernel,
)
from .training import (
    TargetSet,
    TrainingConfig,
    TrainingDivergedError,
    build_targets,
    logistic_loss,
    loss_gradient,
    train_klr,
)
from .dynamics import (
    RunStatus,
    SequenceRunResult,
    recall_noisy,
    run_sequence,
    run_to_convergence,
    sequence_success_from_trace,
    update_sync,
)
from .analysis import (
    MorphConfig,
    MorphResult,
    SnrResult,
    SpectrumResult,
    cover_comparison,
    effective_potential_profile,
    eigen_spectrum,
    morph_experiment,
    morph_state,
    participation_ratio,
    slowdown_profile,
    snr_analysis,
)
from .data import (
    EmbeddingSet,
    binarize_embeddings,
    gen_random_patterns,
    load_embeddings,
    load_patterns,
    save_embeddings,
    save_patterns,
)
from .model_io import ModelFormatError, load_model, save_model
from .experiments import CapacityResult, capacity_sweep
from .seeding import derive_seed, derived_rng

__all__ = [
    "DimensionError",
    "DualWeights",
    "GramSizeError",
    "KernelConfig",
    "PatternSet",
    "as_state",
    "gram_matrix",
    "kernel_to_patterns",
    "local_field",
    "overlap",
    "pseudo_energy",
    "rbf_kernel",
    "TargetSet",
    "TrainingConfig",
    "TrainingDivergedError",
    "build_targets",
    "logistic_loss",
    "loss_gradient",
    "train_klr",
    "RunStatus",
    "SequenceRunResult",
    "recall_noisy",
    "run_sequence",
    "run_to_convergence",
    "sequence_success_from_trace",
    "update_sync",
    "MorphConfig",
    "MorphResult",
    "SnrResult",
    "SpectrumResult",
    "cover_comparison",
    "effective_potential_profile",
    "eigen_spectrum",
    "morph_experiment",
    "morph_state",
    "participation_ratio",
    "slowdown_profile",
    "snr_analysis",
    "EmbeddingSet",
    "binarize_embeddings",
    "gen_random_patterns",
    "load_embeddings",
    "load_patterns",
    "save_embeddings",
    "save_patterns",
    "ModelFormatError",
    "load_model",
    "save_model",
    "CapacityResult",
    "capacity_sweep",
    "derive_seed",
    "derived_rng",
]
