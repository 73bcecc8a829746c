"""Embedding extraction for the associative-memory harness (file-level contract)."""

from .extractor import (
    EMBED_DIM,
    DownloadError,
    ExtractionConfig,
    IncompleteOutputError,
    default_transform,
    extract_embeddings,
    load_cifar_test,
    load_pretrained_backbone,
    meta_path,
    strip_classifier,
    weight_checksum,
)

__version__ = "0.1.0"

__all__ = [
    "EMBED_DIM",
    "DownloadError",
    "ExtractionConfig",
    "IncompleteOutputError",
    "default_transform",
    "extract_embeddings",
    "load_cifar_test",
    "load_pretrained_backbone",
    "meta_path",
    "strip_classifier",
    "weight_checksum",
    "__version__",
]
