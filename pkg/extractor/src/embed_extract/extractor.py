"""CIFAR-10 test-set embedding extraction with a pretrained ResNet-18.

Features are tapped at the output of the global average pool — the standard
512-dimensional penultimate representation — with the classifier head
replaced by an identity.  Inference runs in eval mode under no_grad, images
are processed in canonical test-set index order, and the output is a
headerless CSV (one row per image, repr-formatted floats) plus a JSON
sidecar at `<out minus extension>.meta.json` recording the model identity,
a SHA-256 checksum of the weights, and the exact preprocessing, so every
embedding file is attributable and reruns are byte-identical.

The consumer contract is file-level: the associative-memory harness loads
the CSV with its own `load_embeddings`/`binarize` tooling; nothing here
imports that package.
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass
from typing import Optional

import numpy as np
import torch
from torch import nn
from torch.utils.data import DataLoader, Dataset

EMBED_DIM = 512

# canonical preprocessing of the publicly distributed ImageNet-pretrained
# ResNet-18 weights, applied verbatim to the 32x32 CIFAR inputs
PREPROCESSING = (
    "resize 256 (bilinear), center crop 224, scale to [0,1], "
    "normalize mean=(0.485, 0.456, 0.406) std=(0.229, 0.224, 0.225)"
)


class DownloadError(RuntimeError):
    """Pretrained weights or dataset could not be obtained."""


class IncompleteOutputError(RuntimeError):
    """Fewer embedding rows were produced than dataset items."""


@dataclass(frozen=True)
class ExtractionConfig:
    out: str
    batch_size: int = 256
    device: str = "cpu"
    data_root: str = "./data"
    preprocessing: str = PREPROCESSING

    def __post_init__(self):
        if self.batch_size < 1:
            raise ValueError(f"batch_size must be >= 1, got {self.batch_size}")


def default_transform():
    from torchvision import transforms

    return transforms.Compose(
        [
            transforms.Resize(256),
            transforms.CenterCrop(224),
            transforms.ToTensor(),
            transforms.Normalize(mean=[0.485, 0.456, 0.406], std=[0.229, 0.224, 0.225]),
        ]
    )


def load_pretrained_backbone() -> nn.Module:
    from torchvision.models import ResNet18_Weights, resnet18

    try:
        return resnet18(weights=ResNet18_Weights.IMAGENET1K_V1)
    except Exception as exc:
        raise DownloadError(f"could not obtain pretrained ResNet-18 weights: {exc}") from exc


def load_cifar_test(root: str) -> Dataset:
    from torchvision.datasets import CIFAR10

    try:
        return CIFAR10(root=root, train=False, download=True, transform=default_transform())
    except Exception as exc:
        raise DownloadError(f"could not obtain the CIFAR-10 test set: {exc}") from exc


def strip_classifier(model: nn.Module) -> nn.Module:
    """Replace the fc head so forward() returns the flattened global-pool features."""
    model.fc = nn.Identity()
    return model


def weight_checksum(model: nn.Module) -> str:
    """SHA-256 over all state-dict tensors in sorted name order."""
    h = hashlib.sha256()
    for name, tensor in sorted(model.state_dict().items()):
        h.update(name.encode("utf-8"))
        h.update(tensor.detach().cpu().contiguous().numpy().tobytes())
    return h.hexdigest()


def meta_path(path: str) -> str:
    base, _ext = os.path.splitext(path)
    return base + ".meta.json"


def _write_csv_atomic(path: str, data: np.ndarray):
    # full file staged first: an interrupted run never leaves a short CSV
    tmp = path + ".tmp"
    with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
        for row in data:
            fh.write(",".join(repr(float(v)) for v in row))
            fh.write("\n")
    os.replace(tmp, path)


def extract_embeddings(
    cfg: ExtractionConfig,
    model: Optional[nn.Module] = None,
    dataset: Optional[Dataset] = None,
    model_name: Optional[str] = None,
    dataset_name: Optional[str] = None,
) -> np.ndarray:
    """Run the backbone over the dataset and write CSV + sidecar.

    With no model/dataset given, uses the pretrained ResNet-18 and the
    CIFAR-10 test set (downloaded on demand into cfg.data_root).  Passing
    either explicitly supports offline runs and tests; the sidecar then
    records the caller-provided identity.
    """
    device = torch.device(cfg.device)
    if model is None:
        model = load_pretrained_backbone()
        model_name = model_name or "resnet18/IMAGENET1K_V1"
    else:
        model_name = model_name or f"custom:{type(model).__name__}"
    model = strip_classifier(model).to(device).eval()
    checksum = weight_checksum(model)

    if dataset is None:
        dataset = load_cifar_test(cfg.data_root)
        dataset_name = dataset_name or "cifar10-test"
    else:
        dataset_name = dataset_name or f"custom:{type(dataset).__name__}"

    loader = DataLoader(dataset, batch_size=cfg.batch_size, shuffle=False, num_workers=0)
    chunks = []
    with torch.no_grad():
        for batch in loader:
            images = batch[0] if isinstance(batch, (list, tuple)) else batch
            feats = model(images.to(device))
            if feats.ndim != 2 or feats.shape[1] != EMBED_DIM:
                raise ValueError(
                    f"backbone produced shape {tuple(feats.shape)}, expected (batch, {EMBED_DIM})"
                )
            chunks.append(feats.cpu().numpy().astype(np.float64))
    data = np.concatenate(chunks, axis=0) if chunks else np.empty((0, EMBED_DIM))
    if data.shape[0] != len(dataset):
        raise IncompleteOutputError(
            f"produced {data.shape[0]} embedding rows for {len(dataset)} dataset items"
        )
    if not np.all(np.isfinite(data)):
        raise ValueError("non-finite values in extracted embeddings")

    _write_csv_atomic(cfg.out, data)
    meta = {
        "kind": "embeddings",
        "p": int(data.shape[0]),
        "d": int(data.shape[1]),
        "model": model_name,
        "weights_sha256": checksum,
        "preprocessing": cfg.preprocessing,
        "dataset": dataset_name,
        "order": "canonical test-set index order",
        "batch_size": cfg.batch_size,
        "device": cfg.device,
    }
    with open(meta_path(cfg.out), "w", encoding="utf-8") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return data
