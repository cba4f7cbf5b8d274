"""Batch-inference export pipeline: image folder -> FSE1 embedding file."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
import torch
from PIL import Image

from . import fse1
from .vit import build_model

IMAGE_EXTENSIONS = {".png", ".jpg", ".jpeg", ".bmp"}


class ExportError(Exception):
    pass


class CheckpointLoadError(ExportError):
    pass


class EmptyDataset(ExportError):
    pass


@dataclass
class ExportConfig:
    model: str  # "tiny" or a checkpoint path
    dataset_dir: str
    output: str
    split: str = "."  # subdirectory of dataset_dir holding class folders
    batch_size: int = 32
    kind: str = "fused"  # fused | tokens
    fusion: str = "concat"  # concat | sum | cls-only (kind=fused only)
    device: str = "cpu"
    seed: int = 0

    def __post_init__(self):
        if self.kind not in ("fused", "tokens"):
            raise ExportError(f"unknown output kind {self.kind!r}")
        if self.kind == "fused" and self.fusion not in ("concat", "sum", "cls-only"):
            raise ExportError(f"kind=fused needs a fusion mode, got {self.fusion!r}")


def list_dataset(cfg: ExportConfig) -> tuple[list[Path], np.ndarray, int]:
    """Class subdirectories in sorted order define labels 0..c-1; files are
    appended in sorted order within each class."""
    root = Path(cfg.dataset_dir) / cfg.split
    if not root.is_dir():
        raise EmptyDataset(f"dataset directory {root} does not exist")
    classes = sorted(p for p in root.iterdir() if p.is_dir())
    paths, labels = [], []
    for label, cls_dir in enumerate(classes):
        for img in sorted(cls_dir.iterdir()):
            if img.suffix.lower() in IMAGE_EXTENSIONS:
                paths.append(img)
                labels.append(label)
    if not paths:
        raise EmptyDataset(f"no images under {root}")
    return paths, np.asarray(labels, dtype=np.int64), len(classes)


def load_batch(paths: list[Path], image_size: int) -> torch.Tensor:
    arrays = []
    for path in paths:
        with Image.open(path) as img:
            img = img.convert("RGB").resize((image_size, image_size),
                                            Image.BILINEAR)
            arrays.append(np.asarray(img, dtype=np.float32) / 255.0)
    batch = np.stack(arrays).transpose(0, 3, 1, 2)
    return torch.from_numpy((batch - 0.5) / 0.5)


def fuse(cls_tok: np.ndarray, patches: np.ndarray, attn: np.ndarray,
         mode: str) -> np.ndarray:
    """Same combination the engine applies: attention-weighted patch mean,
    computed in float64 from the float32 tokens so fused files match the
    engine's fuse_tokens on the tokens file."""
    cls64 = cls_tok.astype(np.float64)
    if mode == "cls-only":
        return cls64
    attn64 = attn.astype(np.float64)
    weighted = np.einsum("bp,bpd->bd", attn64, patches.astype(np.float64))
    weighted /= attn64.sum(axis=1, keepdims=True)
    if mode == "concat":
        return np.concatenate([cls64, weighted], axis=1)
    return cls64 + weighted


def export(cfg: ExportConfig) -> None:
    """Run deterministic eval-mode inference over the dataset and write the
    FSE1 file described by cfg."""
    try:
        model = build_model(cfg.model, seed=cfg.seed)
    except (OSError, KeyError, RuntimeError) as exc:
        raise CheckpointLoadError(f"cannot load model {cfg.model!r}: {exc}") from exc
    model.to(cfg.device)
    paths, labels, c = list_dataset(cfg)

    cls_all, patch_all, attn_all = [], [], []
    with torch.no_grad():
        for start in range(0, len(paths), cfg.batch_size):
            batch = load_batch(paths[start : start + cfg.batch_size],
                               model.image_size).to(cfg.device)
            cls_tok, patches, attn = model.forward_tokens(batch)
            cls_all.append(cls_tok.cpu().numpy().astype(np.float32))
            patch_all.append(patches.cpu().numpy().astype(np.float32))
            attn_all.append(attn.cpu().numpy().astype(np.float32))
    cls_tok = np.concatenate(cls_all)
    patches = np.concatenate(patch_all)
    attn = np.concatenate(attn_all)

    if cfg.kind == "tokens":
        fse1.write_tokens(cfg.output, cls_tok, patches, attn, labels, c)
    else:
        fse1.write_fused(cfg.output, fuse(cls_tok, patches, attn, cfg.fusion),
                         labels, c)
