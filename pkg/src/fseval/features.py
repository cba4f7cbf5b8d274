"""Vector primitives: normalization, cosine similarity, prototypes, token fusion."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import AllZeroAttention, DimensionMismatch
from .sampler import Episode
from .store import EmbeddingSet, TokenEmbeddingSet

FUSION_MODES = ("concat", "sum", "cls-only")


@dataclass
class Prototypes:
    matrix: np.ndarray  # (N, d)
    source: str  # "support-mean" or "opta-transported"

    @property
    def n_way(self) -> int:
        return self.matrix.shape[0]

    @property
    def dim(self) -> int:
        return self.matrix.shape[1]


def l2_normalize(v: np.ndarray) -> np.ndarray:
    """Unit-normalize rows (or a single vector); zero vectors pass through."""
    v = np.asarray(v, dtype=np.float64)
    norms = np.linalg.norm(v, axis=-1, keepdims=True)
    return np.divide(v, norms, out=v.copy(), where=norms > 0)


def cosine_sim(a: np.ndarray, b: np.ndarray) -> float:
    """Cosine similarity; 0 if either argument is the zero vector."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0 or nb == 0:
        return 0.0
    return float(np.dot(a, b) / (na * nb))


def compute_prototypes(es: EmbeddingSet, episode: Episode) -> Prototypes:
    """Class prototypes as the mean of the K raw support features per class."""
    protos = es.features[episode.support].mean(axis=1)
    return Prototypes(matrix=protos, source="support-mean")


def fuse_tokens(
    cls_token: np.ndarray,
    patch_tokens: np.ndarray,
    attn_weights: np.ndarray,
    mode: str = "concat",
) -> np.ndarray:
    """Combine a cls token with the attention-weighted patch mean.

    concat -> [cls | weighted mean] (2d), sum -> cls + weighted mean (d),
    cls-only -> cls (d).
    """
    if mode not in FUSION_MODES:
        raise DimensionMismatch(f"unknown fusion mode {mode!r}")
    cls_token = np.asarray(cls_token, dtype=np.float64)
    if mode == "cls-only":
        return cls_token.copy()
    patch_tokens = np.asarray(patch_tokens, dtype=np.float64)
    attn_weights = np.asarray(attn_weights, dtype=np.float64)
    total = attn_weights.sum()
    if (attn_weights < 0).any() or total <= 0:
        raise AllZeroAttention("attention weights must be nonnegative, not all zero")
    weighted_mean = attn_weights @ patch_tokens / total
    if mode == "concat":
        return np.concatenate([cls_token, weighted_mean])
    return cls_token + weighted_mean


def fuse_set(tokens: TokenEmbeddingSet, mode: str = "concat") -> EmbeddingSet:
    """Fuse every sample of a token set into a flat EmbeddingSet."""
    rows = [
        fuse_tokens(tokens.cls_tokens[i], tokens.patch_tokens[i],
                    tokens.attn_weights[i], mode)
        for i in range(tokens.n)
    ]
    return EmbeddingSet(
        features=np.stack(rows), labels=tokens.labels.copy(), c=tokens.c
    )
