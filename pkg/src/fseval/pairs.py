"""Nearest-neighbor pseudo-label pairing and the pairwise BCE objective."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BatchTooSmall, DimensionMismatch, InvalidConfig
from .features import l2_normalize


@dataclass
class PairAssignment:
    pair_of: np.ndarray  # (B,) index of each row's cosine-nearest neighbor
    similarity: np.ndarray  # (B,) cosine similarity to that neighbor
    selected: np.ndarray  # (B,) bool, top-rho most similar pairs

    @property
    def batch_size(self) -> int:
        return self.pair_of.shape[0]


def assign_pairs(batch: np.ndarray, rho: float = 1.0) -> PairAssignment:
    """Pair each row with its cosine-nearest neighbor (self excluded, ties to
    the lowest index); select the ceil(rho * B) most similar pairs."""
    batch = np.asarray(batch, dtype=np.float64)
    if batch.ndim != 2:
        raise DimensionMismatch(f"batch must be 2-D, got shape {batch.shape}")
    B = batch.shape[0]
    if B < 2:
        raise BatchTooSmall(f"need at least 2 rows, got {B}")
    if not 0.0 < rho <= 1.0:
        raise InvalidConfig(f"rho must be in (0, 1], got {rho}")
    zn = l2_normalize(batch)
    sims = zn @ zn.T
    np.fill_diagonal(sims, -np.inf)
    pair_of = sims.argmax(axis=1)
    similarity = sims[np.arange(B), pair_of]
    n_selected = int(np.ceil(rho * B))
    # stable sort keeps the lowest-index rows among equal similarities
    order = np.argsort(-similarity, kind="stable")
    selected = np.zeros(B, dtype=bool)
    selected[order[:n_selected]] = True
    return PairAssignment(pair_of=pair_of, similarity=similarity, selected=selected)


def bce_pair_loss(batch: np.ndarray, assignment: PairAssignment) -> float:
    """Mean over selected rows of -log <sigma(z_i), sigma(z_pair)>, with
    sigma = L2 normalization and the inner product clamped to [1e-7, 1]."""
    batch = np.asarray(batch, dtype=np.float64)
    if batch.shape[0] != assignment.batch_size:
        raise DimensionMismatch("assignment does not match batch size")
    zn = l2_normalize(batch)
    inner = (zn * zn[assignment.pair_of]).sum(axis=1)
    inner = np.clip(inner, 1e-7, 1.0)
    sel = assignment.selected
    return float(-np.log(inner[sel]).mean())


def pair_label_agreement(assignment: PairAssignment, labels: np.ndarray) -> float:
    """Diagnostic: fraction of selected pairs whose rows share a true label."""
    labels = np.asarray(labels)
    sel = assignment.selected
    return float(
        (labels[sel] == labels[assignment.pair_of[sel]]).mean()
    )
