"""Inductive nearest-prototype classification by cosine similarity."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch
from .features import Prototypes, l2_normalize
from .sampler import Episode
from .store import EmbeddingSet


@dataclass
class Prediction:
    query_index: int  # row index into the embedding set
    scores: np.ndarray  # (N,) cosine similarities to each prototype
    predicted_class: int  # slot index into episode.classes


def classify(
    es: EmbeddingSet, episode: Episode, protos: Prototypes
) -> list[Prediction]:
    """One Prediction per query (class-major order), argmax with lowest-index
    tie-break."""
    n_way = episode.classes.shape[0]
    if protos.n_way != n_way:
        raise DimensionMismatch(
            f"{protos.n_way} prototypes for a {n_way}-way episode"
        )
    queries = es.features[episode.query.reshape(-1)]
    if queries.shape[1] != protos.dim:
        raise DimensionMismatch(
            f"query dim {queries.shape[1]} vs prototype dim {protos.dim}"
        )
    sims = l2_normalize(queries) @ l2_normalize(protos.matrix).T
    flat_idx = episode.query.reshape(-1)
    return [
        Prediction(
            query_index=int(flat_idx[i]),
            scores=sims[i],
            predicted_class=int(np.argmax(sims[i])),
        )
        for i in range(sims.shape[0])
    ]


def episode_accuracy(preds: list[Prediction], episode: Episode) -> float:
    """Fraction of queries whose predicted class slot matches the true slot."""
    n_way, q_query = episode.query.shape
    assert len(preds) == n_way * q_query
    correct = sum(
        1 for i, p in enumerate(preds) if p.predicted_class == i // q_query
    )
    return correct / len(preds)
