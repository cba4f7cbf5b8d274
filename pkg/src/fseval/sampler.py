"""N-way K-shot Q-query episode sampling with replayable per-episode streams."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._rng import SplitMix64, child_seed
from .errors import InvalidConfig, NotEnoughClasses
from .store import EmbeddingSet

@dataclass(frozen=True)
class EpisodeSpec:
    n_way: int
    k_shot: int
    q_query: int

    def __post_init__(self):
        if self.n_way < 2:
            raise InvalidConfig(f"n_way must be >= 2, got {self.n_way}")
        if self.k_shot < 1:
            raise InvalidConfig(f"k_shot must be >= 1, got {self.k_shot}")
        if self.q_query < 1:
            raise InvalidConfig(f"q_query must be >= 1, got {self.q_query}")


@dataclass(frozen=True)
class Episode:
    classes: np.ndarray  # (N,) class ids
    support: np.ndarray  # (N, K) sample row indices
    query: np.ndarray  # (N, Q) sample row indices
    episode_id: int


def eligible_classes(es: EmbeddingSet, spec: EpisodeSpec) -> list[int]:
    """Class ids with at least K+Q samples, ascending."""
    need = spec.k_shot + spec.q_query
    return [j for j in range(es.c) if len(es.class_index[j]) >= need]


def sample_episode(
    es: EmbeddingSet, spec: EpisodeSpec, seed: int, episode_id: int
) -> Episode:
    """Draw one episode; a pure function of (set, spec, seed, episode_id).

    Classes with fewer than K+Q samples are skipped; raises NotEnoughClasses
    if fewer than N classes remain.
    """
    pool = eligible_classes(es, spec)
    if len(pool) < spec.n_way:
        raise NotEnoughClasses(
            f"need {spec.n_way} classes with >= {spec.k_shot + spec.q_query} "
            f"samples, only {len(pool)} eligible"
        )
    rng = SplitMix64(child_seed(seed, episode_id))
    classes = rng.partial_shuffle(list(pool), spec.n_way)
    support = np.empty((spec.n_way, spec.k_shot), dtype=np.int64)
    query = np.empty((spec.n_way, spec.q_query), dtype=np.int64)
    for slot, cls in enumerate(classes):
        positions = rng.partial_shuffle(
            list(range(len(es.class_index[cls]))), spec.k_shot + spec.q_query
        )
        rows = es.class_index[cls][positions]
        support[slot] = rows[: spec.k_shot]
        query[slot] = rows[spec.k_shot :]
    return Episode(
        classes=np.asarray(classes, dtype=np.int64),
        support=support,
        query=query,
        episode_id=episode_id,
    )
