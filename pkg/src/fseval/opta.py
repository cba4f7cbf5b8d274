"""Transductive prototype alignment via entropic optimal transport.

Builds the query-to-prototype cost matrix, solves the equipartitioned
transport problem with Sinkhorn-Knopp, and remaps prototypes onto the
query embedding region. The Sinkhorn inner loop runs on the compiled
kernel when available; set FSEVAL_PURE_PYTHON=1 to force the fallback.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np

from . import _sinkhorn_py
from .errors import DimensionMismatch, InvalidConfig, NonFiniteCost, ZeroRow
from .features import Prototypes, compute_prototypes, l2_normalize
from .protonet import Prediction, classify
from .sampler import Episode
from .store import EmbeddingSet

if os.environ.get("FSEVAL_PURE_PYTHON"):
    _kernel = _sinkhorn_py
else:
    try:
        from . import _sinkhorn_cy as _kernel
    except ImportError:
        _kernel = _sinkhorn_py

COST_METRICS = ("sq-euclidean-normalized", "euclidean", "one-minus-cosine")


def sinkhorn_backend() -> str:
    """'compiled' when the Cython kernel is active, else 'pure-python'."""
    return "compiled" if _kernel.__name__.endswith("_cy") else "pure-python"


@dataclass(frozen=True)
class SinkhornConfig:
    epsilon: float = 0.1
    max_iters: int = 1000
    tol: float = 1e-8
    passes: int = 1

    def __post_init__(self):
        if self.epsilon <= 0:
            raise InvalidConfig(f"epsilon must be > 0, got {self.epsilon}")
        if self.max_iters < 1:
            raise InvalidConfig(f"max_iters must be >= 1, got {self.max_iters}")
        if self.tol <= 0:
            raise InvalidConfig(f"tol must be > 0, got {self.tol}")
        if self.passes < 1:
            raise InvalidConfig(f"passes must be >= 1, got {self.passes}")


@dataclass
class CostMatrix:
    matrix: np.ndarray  # (NQ, N)
    metric: str


@dataclass
class TransportPlan:
    matrix: np.ndarray  # (NQ, N), rows sum to 1/NQ, columns to 1/N
    converged: bool
    iters_used: int
    violation: float = field(default=0.0)

    @property
    def row_marginal(self) -> float:
        return 1.0 / self.matrix.shape[0]

    @property
    def col_marginal(self) -> float:
        return 1.0 / self.matrix.shape[1]


def cost_matrix(
    queries: np.ndarray, protos: Prototypes, metric: str = "sq-euclidean-normalized"
) -> CostMatrix:
    """Pairwise query-to-prototype distances; default is squared Euclidean
    after L2-normalizing both sides (= 2 - 2 cos on nonzero vectors)."""
    if metric not in COST_METRICS:
        raise InvalidConfig(f"unknown cost metric {metric!r}")
    queries = np.asarray(queries, dtype=np.float64)
    if queries.ndim != 2 or queries.shape[1] != protos.dim:
        raise DimensionMismatch(
            f"queries {queries.shape} vs prototype dim {protos.dim}"
        )
    if metric == "sq-euclidean-normalized":
        qn = l2_normalize(queries)
        pn = l2_normalize(protos.matrix)
        D = np.maximum(
            (qn * qn).sum(1)[:, None] + (pn * pn).sum(1)[None, :] - 2.0 * qn @ pn.T,
            0.0,
        )
    elif metric == "euclidean":
        diff = queries[:, None, :] - protos.matrix[None, :, :]
        D = np.sqrt((diff**2).sum(-1))
    else:  # one-minus-cosine
        sims = l2_normalize(queries) @ l2_normalize(protos.matrix).T
        D = np.maximum(1.0 - sims, 0.0)
    return CostMatrix(matrix=D, metric=metric)


def sinkhorn(D: CostMatrix, cfg: SinkhornConfig) -> TransportPlan:
    """Entropic OT plan with uniform marginals r = 1/NQ, c = 1/N."""
    mat = np.asarray(D.matrix, dtype=np.float64)
    if not np.isfinite(mat).all():
        raise NonFiniteCost("cost matrix contains NaN or Inf")
    plan, iters, converged, violation = _kernel.sinkhorn_uniform(
        mat, cfg.epsilon, cfg.max_iters, cfg.tol
    )
    return TransportPlan(
        matrix=np.asarray(plan),
        converged=bool(converged),
        iters_used=int(iters),
        violation=float(violation),
    )


def transport_prototypes(plan: TransportPlan, queries: np.ndarray) -> Prototypes:
    """Row-normalize the plan and map prototypes onto the queries:
    P_hat = pi_hat^T Z_Q (columns of pi_hat sum to ~Q, so P_hat is Q-scaled)."""
    pi = plan.matrix
    row_sums = pi.sum(axis=1, keepdims=True)
    if (row_sums <= 0).any():
        raise ZeroRow("transport plan has an all-zero row")
    pi_hat = pi / row_sums
    return Prototypes(matrix=pi_hat.T @ np.asarray(queries, dtype=np.float64),
                      source="opta-transported")


def opta_classify(
    es: EmbeddingSet,
    episode: Episode,
    cfg: SinkhornConfig,
    metric: str = "sq-euclidean-normalized",
) -> list[Prediction]:
    """Run {prototypes -> cost -> sinkhorn -> transport} for cfg.passes
    passes, then classify queries by cosine to the transported prototypes."""
    queries = es.features[episode.query.reshape(-1)]
    protos = compute_prototypes(es, episode)
    for _ in range(cfg.passes):
        D = cost_matrix(queries, protos, metric)
        plan = sinkhorn(D, cfg)
        protos = transport_prototypes(plan, queries)
    return classify(es, episode, protos)
