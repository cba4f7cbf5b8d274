"""Pure-numpy log-domain Sinkhorn kernel (fallback for the compiled version).

Solves min <pi, D> - eps * H(pi) over the transportation polytope with
uniform marginals r = 1/nq, c = 1/n, via stabilized dual-potential updates.
"""

from __future__ import annotations

import numpy as np


def _logsumexp(a: np.ndarray, axis: int) -> np.ndarray:
    m = a.max(axis=axis, keepdims=True)
    return (m + np.log(np.exp(a - m).sum(axis=axis, keepdims=True))).squeeze(axis)


def sinkhorn_uniform(
    D: np.ndarray, eps: float, max_iters: int, tol: float
) -> tuple[np.ndarray, int, bool, float]:
    """Returns (plan, iters_used, converged, max_marginal_violation)."""
    nq, n = D.shape
    A = -np.asarray(D, dtype=np.float64) / eps
    u = np.zeros(nq)
    v = np.zeros(n)
    log_r = -np.log(nq)
    log_c = -np.log(n)
    r = 1.0 / nq
    c = 1.0 / n
    plan = np.empty_like(A)
    violation = np.inf
    for it in range(1, max_iters + 1):
        u = log_r - _logsumexp(A + v[None, :], axis=1)
        v = log_c - _logsumexp(A + u[:, None], axis=0)
        plan = np.exp(A + u[:, None] + v[None, :])
        violation = max(
            np.abs(plan.sum(axis=1) - r).max(),
            np.abs(plan.sum(axis=0) - c).max(),
        )
        if violation < tol:
            return plan, it, True, float(violation)
    return plan, max_iters, False, float(violation)
