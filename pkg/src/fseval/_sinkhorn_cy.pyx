# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled log-domain Sinkhorn kernel with uniform marginals.

Mirrors _sinkhorn_py.sinkhorn_uniform update-for-update; the pure version
is the import-time fallback when this extension is unavailable.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp, fabs, log

cnp.import_array()


def sinkhorn_uniform(D, double eps, int max_iters, double tol):
    """Returns (plan, iters_used, converged, max_marginal_violation)."""
    cdef double[:, ::1] A = np.ascontiguousarray(
        -np.asarray(D, dtype=np.float64) / eps
    )
    cdef Py_ssize_t nq = A.shape[0], n = A.shape[1], i, j
    cdef int it
    plan_arr = np.empty((nq, n), dtype=np.float64)
    cdef double[:, ::1] plan = plan_arr
    cdef double[::1] u = np.zeros(nq)
    cdef double[::1] v = np.zeros(n)
    cdef double[::1] csum = np.empty(n)
    cdef double log_r = -log(<double> nq), log_c = -log(<double> n)
    cdef double r = 1.0 / nq, c = 1.0 / n
    cdef double m, s, t, p, rsum, violation = 0.0

    for it in range(1, max_iters + 1):
        for i in range(nq):
            m = A[i, 0] + v[0]
            for j in range(1, n):
                t = A[i, j] + v[j]
                if t > m:
                    m = t
            s = 0.0
            for j in range(n):
                s += exp(A[i, j] + v[j] - m)
            u[i] = log_r - (m + log(s))
        for j in range(n):
            m = A[0, j] + u[0]
            for i in range(1, nq):
                t = A[i, j] + u[i]
                if t > m:
                    m = t
            s = 0.0
            for i in range(nq):
                s += exp(A[i, j] + u[i] - m)
            v[j] = log_c - (m + log(s))
        violation = 0.0
        for j in range(n):
            csum[j] = 0.0
        for i in range(nq):
            rsum = 0.0
            for j in range(n):
                p = exp(A[i, j] + u[i] + v[j])
                plan[i, j] = p
                rsum += p
                csum[j] += p
            if fabs(rsum - r) > violation:
                violation = fabs(rsum - r)
        for j in range(n):
            if fabs(csum[j] - c) > violation:
                violation = fabs(csum[j] - c)
        if violation < tol:
            return plan_arr, it, True, violation
    return plan_arr, max_iters, False, violation
