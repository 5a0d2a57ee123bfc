# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels for the spectral eta fixed point and Shannon transform.

These sit in the innermost loop of every asymptotic rate evaluation (two
solves per SCA iteration, one per antenna-sweep probe), so they are kept
free of Python-object traffic. ``_pure`` provides the numpy fallback with
the same signatures.
"""

from libc.math cimport fabs, log2

import numpy as np

cdef double _LOG2E = 1.4426950408889634

BACKEND = "cython"


cdef double _residual(const double[::1] th, double beta, double eta) noexcept nogil:
    cdef Py_ssize_t j, n = th.shape[0]
    cdef double s = 0.0
    for j in range(n):
        s += th[j] / (1.0 + eta * th[j])
    return 1.0 - eta - beta * eta * s / n


def eta_residual(entries, double beta, double eta):
    """Residual of 1 - eta = (beta*eta/L) * sum_j theta_j / (1 + eta*theta_j)."""
    cdef const double[::1] th = np.ascontiguousarray(entries, dtype=np.float64)
    return _residual(th, beta, eta)


def solve_eta(entries, double beta, double tol=1e-12, int max_iter=200):
    """Bisection for the unique root in (0, 1]. Returns (eta, residual)."""
    cdef const double[::1] th = np.ascontiguousarray(entries, dtype=np.float64)
    cdef double lo = 1e-15, hi = 1.0
    cdef double eta, res
    cdef int i
    res = _residual(th, beta, 1.0)
    if fabs(res) <= tol:
        return 1.0, res
    eta = hi
    for i in range(max_iter):
        eta = 0.5 * (lo + hi)
        res = _residual(th, beta, eta)
        if fabs(res) <= tol:
            break
        if res > 0.0:
            lo = eta
        else:
            hi = eta
    return eta, res


def shannon_transform(entries, double eta):
    """(1/L) * sum_j log2(1 + eta*theta_j)."""
    cdef const double[::1] th = np.ascontiguousarray(entries, dtype=np.float64)
    cdef Py_ssize_t j, n = th.shape[0]
    cdef double s = 0.0
    for j in range(n):
        s += log2(1.0 + eta * th[j])
    return s / n


def omega_value(entries, double beta, double eta):
    """beta * V_theta(eta) - log2(eta) + (eta - 1) * log2(e)."""
    return beta * shannon_transform(entries, eta) - log2(eta) + (eta - 1.0) * _LOG2E
