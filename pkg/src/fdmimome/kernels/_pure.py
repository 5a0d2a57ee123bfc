"""Pure-numpy fallback for the spectral fixed-point kernels.

Same contract as the compiled module ``_etacore``; used when the extension
is unavailable or when ``FDMIMOME_PURE_PY`` is set.
"""

import numpy as np

_LOG2E = float(np.log2(np.e))

BACKEND = "pure"


def eta_residual(entries, beta, eta):
    """Residual of 1 - eta = (beta*eta/L) * sum_j theta_j / (1 + eta*theta_j)."""
    th = np.asarray(entries, dtype=np.float64)
    return 1.0 - eta - beta * eta * float(np.sum(th / (1.0 + eta * th))) / th.size


def solve_eta(entries, beta, tol=1e-12, max_iter=200):
    """Bisection for the unique root in (0, 1]. Returns (eta, residual).

    The right side of the fixed-point equation is monotone increasing in eta
    while the left side decreases, so the bracket [1e-15, 1] always contains
    exactly one root. The stop test is on the residual, not the bracket width.
    """
    th = np.asarray(entries, dtype=np.float64)
    res_hi = eta_residual(th, beta, 1.0)
    if abs(res_hi) <= tol:
        return 1.0, res_hi
    lo, hi = 1e-15, 1.0
    eta, res = hi, res_hi
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        res = eta_residual(th, beta, mid)
        eta = mid
        if abs(res) <= tol:
            break
        if res > 0.0:
            lo = mid
        else:
            hi = mid
    return eta, res


def shannon_transform(entries, eta):
    """(1/L) * sum_j log2(1 + eta*theta_j)."""
    th = np.asarray(entries, dtype=np.float64)
    return float(np.sum(np.log2(1.0 + eta * th))) / th.size


def omega_value(entries, beta, eta):
    """beta * V_theta(eta) - log2(eta) + (eta - 1) * log2(e)."""
    return beta * shannon_transform(entries, eta) - np.log2(eta) + (eta - 1.0) * _LOG2E
