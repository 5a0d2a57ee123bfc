"""Backend selection for the fixed-point kernels.

Prefers the compiled extension; falls back to the numpy implementation.
Set ``FDMIMOME_PURE_PY=1`` to force the fallback (used by the benchmark
and the backend-equivalence tests).
"""

import os

if os.environ.get("FDMIMOME_PURE_PY"):
    from . import _pure as _impl
else:
    try:
        from . import _etacore as _impl  # type: ignore[attr-defined]
    except ImportError:
        from . import _pure as _impl

BACKEND = _impl.BACKEND
eta_residual = _impl.eta_residual
solve_eta = _impl.solve_eta
shannon_transform = _impl.shannon_transform
omega_value = _impl.omega_value

__all__ = [
    "BACKEND",
    "eta_residual",
    "solve_eta",
    "shannon_transform",
    "omega_value",
]
