"""Kernel backend selection.

The hot numeric kernels exist twice: a compiled Cython extension
(``cmvspec._kernels_cy``) and a pure-numpy fallback
(``cmvspec._kernels_py``).  The compiled backend is preferred at import
time; set ``CMVSPEC_PURE_PYTHON=1`` to force the fallback.  Both implement
the same algorithms; ``benchmarks/bench_kernels.py`` compares them.
"""

from __future__ import annotations

import os

if os.environ.get("CMVSPEC_PURE_PYTHON", "") not in ("", "0"):
    from . import _kernels_py as _impl

    BACKEND = "python"
else:
    try:
        from . import _kernels_cy as _impl  # type: ignore[attr-defined]

        BACKEND = "cython"
    except ImportError:
        from . import _kernels_py as _impl

        BACKEND = "python"

hessenberg = _impl.hessenberg
hessenberg_eigvals = _impl.hessenberg_eigvals
hessenberg_inverse_iteration = _impl.hessenberg_inverse_iteration
hermitian_tridiagonalize = _impl.hermitian_tridiagonalize
tridiag_eigvals = _impl.tridiag_eigvals


def backend() -> str:
    """Name of the active kernel backend ("cython" or "python")."""
    return BACKEND
