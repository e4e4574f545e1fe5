"""Select the compiled tableau kernels when available.

Set ``COLORQEC_PURE_PYTHON=1`` to force the numpy fallback.
"""
from __future__ import annotations

import os

from . import _kernels_py

if os.environ.get("COLORQEC_PURE_PYTHON", "") not in ("", "0"):
    _impl = _kernels_py
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]
    except ImportError:  # extension not built
        _impl = _kernels_py

BACKEND = _impl.BACKEND
anticommute_mask = _impl.anticommute_mask
rowmul = _impl.rowmul
mul_rows_by_pauli = _impl.mul_rows_by_pauli
peek = _impl.peek
peek_batch = _impl.peek_batch
measure = _impl.measure
measure_batch = _impl.measure_batch
syndrome_batch = _impl.syndrome_batch
symplectic_matrix = _impl.symplectic_matrix


def backends() -> dict:
    """All importable backends keyed by name."""
    out = {"python": _kernels_py}
    try:
        from . import _kernels  # type: ignore[attr-defined]

        out["cython"] = _kernels
    except ImportError:
        pass
    return out
