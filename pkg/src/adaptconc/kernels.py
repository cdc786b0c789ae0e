"""Backend selection for the simulation kernels.

The compiled extension is used when it imports; otherwise, or when the
environment variable ``ADAPTCONC_PURE_PYTHON`` is set to a non-empty value other
than ``0``, the NumPy implementation is used. Both produce identical results.
"""

from __future__ import annotations

import os

from . import _pykernels

_force_py = os.environ.get("ADAPTCONC_PURE_PYTHON", "") not in ("", "0")

if _force_py:
    _impl = _pykernels
    BACKEND = "python"
else:
    try:
        from . import _ckernels as _impl  # type: ignore[attr-defined]

        BACKEND = "cython"
    except ImportError:
        _impl = _pykernels
        BACKEND = "python"

simulate_paths = _impl.simulate_paths
count_violations = _impl.count_violations

__all__ = ["BACKEND", "simulate_paths", "count_violations"]
