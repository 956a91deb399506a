"""Backend selection for the divided-difference kernels.

The compiled extension is used when it was built; otherwise, or when the
environment variable ``TENTMLE_PURE_PYTHON`` is set to a non-empty value
other than ``0``, the pure-Python implementation is used.  ``BACKEND`` names
the active one.
"""

from __future__ import annotations

import os

from . import _pykernels

if os.environ.get("TENTMLE_PURE_PYTHON", "") not in ("", "0"):
    _impl = _pykernels
    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]

        BACKEND = "compiled"
    except ImportError:  # extension not built
        _impl = _pykernels
        BACKEND = "python"

dd_exp = _impl.dd_exp
simplex_values = _impl.simplex_values
simplex_derivatives = _impl.simplex_derivatives

__all__ = ["BACKEND", "dd_exp", "simplex_values", "simplex_derivatives", "backends"]


def backends() -> dict:
    """All importable backends by name (used by tests and the benchmark)."""
    found = {"python": _pykernels}
    try:
        from . import _kernels

        found["compiled"] = _kernels
    except ImportError:
        pass
    return found
