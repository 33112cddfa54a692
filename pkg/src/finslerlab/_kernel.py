"""Kernel backend selection: compiled extension if available, NumPy otherwise.

Set FINSLERLAB_PURE_PYTHON=1 to force the fallback (used by the benchmark and
by tests that compare the two implementations).
"""

import os

if os.environ.get("FINSLERLAB_PURE_PYTHON") == "1":
    from . import _jetcore_py as impl
    BACKEND = "python"
else:
    try:
        from . import _jetcore as impl  # type: ignore[attr-defined]
        BACKEND = "cython"
    except ImportError:
        from . import _jetcore_py as impl
        BACKEND = "python"

multiply = impl.multiply
fused_series = impl.fused_series
