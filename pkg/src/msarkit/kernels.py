"""Backend selection for the inner loops.

The compiled extension is used when importable; set ``MSARKIT_PURE_PYTHON=1``
to force the NumPy fallback. Both backends return identical results.
"""

from __future__ import annotations

import os

from . import _pykernels

BACKEND = "python"
_impl = _pykernels

if os.environ.get("MSARKIT_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:  # extension not built
        pass

scan_run = _impl.scan_run
raster_cover = _impl.raster_cover
detection_uniform = _impl.detection_uniform


def backends() -> dict:
    """All importable backends by name, for benchmarks and cross-checks."""
    out = {"python": _pykernels}
    try:
        from . import _ckernels

        out["cython"] = _ckernels
    except ImportError:
        pass
    return out
