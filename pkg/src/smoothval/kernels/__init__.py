"""Hot numeric kernels with a compiled core and a pure-numpy fallback.

The compiled extension is optional: if it failed to build (or the
SMOOTHVAL_PURE_PYTHON environment variable is set to a nonempty value)
the numpy implementations are used instead. Both paths consume identical
pre-drawn sample arrays, so results do not depend on the backend.
"""

import os

if os.environ.get("SMOOTHVAL_PURE_PYTHON"):
    from . import _kernels_py as _impl
    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl
        BACKEND = "compiled"
    except ImportError:
        from . import _kernels_py as _impl
        BACKEND = "python"

polygon_disk_stats = _impl.polygon_disk_stats
disk_disk_stats = _impl.disk_disk_stats
cap_lens_stats = _impl.cap_lens_stats

__all__ = ["polygon_disk_stats", "disk_disk_stats", "cap_lens_stats", "BACKEND"]
