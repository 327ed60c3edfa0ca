"""Backend selection for the graph kernels.

The compiled extension is used when it imports cleanly. Setting
``LEONETSIM_PURE_PYTHON=1`` forces the pure-Python twin.
"""

from __future__ import annotations

import os

from . import _pykernels

BACKENDS = {"python": _pykernels}

try:
    from . import _ckernels
except ImportError:  # extension not built
    _ckernels = None
else:
    BACKENDS["compiled"] = _ckernels

if os.environ.get("LEONETSIM_PURE_PYTHON", "") not in ("", "0") or _ckernels is None:
    BACKEND = "python"
else:
    BACKEND = "compiled"

_impl = BACKENDS[BACKEND]
dijkstra = _impl.dijkstra
max_flow = _impl.max_flow


def get_backend(name: str | None = None):
    """Return the kernel module for ``name`` (default: the active backend)."""
    return BACKENDS[name or BACKEND]
