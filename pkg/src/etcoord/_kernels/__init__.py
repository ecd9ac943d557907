"""Step-kernel backend selection.

Two interchangeable implementations of the run loop exist: a compiled
extension (built from _fast.pyx when Cython and a C compiler are available)
and the pure-Python reference in pure.py.  They execute the same sequence of
double-precision operations and produce bit-identical results; selection is
purely about speed.

The compiled kernel is preferred when importable.  Set ETCOORD_KERNEL=pure
(or =fast) to force a backend process-wide; per-run selection goes through
``get_backend``.
"""

import os

from . import pure
from .pure import (
    STATUS_ALL_ARRIVED,
    STATUS_CONTRACT,
    STATUS_HORIZON,
    STATUS_NONFINITE,
)

try:
    from . import _fast
    HAVE_FAST = True
except ImportError:
    _fast = None
    HAVE_FAST = False


def get_backend(name: str = "auto"):
    """Resolve a kernel module by name: 'auto', 'fast' or 'pure'."""
    if name == "auto":
        name = os.environ.get("ETCOORD_KERNEL", "auto")
    if name in ("auto", ""):
        return _fast if HAVE_FAST else pure
    if name == "pure":
        return pure
    if name == "fast":
        if not HAVE_FAST:
            raise RuntimeError("compiled kernel requested but not built; run setup.py build_ext")
        return _fast
    raise ValueError(f"unknown kernel backend {name!r}")
