"""Hot inner loops, with a numba backend and a pure-numpy fallback.

The backend is chosen once at import time.  Set ``MISSKMEANS_DISABLE_NUMBA=1``
to force the numpy path (numba is also skipped automatically when it is not
installed).  Both backends expose the same functions:

``domain_codes(words, rows, cwords)``
    bit ``t`` of the result is set iff ``dom(x)`` is a subset of ``I_t``.
``nearest_center(values, mask, rows, cvals, cmask, allowed)``
    squared distance to, and index of, the nearest allowed center under the
    missing-entry convention.  Ties go to the lowest index.
``cluster_sums(values, mask, labels, k)``
    per-cluster, per-coordinate sums and counts over defined entries.
``enumerate_partitions(values, mask, k)``
    exhaustive minimum over canonical labelings (restricted growth strings).
"""

import os

from . import _numpy as numpy_backend

__all__ = [
    "BACKEND",
    "numpy_backend",
    "numba_backend",
    "domain_codes",
    "nearest_center",
    "cluster_sums",
    "enumerate_partitions",
    "pack_mask",
]


def _numba_requested() -> bool:
    flag = os.environ.get("MISSKMEANS_DISABLE_NUMBA", "").strip().lower()
    return flag not in ("1", "true", "yes", "on")


try:
    from . import _numba as numba_backend
except ImportError:  # numba not installed
    numba_backend = None

if numba_backend is not None and _numba_requested():
    _active = numba_backend
    BACKEND = "numba"
else:
    _active = numpy_backend
    BACKEND = "numpy"

domain_codes = _active.domain_codes
nearest_center = _active.nearest_center
cluster_sums = _active.cluster_sums
enumerate_partitions = _active.enumerate_partitions
pack_mask = numpy_backend.pack_mask
