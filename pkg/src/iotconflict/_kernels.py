"""Sweep-line overlap kernels.

Both backends take the per-location event arrays sorted by start time and
return index pairs ``(i, j)`` with ``i < j`` whose half-open intervals share a
positive-length stretch and whose user codes differ. Pairs come out in
``(i, j)`` lexicographic order, identically for both backends.

Set ``IOTCONFLICT_DISABLE_NUMBA=1`` to force the pure-numpy path.
"""

from __future__ import annotations

import os

import numpy as np

DISABLE_ENV = "IOTCONFLICT_DISABLE_NUMBA"


def overlap_pairs_numpy(starts, ends, users):
    n = starts.shape[0]
    if n < 2:
        empty = np.empty(0, dtype=np.int64)
        return empty, empty.copy()
    # every j in [i+1, hi_i) starts before event i ends
    hi = np.searchsorted(starts, ends, side="left")
    lo = np.arange(1, n + 1, dtype=np.int64)
    counts = np.maximum(hi - lo, 0)
    total = int(counts.sum())
    ii = np.repeat(np.arange(n, dtype=np.int64), counts)
    block_start = np.cumsum(counts) - counts
    jj = np.repeat(lo, counts) + (np.arange(total, dtype=np.int64) - np.repeat(block_start, counts))
    keep = (users[ii] != users[jj]) & (ends[jj] > starts[jj])
    return ii[keep], jj[keep]


def _overlap_pairs_loop(starts, ends, users):
    n = starts.shape[0]
    count = 0
    for i in range(n):
        j = i + 1
        while j < n and starts[j] < ends[i]:
            if users[j] != users[i] and ends[j] > starts[j]:
                count += 1
            j += 1
    out_i = np.empty(count, dtype=np.int64)
    out_j = np.empty(count, dtype=np.int64)
    k = 0
    for i in range(n):
        j = i + 1
        while j < n and starts[j] < ends[i]:
            if users[j] != users[i] and ends[j] > starts[j]:
                out_i[k] = i
                out_j[k] = j
                k += 1
            j += 1
    return out_i, out_j


try:
    from numba import njit

    overlap_pairs_numba = njit(cache=True, nogil=True)(_overlap_pairs_loop)
    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    overlap_pairs_numba = None
    HAVE_NUMBA = False


def numba_enabled() -> bool:
    return HAVE_NUMBA and os.environ.get(DISABLE_ENV, "").strip().lower() not in ("1", "true", "yes")


def overlap_pairs(starts, ends, users):
    """Dispatch to the numba kernel unless disabled by environment."""
    starts = np.ascontiguousarray(starts, dtype=np.int64)
    ends = np.ascontiguousarray(ends, dtype=np.int64)
    users = np.ascontiguousarray(users, dtype=np.int64)
    if numba_enabled():
        return overlap_pairs_numba(starts, ends, users)
    return overlap_pairs_numpy(starts, ends, users)


def backend() -> str:
    return "numba" if numba_enabled() else "numpy"
