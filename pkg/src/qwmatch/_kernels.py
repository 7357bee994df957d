"""Batched random-walk-search kernels.

Two interchangeable implementations of the same sampling rule:

* ``walk_trials_numba``: one compiled scalar loop per trial (numba ``@njit``).
* ``walk_trials_numpy``: all trials advanced in lockstep with numpy arrays.

Both draw from the SplitMix64 streams in :mod:`qwmatch.rng` and pick the
successor ``k`` as the smallest CSR position with ``u < cdf[k]``, so their
outputs are bit-identical. ``QWMATCH_BACKEND=numpy`` forces the fallback;
the default is numba when it can be imported.
"""

from __future__ import annotations

import os

import numpy as np

from .rng import GOLDEN, INV_2_53, MIX1, MIX2, uniform_array

try:
    import numba
except ImportError:  # pragma: no cover - exercised only without numba
    numba = None

_requested = os.environ.get("QWMATCH_BACKEND", "numba").strip().lower()
if _requested not in ("numba", "numpy"):
    raise ImportError(f"QWMATCH_BACKEND must be 'numba' or 'numpy', got {_requested!r}")
HAVE_NUMBA = numba is not None
BACKEND = "numba" if (_requested == "numba" and HAVE_NUMBA) else "numpy"

if HAVE_NUMBA:
    njit = numba.njit(cache=True, nogil=True)
else:  # pragma: no cover

    def njit(f):
        return f


@njit
def _search_scalar(cdf, lo, hi, u):
    # smallest k in [lo, hi) with u < cdf[k]; cdf[hi - 1] == 1.0
    hi -= 1
    while lo < hi:
        mid = (lo + hi) >> 1
        if u < cdf[mid]:
            hi = mid
        else:
            lo = mid + 1
    return lo


@njit
def walk_trials_numba(indptr, indices, cdf, start_cdf, marked, seeds, max_steps):
    trials = seeds.shape[0]
    n = start_cdf.shape[0]
    final = np.empty(trials, dtype=np.int64)
    steps = np.empty(trials, dtype=np.int64)
    hit = np.empty(trials, dtype=np.bool_)
    g = np.uint64(GOLDEN)
    m1 = np.uint64(MIX1)
    m2 = np.uint64(MIX2)
    s30 = np.uint64(30)
    s27 = np.uint64(27)
    s31 = np.uint64(31)
    s11 = np.uint64(11)
    for t in range(trials):
        st = seeds[t]
        st = st + g
        z = st
        z = (z ^ (z >> s30)) * m1
        z = (z ^ (z >> s27)) * m2
        z = z ^ (z >> s31)
        u = np.float64(z >> s11) * INV_2_53
        x = _search_scalar(start_cdf, 0, n, u)
        k = 0
        while not marked[x] and k < max_steps:
            st = st + g
            z = st
            z = (z ^ (z >> s30)) * m1
            z = (z ^ (z >> s27)) * m2
            z = z ^ (z >> s31)
            u = np.float64(z >> s11) * INV_2_53
            x = indices[_search_scalar(cdf, indptr[x], indptr[x + 1], u)]
            k += 1
        final[t] = x
        steps[t] = k
        hit[t] = marked[x]
    return final, steps, hit


def _search_array(cdf, lo, hi, u):
    lo = lo.copy()
    hi = hi - 1
    while True:
        open_ = lo < hi
        if not open_.any():
            return lo
        mid = (lo + hi) >> 1
        go_left = open_ & (u < cdf[np.where(open_, mid, 0)])
        go_right = open_ & ~go_left
        hi = np.where(go_left, mid, hi)
        lo = np.where(go_right, mid + 1, lo)


def walk_trials_numpy(indptr, indices, cdf, start_cdf, marked, seeds, max_steps):
    trials = seeds.shape[0]
    n = start_cdf.shape[0]
    states, u = uniform_array(seeds.astype(np.uint64))
    x = _search_array(start_cdf, np.zeros(trials, np.int64), np.full(trials, n, np.int64), u)
    steps = np.zeros(trials, dtype=np.int64)
    active = np.flatnonzero(~marked[x])
    k = 0
    while active.size and k < max_steps:
        st, u = uniform_array(states[active])
        states[active] = st
        cur = x[active]
        pos = _search_array(cdf, indptr[cur], indptr[cur + 1], u)
        nxt = indices[pos]
        x[active] = nxt
        steps[active] += 1
        active = active[~marked[nxt]]
        k += 1
    return x, steps, marked[x].copy()


def walk_trials(indptr, indices, cdf, start_cdf, marked, seeds, max_steps, backend=None):
    """Run one random-walk search per seed.

    Returns ``(final_state, steps, hit)`` arrays; ``hit`` is False exactly
    for trials that stopped at ``max_steps`` without reaching a marked state.
    """
    backend = backend or BACKEND
    args = (
        np.ascontiguousarray(indptr, dtype=np.int64),
        np.ascontiguousarray(indices, dtype=np.int64),
        np.ascontiguousarray(cdf, dtype=np.float64),
        np.ascontiguousarray(start_cdf, dtype=np.float64),
        np.ascontiguousarray(marked, dtype=np.bool_),
        np.ascontiguousarray(seeds, dtype=np.uint64),
        int(max_steps),
    )
    if backend == "numba":
        if not HAVE_NUMBA:
            raise RuntimeError("numba backend requested but numba is not installed")
        return walk_trials_numba(*args)
    if backend == "numpy":
        return walk_trials_numpy(*args)
    raise ValueError(f"unknown backend {backend!r}")
