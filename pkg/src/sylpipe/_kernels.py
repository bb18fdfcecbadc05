"""Dense decode kernels: numba-compiled hot loops with a pure-numpy fallback.

The numba path is used whenever numba imports cleanly; set SYLPIPE_NO_NUMBA=1
to force the numpy path (useful for debugging and for the kernel benchmark).
Both paths keep the same floating-point association order, so results are
identical whenever the inputs are exactly representable (integer weights) and
agree to rounding noise otherwise.
"""

from __future__ import annotations

import os

import numpy as np

NEG_INF = float("-inf")

_FORCE_NUMPY = os.environ.get("SYLPIPE_NO_NUMBA", "").strip() not in ("", "0")


def _viterbi_core_py(emissions, transitions, start_trans, path):
    # Best-suffix DP followed by a left-to-right readout. The readout picks
    # the lowest label index at every decision, which makes the returned path
    # the lexicographically smallest among the maximum-scoring ones.
    T, L = emissions.shape
    beta = np.empty((T, L))
    for y in range(L):
        beta[T - 1, y] = emissions[T - 1, y]
    for i in range(T - 2, -1, -1):
        for y in range(L):
            best = NEG_INF
            for y2 in range(L):
                s = transitions[y, y2] + beta[i + 1, y2]
                if s > best:
                    best = s
            beta[i, y] = emissions[i, y] + best

    best = NEG_INF
    arg = 0
    for y in range(L):
        s = start_trans[y] + beta[0, y]
        if s > best:
            best = s
            arg = y
    path[0] = arg
    total = best
    for i in range(1, T):
        prev = path[i - 1]
        best = NEG_INF
        arg = 0
        for y in range(L):
            s = transitions[prev, y] + beta[i, y]
            if s > best:
                best = s
                arg = y
        path[i] = arg
    return total


def _viterbi_numpy(emissions, transitions, start_trans, path):
    T, L = emissions.shape
    beta = np.empty((T, L))
    beta[T - 1] = emissions[T - 1]
    for i in range(T - 2, -1, -1):
        beta[i] = emissions[i] + (transitions + beta[i + 1][None, :]).max(axis=1)
    first = start_trans + beta[0]
    y = int(np.argmax(first))
    path[0] = y
    total = float(first[y])
    for i in range(1, T):
        scores = transitions[path[i - 1]] + beta[i]
        path[i] = int(np.argmax(scores))
    return total


def _row_sum_py(weights, ids, out):
    # out[y] = sum over ids of weights[id, y]
    L = weights.shape[1]
    for y in range(L):
        out[y] = 0.0
    for k in range(ids.shape[0]):
        row = ids[k]
        for y in range(L):
            out[y] += weights[row, y]


def _row_sum_numpy(weights, ids, out):
    if ids.shape[0] == 0:
        out[:] = 0.0
    else:
        np.sum(weights[ids], axis=0, out=out)


HAVE_NUMBA = False
_viterbi_numba = None
_row_sum_numba = None

if not _FORCE_NUMPY:
    try:
        from numba import njit

        _viterbi_numba = njit(cache=True, nogil=True)(_viterbi_core_py)
        _row_sum_numba = njit(cache=True, nogil=True)(_row_sum_py)
        HAVE_NUMBA = True
    except ImportError:  # pragma: no cover - numba is a declared dependency
        pass

if HAVE_NUMBA:
    BACKEND = "numba"
    _viterbi_impl = _viterbi_numba
    _row_sum_impl = _row_sum_numba
else:
    BACKEND = "numpy"
    _viterbi_impl = _viterbi_numpy
    _row_sum_impl = _row_sum_numpy


def viterbi_path(emissions, transitions, start_trans):
    """Return (path, score) for the masked lattice.

    emissions: (T, L) with -inf at illegal (position, label) pairs.
    transitions: (L, L) with -inf at illegal label bigrams.
    start_trans: (L,) scores for the virtual start label, -inf where illegal.

    Among maximum-scoring label sequences the lexicographically smallest one
    (by label index) is returned. A -inf score means no legal sequence exists.
    """
    T = emissions.shape[0]
    path = np.empty(T, dtype=np.int64)
    if T == 0:
        return path, 0.0
    score = _viterbi_impl(emissions, transitions, start_trans, path)
    return path, float(score)


def row_sum(weights, ids, out=None):
    """Sum the `ids` rows of `weights` into a length-L vector."""
    if out is None:
        out = np.empty(weights.shape[1])
    _row_sum_impl(weights, ids, out)
    return out


def warmup():
    """Trigger JIT compilation so timed runs do not pay the compile cost."""
    em = np.zeros((3, 2))
    tr = np.zeros((2, 2))
    st = np.zeros(2)
    viterbi_path(em, tr, st)
    row_sum(np.zeros((4, 2)), np.array([0, 2], dtype=np.int64))
