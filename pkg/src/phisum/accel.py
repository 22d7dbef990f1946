"""Array kernels for float semirings.

Two kernels cover the hot loops: the backward pass over a failure-expanded
CSR arc table, and dense memoization over a ``|Q| x |Σ|`` table.  They are
compiled with numba when it is importable and ``PHISUM_DISABLE_NUMBA`` is
unset; otherwise the numpy versions run.  Both return only ``Z`` and carry
no counters; the reference implementations in :mod:`phisum.pathsum` remain
the source of truth.
"""
from __future__ import annotations

import os

import numpy as np

from .automaton import NO_FALLBACK, Automaton, failure_expand
from .errors import CapabilityError
from .toposort import StateOrder, make_order

__all__ = ["KINDS", "USING_NUMBA", "kind_of", "to_csr", "fast_pathsum"]

# kind codes shared by both backends
REAL, LOG, TMIN, TMAX = 0, 1, 2, 3
KINDS = {"real": REAL, "log": LOG, "tropical-min": TMIN, "tropical-max": TMAX}
_ZERO = {REAL: 0.0, LOG: -np.inf, TMIN: np.inf, TMAX: -np.inf}


def _want_numba() -> bool:
    return os.environ.get("PHISUM_DISABLE_NUMBA", "").lower() not in ("1", "true", "yes")


try:
    if not _want_numba():
        raise ImportError
    from numba import njit
except ImportError:  # numba missing or disabled
    njit = None

USING_NUMBA = njit is not None


def kind_of(semiring) -> int:
    try:
        return KINDS[semiring.name]
    except KeyError:
        raise CapabilityError(f"no array kernel for semiring {semiring.name!r}") from None


# -- scalar ops (compiled when numba is on) ------------------------------------


def _plus(kind, x, y):
    if kind == 0:
        return x + y
    if kind == 1:
        if x < y:
            x, y = y, x
        if y == -np.inf:
            return x
        return x + np.log1p(np.exp(y - x))
    if kind == 2:
        return min(x, y)
    return max(x, y)


def _times(kind, x, y):
    if kind == 0:
        return x * y
    return x + y


def _backward_csr(kind, zero, order, indptr, dst, w, final, init):
    n = final.shape[0]
    beta = np.empty(n)
    for i in range(order.shape[0]):
        q = order[i]
        acc = final[q]
        for j in range(indptr[q], indptr[q + 1]):
            acc = _plus(kind, acc, _times(kind, w[j], beta[dst[j]]))
        beta[q] = acc
    Z = zero
    for q in range(n):
        Z = _plus(kind, Z, _times(kind, init[q], beta[q]))
    return Z


def _memo_dense(kind, zero, order, indptr, sym, dst, w, fallback, phi_w, final, init, n_symbols):
    n = final.shape[0]
    beta = np.empty(n)
    table = np.full((n, n_symbols), zero)
    for i in range(order.shape[0]):
        q = order[i]
        f = fallback[q]
        if f >= 0:
            for b in range(n_symbols):
                table[q, b] = _times(kind, phi_w[q], table[f, b])
        last = -1
        for j in range(indptr[q], indptr[q + 1]):
            a = sym[j]
            if a != last:
                table[q, a] = zero
                last = a
            table[q, a] = _plus(kind, table[q, a], _times(kind, w[j], beta[dst[j]]))
        acc = final[q]
        for b in range(n_symbols):
            acc = _plus(kind, acc, table[q, b])
        beta[q] = acc
    Z = zero
    for q in range(n):
        Z = _plus(kind, Z, _times(kind, init[q], beta[q]))
    return Z


if USING_NUMBA:
    _plus = njit(cache=False)(_plus)
    _times = njit(cache=False)(_times)
    _backward_csr_kernel = njit(cache=False)(_backward_csr)
    _memo_dense_kernel = njit(cache=False)(_memo_dense)


# -- numpy fallback --------------------------------------------------------------


def _np_plus_reduce(kind, values, zero):
    if values.size == 0:
        return zero
    if kind == REAL:
        return float(values.sum())
    if kind == LOG:
        return float(np.logaddexp.reduce(values))
    if kind == TMIN:
        return float(values.min())
    return float(values.max())


def _np_times(kind, x, y):
    return x * y if kind == REAL else x + y


def _np_plus(kind, x, y):
    if kind == REAL:
        return x + y
    if kind == LOG:
        return np.logaddexp(x, y)
    return np.minimum(x, y) if kind == TMIN else np.maximum(x, y)


def _np_backward_csr(kind, zero, order, indptr, dst, w, final, init):
    beta = np.empty(final.shape[0])
    for q in order:
        lo, hi = indptr[q], indptr[q + 1]
        arcs = _np_times(kind, w[lo:hi], beta[dst[lo:hi]])
        beta[q] = _np_plus_reduce(kind, np.append(arcs, final[q]), zero)
    return _np_plus_reduce(kind, _np_times(kind, init, beta), zero)


def _np_memo_dense(kind, zero, order, indptr, sym, dst, w, fallback, phi_w, final, init, n_symbols):
    n = final.shape[0]
    beta = np.empty(n)
    table = np.full((n, n_symbols), zero)
    for q in order:
        f = fallback[q]
        if f >= 0:
            table[q] = _np_times(kind, phi_w[q], table[f])
        lo, hi = indptr[q], indptr[q + 1]
        if hi > lo:
            syms = sym[lo:hi]
            contrib = _np_times(kind, w[lo:hi], beta[dst[lo:hi]])
            own = np.unique(syms)
            table[q, own] = zero
            for a, v in zip(syms, contrib):
                table[q, a] = _np_plus(kind, table[q, a], v)
        beta[q] = _np_plus_reduce(kind, np.append(table[q], final[q]), zero)
    return _np_plus_reduce(kind, _np_times(kind, init, beta), zero)


# -- public entry ------------------------------------------------------------------


def to_csr(a: Automaton):
    """(indptr, sym, dst, w) arrays with arcs grouped by source then symbol."""
    indptr = np.zeros(a.n_states + 1, dtype=np.int64)
    syms, dsts, ws = [], [], []
    for q in range(a.n_states):
        for sym, targets in a.out[q]:
            for d, w in targets:
                syms.append(sym)
                dsts.append(d)
                ws.append(w)
        indptr[q + 1] = len(dsts)
    return (
        indptr,
        np.asarray(syms, dtype=np.int64),
        np.asarray(dsts, dtype=np.int64),
        np.asarray(ws, dtype=np.float64),
    )


def fast_pathsum(a: Automaton, algorithm: str = "memo", order=None,
                 backend: str | None = None) -> float:
    """Z via the array kernels; ``algorithm`` is ``expand`` or ``memo``.

    ``backend`` forces ``"numba"`` or ``"numpy"``; by default numba is used
    when available.
    """
    kind = kind_of(a.semiring)
    zero = _ZERO[kind]
    if not isinstance(order, StateOrder):
        order = make_order(a, order or "kahn")
    order_arr = np.asarray(order.states, dtype=np.int64)
    use_numba = USING_NUMBA if backend is None else backend == "numba"
    if use_numba and not USING_NUMBA:
        raise RuntimeError("numba backend requested but unavailable")
    final = np.asarray(a.final, dtype=np.float64)
    init = np.asarray(a.init, dtype=np.float64)
    if algorithm == "expand":
        indptr, _, dst, w = to_csr(failure_expand(a))
        fn = _backward_csr_kernel if use_numba else _np_backward_csr
        return float(fn(kind, zero, order_arr, indptr, dst, w, final, init))
    if algorithm == "memo":
        indptr, sym, dst, w = to_csr(a)
        fallback = np.asarray(a.fallback, dtype=np.int64)
        phi_w = np.asarray(a.phi_weight, dtype=np.float64)
        fn = _memo_dense_kernel if use_numba else _np_memo_dense
        return float(fn(kind, zero, order_arr, indptr, sym, dst, w, fallback, phi_w,
                        final, init, a.n_symbols))
    raise ValueError(f"no array kernel for algorithm {algorithm!r}")
