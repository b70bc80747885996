"""Exact matrix kernels over table-encoded finite rings.

All ring elements are small integer indices into a ring's addition and
multiplication tables, so a "matrix product" is a triple loop of table
lookups.  These loops dominate the runtime of subgroup enumeration, so
they are compiled with numba when available.

Backend selection (env var CHEVNET_BACKEND):
    auto   -- numba if importable, else numpy (default)
    numba  -- require the jit backend, fail loudly if numba is missing
    numpy  -- force the pure-numpy fallback

Both implementations are importable side by side (``numpy_impl`` /
``numba_impl``) so the benchmark can compare them in one process.
"""

from __future__ import annotations

import os

import numpy as np

__all__ = [
    "BACKEND",
    "NUMBA_AVAILABLE",
    "matmul",
    "matmul_left_batch",
    "matmul_right_batch",
    "matvec_batch",
    "numpy_impl",
    "numba_impl",
]


# ---------------------------------------------------------------------------
# pure-numpy fallback: fold the k-index, vectorised over everything else


def _np_matmul(a, b, add, mul):
    d = a.shape[0]
    acc = mul[a[:, 0][:, None], b[0, :][None, :]]
    for k in range(1, d):
        acc = add[acc, mul[a[:, k][:, None], b[k, :][None, :]]]
    return acc


def _np_matmul_left_batch(g, batch, add, mul):
    # out[n] = g @ batch[n]
    n, d, _ = batch.shape
    if n == 0:
        return np.empty((0, d, d), dtype=np.int32)
    acc = mul[g[:, 0][None, :, None], batch[:, 0, :][:, None, :]]
    for k in range(1, d):
        acc = add[acc, mul[g[:, k][None, :, None], batch[:, k, :][:, None, :]]]
    return acc


def _np_matmul_right_batch(batch, g, add, mul):
    # out[n] = batch[n] @ g
    n, d, _ = batch.shape
    if n == 0:
        return np.empty((0, d, d), dtype=np.int32)
    acc = mul[batch[:, :, 0][:, :, None], g[0, :][None, None, :]]
    for k in range(1, d):
        acc = add[acc, mul[batch[:, :, k][:, :, None], g[k, :][None, None, :]]]
    return acc


def _np_matvec_batch(batch, v, add, mul):
    # out[n] = batch[n] @ v
    n, d, _ = batch.shape
    if n == 0:
        return np.empty((0, d), dtype=np.int32)
    acc = mul[batch[:, :, 0], v[0]]
    for k in range(1, d):
        acc = add[acc, mul[batch[:, :, k], v[k]]]
    return acc


class _Impl:
    def __init__(self, name, matmul, left, right, matvec):
        self.name = name
        self.matmul = matmul
        self.matmul_left_batch = left
        self.matmul_right_batch = right
        self.matvec_batch = matvec


numpy_impl = _Impl(
    "numpy", _np_matmul, _np_matmul_left_batch, _np_matmul_right_batch, _np_matvec_batch
)


# ---------------------------------------------------------------------------
# numba kernels: plain triple loops over the tables

_choice = os.environ.get("CHEVNET_BACKEND", "auto").lower()
if _choice not in ("auto", "numba", "numpy"):
    raise RuntimeError(f"CHEVNET_BACKEND must be auto|numba|numpy, got {_choice!r}")

NUMBA_AVAILABLE = False
numba_impl = None

if _choice in ("auto", "numba"):
    try:
        import numba as _nb

        @_nb.njit(cache=True, nogil=True)
        def _nb_matmul(a, b, add, mul):
            d = a.shape[0]
            out = np.empty((d, d), dtype=np.int32)
            for i in range(d):
                for j in range(d):
                    acc = mul[a[i, 0], b[0, j]]
                    for k in range(1, d):
                        acc = add[acc, mul[a[i, k], b[k, j]]]
                    out[i, j] = acc
            return out

        @_nb.njit(cache=True, nogil=True)
        def _nb_matmul_left_batch(g, batch, add, mul):
            n = batch.shape[0]
            d = g.shape[0]
            out = np.empty((n, d, d), dtype=np.int32)
            for m in range(n):
                for i in range(d):
                    for j in range(d):
                        acc = mul[g[i, 0], batch[m, 0, j]]
                        for k in range(1, d):
                            acc = add[acc, mul[g[i, k], batch[m, k, j]]]
                        out[m, i, j] = acc
            return out

        @_nb.njit(cache=True, nogil=True)
        def _nb_matmul_right_batch(batch, g, add, mul):
            n = batch.shape[0]
            d = g.shape[0]
            out = np.empty((n, d, d), dtype=np.int32)
            for m in range(n):
                for i in range(d):
                    for j in range(d):
                        acc = mul[batch[m, i, 0], g[0, j]]
                        for k in range(1, d):
                            acc = add[acc, mul[batch[m, i, k], g[k, j]]]
                        out[m, i, j] = acc
            return out

        @_nb.njit(cache=True, nogil=True)
        def _nb_matvec_batch(batch, v, add, mul):
            n = batch.shape[0]
            d = v.shape[0]
            out = np.empty((n, d), dtype=np.int32)
            for m in range(n):
                for i in range(d):
                    acc = mul[batch[m, i, 0], v[0]]
                    for k in range(1, d):
                        acc = add[acc, mul[batch[m, i, k], v[k]]]
                    out[m, i] = acc
            return out

        numba_impl = _Impl(
            "numba",
            _nb_matmul,
            _nb_matmul_left_batch,
            _nb_matmul_right_batch,
            _nb_matvec_batch,
        )
        NUMBA_AVAILABLE = True
    except ImportError:
        if _choice == "numba":
            raise

_active = numba_impl if NUMBA_AVAILABLE and _choice != "numpy" else numpy_impl

BACKEND = _active.name
matmul = _active.matmul
matmul_left_batch = _active.matmul_left_batch
matmul_right_batch = _active.matmul_right_batch
matvec_batch = _active.matvec_batch
