"""Kernel selection: the compiled extension when built, numpy otherwise.

Set HYPCOVER_PURE=1 to force the numpy versions.
"""
import os

import numpy as np

from . import _kernels_py

BACKEND = "numpy"
_impl = _kernels_py
if os.environ.get("HYPCOVER_PURE") != "1":
    try:
        from . import _kernels as _impl  # type: ignore[no-redef]
        BACKEND = "cython"
    except ImportError:
        _impl = _kernels_py


def _i64(a):
    return np.ascontiguousarray(a, dtype=np.int64)


def pull_step(inp, src, dst, w, mv, movemap, impl=None):
    impl = impl or _impl
    return impl.pull_step(np.ascontiguousarray(inp, dtype=float), _i64(src), _i64(dst),
                          np.ascontiguousarray(w, dtype=float), _i64(mv), _i64(movemap))


def push_step(inp, src, dst, w, mv, movemap, impl=None):
    impl = impl or _impl
    return impl.push_step(np.ascontiguousarray(inp, dtype=float), _i64(src), _i64(dst),
                          np.ascontiguousarray(w, dtype=float), _i64(mv), _i64(movemap))


def bfs_levels(n, nb, src, dst, mv, movemap, start_state, start_index, max_depth, impl=None):
    impl = impl or _impl
    return impl.bfs_levels(n, nb, _i64(src), _i64(dst), _i64(mv), _i64(movemap),
                           int(start_state), int(start_index), int(max_depth))
