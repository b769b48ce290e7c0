import numpy as np
import pytest

from hypcover import _kernels_py, kernels
from hypcover import shift as S

try:
    from hypcover import _kernels as _compiled
except ImportError:  # pragma: no cover
    _compiled = None


def _small_ext():
    rng = np.random.default_rng(3)
    W = rng.random((4, 4)) * (rng.random((4, 4)) < 0.7) + np.eye(4, k=1) * 0.2
    base = S.MarkovSystem(W)
    return S.extend(base, S.FreeGroup(), images=[(1,), (-1,), (2,), ()], radius=4)


def _dense(ext):
    """Full transfer matrix on (state, ball index) with the same truncation."""
    N = ext.n * ext.nb
    M = np.zeros((N, N))
    for s, d, w, m in zip(ext.src, ext.dst, ext.w, ext.mv):
        for j in range(ext.nb):
            k = ext.movemap[m, j]
            if k >= 0:
                M[s * ext.nb + j, d * ext.nb + k] += w
    return M


def test_pull_and_push_match_dense_matrix():
    ext = _small_ext()
    M = _dense(ext)
    u = np.random.default_rng(0).random((ext.n, ext.nb))
    args = (ext.src, ext.dst, ext.w, ext.mv, ext.movemap)
    pull = kernels.pull_step(u, *args, impl=_kernels_py)
    push = kernels.push_step(u, *args, impl=_kernels_py)
    assert np.allclose(pull.ravel(), M @ u.ravel(), rtol=1e-13, atol=0)
    assert np.allclose(push.ravel(), M.T @ u.ravel(), rtol=1e-13, atol=0)


@pytest.mark.skipif(_compiled is None, reason="compiled extension not built")
def test_backends_agree():
    ext = _small_ext()
    u = np.random.default_rng(1).random((ext.n, ext.nb))
    args = (ext.src, ext.dst, ext.w, ext.mv, ext.movemap)
    for step in ("pull_step", "push_step"):
        a = getattr(kernels, step)(u, *args, impl=_kernels_py)
        b = getattr(kernels, step)(u, *args, impl=_compiled)
        assert np.allclose(a, b, rtol=1e-14, atol=0)
    la = kernels.bfs_levels(ext.n, ext.nb, ext.src, ext.dst, ext.mv, ext.movemap, 0, 0, 10, impl=_kernels_py)
    lb = kernels.bfs_levels(ext.n, ext.nb, ext.src, ext.dst, ext.mv, ext.movemap, 0, 0, 10, impl=_compiled)
    assert np.array_equal(np.asarray(la), np.asarray(lb))


def test_backend_name():
    assert kernels.BACKEND in ("cython", "numpy")
