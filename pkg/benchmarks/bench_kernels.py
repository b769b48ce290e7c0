"""Compare the compiled and numpy transfer kernels on the octagon F2 extension.

    python3 benchmarks/bench_kernels.py [radius] [repeats]
"""
import sys
import time

import numpy as np

from hypcover import _kernels_py, kernels
from hypcover.experiments import extension


def best_of(fn, repeats):
    times = []
    for _ in range(repeats):
        t = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t)
    return min(times), out


def main(radius=7, repeats=5):
    ext = extension("f2", 1.0, radius)
    rng = np.random.default_rng(0)
    u = rng.random((ext.n, ext.nb))
    args = (ext.src, ext.dst, ext.w, ext.mv, ext.movemap)
    impls = [("numpy", _kernels_py)]
    try:
        from hypcover import _kernels
        impls.append(("cython", _kernels))
    except ImportError:
        print("compiled extension not built; numpy only")
    print(f"cells: {ext.n} x {ext.nb} = {ext.n * ext.nb}")
    print(f"{'kernel':<6} {'backend':<7} {'seconds':>10}")
    ref = {}
    for step in ("pull_step", "push_step"):
        for name, impl in impls:
            fn = getattr(kernels, step)
            t, out = best_of(lambda: fn(u, *args, impl=impl), repeats)
            if step in ref:
                assert np.allclose(out, ref[step], rtol=1e-12, atol=0)
            ref.setdefault(step, out)
            print(f"{step[:4]:<6} {name:<7} {t:10.4f}")
    t, _ = best_of(lambda: kernels.bfs_levels(ext.n, ext.nb, ext.src, ext.dst, ext.mv, ext.movemap,
                                              0, 0, 2 * radius + 2), 1)
    print(f"bfs    {kernels.BACKEND:<7} {t:10.4f}")


if __name__ == "__main__":
    main(*(int(a) for a in sys.argv[1:3]))
