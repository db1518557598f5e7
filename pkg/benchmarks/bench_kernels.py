"""Compiled vs pure-Python kernels on the combinatorial hot loops.

    python benchmarks/bench_kernels.py [--repeat N]
"""
import argparse
import time

import numpy as np

from qroe import _pykernels, coarse

try:
    from qroe import _ckernels
except ImportError:
    _ckernels = None


def _time(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t)
    return best, out


def cases(rng):
    n = 14
    pat = (rng.random((n, n)) < 0.3).astype(np.uint8)
    w = rng.uniform(0.5, 2.0, n)
    yield "subset_lambda n=14", lambda k: k.subset_lambda(pat, w)
    rel = (rng.random((120, 120)) < 0.01).astype(np.uint8)
    yield "transitive_closure n=120", lambda k: k.transitive_closure(rel)
    d = coarse.path_distances(20)
    adj = coarse.band_relation(d, 2).matrix().astype(np.uint8)
    np.fill_diagonal(adj, 0)
    yield "color_search n=20 r=2 (found)", lambda k: k.color_search(adj, d, 2, 4.0)
    yield "color_search n=20 r=2 (exhausted)", lambda k: k.color_search(adj, d, 2, 2.0)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    rng = np.random.default_rng(0)
    print(f"{'kernel':36s} {'python [s]':>11s} {'cython [s]':>11s} {'speedup':>8s}")
    for name, fn in cases(rng):
        tp, op = _time(lambda: fn(_pykernels), args.repeat)
        if _ckernels is None:
            print(f"{name:36s} {tp:11.4f} {'n/a':>11s} {'':>8s}")
            continue
        tc, oc = _time(lambda: fn(_ckernels), args.repeat)
        same = _same(op, oc)
        print(f"{name:36s} {tp:11.4f} {tc:11.4f} {tp / tc:7.1f}x{'' if same else '  MISMATCH'}")


def _same(a, b):
    if isinstance(a, tuple):
        return all(_same(x, y) for x, y in zip(a, b))
    if a is None or b is None:
        return a is b
    return np.array_equal(np.asarray(a), np.asarray(b))


if __name__ == "__main__":
    main()
