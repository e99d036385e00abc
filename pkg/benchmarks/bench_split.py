"""Compare the compiled and pure-Python kernels.

Times the two hot paths that have compiled implementations: the
exhaustive split search driving tree growth, and the coordinate-descent
sweeps behind the sparse posterior summary. Both backends produce
bit-identical results, so the numbers here are the whole story.

Usage: python3 bench_split.py [--quick]
"""

import argparse
import time

import numpy as np

from horserule import _split
from horserule.dss import dss_summarize
from horserule.rules import ColumnMeta
from horserule.trees import TreeGenConfig, generate_ensemble


class _StubModel:
    """Just enough model for dss_summarize: a posterior mean and per-column
    scale metadata."""

    def __init__(self, beta_bar):
        class _Draws:
            beta = np.atleast_2d(beta_bar)

        class _Scaling:
            y_sd = 1.0

        self.draws = _Draws()
        self.scaling = _Scaling()
        self.columns = [
            ColumnMeta(kind="linear", name=f"z{j}", mean=0.0, sd=1.0, source_col=j)
            for j in range(len(beta_bar))
        ]


def timed(fn, repeats):
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_ensemble(n, p, ntree, repeats):
    rng = np.random.default_rng(1)
    X = rng.normal(size=(n, p))
    y = X[:, 0] - 2.0 * X[:, 1] + rng.normal(size=n)
    cfg = TreeGenConfig(ntree=ntree)
    results = {}
    for backend in _split.available_backends():
        _split.set_backend(backend)
        results[backend] = timed(lambda: generate_ensemble(X, y, cfg, seed=7), repeats)
    return results


def bench_dss(n, P, lam, repeats):
    rng = np.random.default_rng(2)
    Z = rng.normal(size=(n, P))
    Z = (Z - Z.mean(axis=0)) / Z.std(axis=0, ddof=1)
    beta_bar = np.zeros(P)
    beta_bar[: P // 10] = rng.normal(size=P // 10)
    model = _StubModel(beta_bar)
    results = {}
    for backend in _split.available_backends():
        _split.set_backend(backend)
        results[backend] = timed(lambda: dss_summarize(model, Z, lam), repeats)
    return results


def show(title, results):
    line = f"{title:42s}"
    for backend in sorted(results):
        line += f"  {backend}: {results[backend] * 1e3:9.1f} ms"
    if "python" in results and "compiled" in results:
        line += f"  speedup: {results['python'] / results['compiled']:6.1f}x"
    print(line)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--quick", action="store_true", help="smaller problem sizes")
    args = ap.parse_args()

    default = _split.active_backend()
    if len(_split.available_backends()) < 2:
        print("note: compiled extension not built; timing the python backend only")

    repeats = 2 if args.quick else 3
    try:
        if args.quick:
            show("ensemble n=300 p=8 ntree=100",
                 bench_ensemble(300, 8, 100, repeats))
            show("dss n=300 P=200 lambda=5",
                 bench_dss(300, 200, 5.0, repeats))
        else:
            show("ensemble n=500 p=13 ntree=200",
                 bench_ensemble(500, 13, 200, repeats))
            show("ensemble n=2000 p=20 ntree=100",
                 bench_ensemble(2000, 20, 100, repeats))
            show("dss n=500 P=400 lambda=5",
                 bench_dss(500, 400, 5.0, repeats))
            show("dss n=400 P=800 (wide) lambda=10",
                 bench_dss(400, 800, 10.0, repeats))
    finally:
        _split.set_backend(default)


if __name__ == "__main__":
    main()
