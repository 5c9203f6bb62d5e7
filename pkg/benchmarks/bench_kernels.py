"""Compiled vs numpy backend timings.

Times three things on both backends: a single ADMM sweep, a full solve and the
exhaustive oracle. Run from the repository root:

    python benchmarks/bench_kernels.py [--repeat 5]
"""

import argparse
import statistics
import time

import numpy as np

from ckmeans import kernels
from ckmeans.admm import SolverConfig, init_state, normalise, run, sweep
from ckmeans.constraints import ConstraintSet
from ckmeans.io import gen_blobs
from ckmeans.kmeans import lloyd, to_assignment
from ckmeans.operators import Shape
from ckmeans.oracle import brute_force_solve


def instance(k, per, d, seed=0):
    S, labels = gen_blobs(k, per, d, 0.5, 3.0, seed=seed)
    n = S.shape[1]
    rng = np.random.default_rng(seed)
    idx = rng.permutation(n)
    ml = [(int(a), int(b)) for a, b in zip(idx[:2], idx[2:4]) if labels[a] == labels[b]]
    cl = [(int(a), int(b)) for a, b in zip(idx[4:6], idx[6:8]) if labels[a] != labels[b]]
    return S, ConstraintSet(tuple([per] * k), ml, cl)


def timed(fn, repeat):
    out = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        out.append(time.perf_counter() - t0)
    return statistics.median(out)


def bench_sweep(S, k, cs, backend, repeat, sweeps=50):
    cfg = SolverConfig(backend=backend)
    Sn = normalise(S, cfg.normalize)[0]
    x0 = to_assignment(lloyd(S, k, seed=0).labels, Shape(S.shape[1], k, S.shape[0]))

    def go():
        state = init_state(Sn, k, cs, cfg, x0)
        for _ in range(sweeps):
            sweep(state, Sn, cs, cfg)
    return timed(go, repeat) / sweeps


def bench_solve(S, k, cs, backend, repeat):
    cfg = SolverConfig(backend=backend, max_outer_iters=300)
    return timed(lambda: run(S, k, cs, cfg), repeat)


def bench_oracle(S, k, cs, backend, repeat):
    return timed(lambda: brute_force_solve(S, k, cs, backend=backend), repeat)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if kernels.compiled is None:
        print("compiled kernels not built; only the numpy backend is timed")
    backends = ["python"] + (["compiled"] if kernels.compiled is not None else [])

    rows = []
    for k, per, d in [(3, 4, 2), (4, 25, 5), (5, 100, 10)]:
        S, cs = instance(k, per, d)
        for b in backends:
            rows.append(("sweep", f"n={k * per} k={k} d={d}", b,
                         bench_sweep(S, k, cs, b, args.repeat)))
            rows.append(("solve", f"n={k * per} k={k} d={d}", b,
                         bench_solve(S, k, cs, b, max(1, args.repeat // 2))))
    for k, per in [(2, 6), (3, 3), (3, 4)]:
        S, cs = instance(k, per, 2)
        for b in backends:
            rows.append(("oracle", f"n={k * per} k={k}", b,
                         bench_oracle(S, k, cs, b, args.repeat)))

    base = {(task, size): t for task, size, b, t in rows if b == "python"}
    print(f"{'task':<8}{'size':<20}{'backend':<10}{'seconds':>12}{'speedup':>10}")
    for task, size, b, t in rows:
        print(f"{task:<8}{size:<20}{b:<10}{t:>12.3e}{base[task, size] / t:>9.1f}x")


if __name__ == "__main__":
    main()
