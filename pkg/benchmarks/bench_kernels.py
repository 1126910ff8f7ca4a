"""Compare the compiled counting kernel against the NumPy fallback.

Times the raw grouped log-likelihood call on sampled candidates and a
full pruned sweep under each backend, checking along the way that both
produce identical scores. Run from the repository root:

    python3 benchmarks/bench_kernels.py --vars 12 --rows 5000 -k 3
"""

import argparse
import itertools
import math
import time

import numpy as np

from bnprune import PruneConfig, build_lists, kernels
from bnprune.dataset import Dataset


def make_dataset(n, rows, max_arity, seed):
    rng = np.random.default_rng(seed)
    arities = rng.integers(2, max_arity + 1, size=n)
    cols = [rng.integers(0, a, size=rows) for a in arities]
    return Dataset.from_codes(np.column_stack(cols), arities=arities)


def sample_candidates(ds, k, count, seed):
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        child = int(rng.integers(ds.n))
        others = [i for i in range(ds.n) if i != child]
        size = int(rng.integers(1, k + 1))
        parents = tuple(sorted(rng.choice(others, size=size, replace=False)))
        out.append((child, parents))
    return out


def time_calls(ds, candidates, impl, repeat):
    best = math.inf
    values = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        values = [
            kernels.grouped_loglike(
                ds.codes, ds.arities, (child,), parents, impl=impl
            )
            for child, parents in candidates
        ]
        best = min(best, time.perf_counter() - t0)
    return best, values


def time_sweep(ds, k, backend, repeat):
    previous = kernels.set_backend(backend)
    try:
        best = math.inf
        lists = None
        for _ in range(repeat):
            t0 = time.perf_counter()
            lists, _ = build_lists(ds, PruneConfig(k))
            best = min(best, time.perf_counter() - t0)
        return best, lists
    finally:
        kernels.set_backend(previous)


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--vars", type=int, default=12)
    ap.add_argument("--rows", type=int, default=5000)
    ap.add_argument("--max-arity", type=int, default=4)
    ap.add_argument("-k", "--max-indegree", type=int, default=3)
    ap.add_argument("--calls", type=int, default=400, help="sampled candidates")
    ap.add_argument("--repeat", type=int, default=3, help="take best of this many")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    if not kernels.have_compiled():
        print("compiled kernel not built; nothing to compare")
        return

    ds = make_dataset(args.vars, args.rows, args.max_arity, args.seed)
    k = min(args.max_indegree, ds.n - 1)
    print(f"dataset: n={ds.n} N={ds.N} max_arity={args.max_arity} k={k}")

    candidates = sample_candidates(ds, k, args.calls, args.seed + 1)
    t_py, v_py = time_calls(ds, candidates, kernels._python, args.repeat)
    t_c, v_c = time_calls(ds, candidates, kernels._compiled, args.repeat)
    mismatch = sum(1 for a, b in zip(v_py, v_c) if a != b)
    assert mismatch == 0, f"{mismatch} of {len(v_py)} calls disagree"
    print(f"single calls   ({args.calls} candidates, best of {args.repeat}):")
    print(f"  python   {t_py:8.4f}s  ({args.calls / t_py:10.0f} calls/s)")
    print(f"  compiled {t_c:8.4f}s  ({args.calls / t_c:10.0f} calls/s)")
    print(f"  speedup  {t_py / t_c:8.2f}x   agreement: exact")

    t_py, lists_py = time_sweep(ds, k, "python", args.repeat)
    t_c, lists_c = time_sweep(ds, k, "compiled", args.repeat)
    same = all(
        a.keys() == b.keys()
        and all(a[m].bic == b[m].bic for m in a)
        for a, b in zip(lists_py, lists_c)
    )
    assert same, "sweep outputs differ between backends"
    scored = sum(len(s) for s in lists_c)
    print(f"full sweep     ({scored} scored sets, best of {args.repeat}):")
    print(f"  python   {t_py:8.4f}s")
    print(f"  compiled {t_c:8.4f}s")
    print(f"  speedup  {t_py / t_c:8.2f}x   agreement: exact")


if __name__ == "__main__":
    main()
