"""Time each hot kernel under the numba and numpy backends.

    python benchmarks/bench_kernels.py [--repeat 5]

numba timings exclude the first (compiling) call.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from truthy import _accel, kernels
from truthy.features import near_duplicate_fraction
from truthy.simulate import gen_dataset, gen_graph_ba, CampaignSpec


def _cases():
    rng = np.random.default_rng(0)
    g = gen_graph_ba(20_000, 3, 1)
    fol_ptr, fol_idx = g.followers_csr
    live = rng.random(fol_idx.size) < 0.3
    seeds = rng.choice(g.n, 20, replace=False)
    theta = rng.uniform(0, 0.5, g.n)
    n_nodes = 50_000
    src, dst = rng.integers(0, n_nodes, 60_000), rng.integers(0, n_nodes, 60_000)
    x = np.sort(rng.pareto(1.5, 200_000))
    texts = [r.text for r in gen_dataset(0, [CampaignSpec(total_tweets=1800)], 3).records][:2000]
    return {
        "gini_sorted (200k)": lambda: kernels.gini_sorted(x),
        "component_labels (50k nodes)": lambda: kernels.component_labels(n_nodes, src, dst),
        "live_edge_rounds (BA 20k)": lambda: kernels.live_edge_rounds(fol_ptr, fol_idx, live, seeds),
        "threshold_rounds (BA 20k)": lambda: kernels.threshold_rounds(g.indptr, g.indices, theta, seeds),
        "near_duplicate_fraction (2000 texts)": lambda: near_duplicate_fraction(texts),
    }


def _time(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t)
    return best


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()

    cases = _cases()
    backends = [b for b in _accel.BACKENDS if b == "numpy" or _accel.HAVE_NUMBA]
    results = {}
    for backend in backends:
        with _accel.use_backend(backend):
            for name, fn in cases.items():
                fn()  # warm-up / JIT
                results[(name, backend)] = _time(fn, args.repeat)

    width = max(map(len, cases))
    print(f"{'kernel':<{width}}  " + "  ".join(f"{b:>10}" for b in backends) + ("     speedup" if len(backends) == 2 else ""))
    for name in cases:
        times = [results[(name, b)] for b in backends]
        row = f"{name:<{width}}  " + "  ".join(f"{t * 1e3:>8.2f}ms" for t in times)
        if len(times) == 2:
            row += f"  {times[1] / times[0]:>9.1f}x"
        print(row)


if __name__ == "__main__":
    main()
