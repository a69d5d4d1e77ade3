"""Benchmark the numba kernels against the pure-numpy fallback.

Times the hot kernels on synthetic focal-set workloads and a full
engine-vs-global verification workload, for both backends.

    python benchmarks/bench_backends.py [--repeat N]

The backend for the workload section follows QMT_BACKEND, so run twice to
compare end to end; the kernel section always times both implementations.
"""

from __future__ import annotations

import argparse
import random
import time

import numpy as np

import qmtree
import qmtree._kernels_numpy as knp

try:
    import qmtree._kernels_numba as knb
except ImportError:
    knb = None


def time_call(fn, *args, repeat: int) -> float:
    fn(*args)  # warm up (numba compiles here)
    best = float("inf")
    for _ in range(repeat):
        start = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - start)
    return best


def synthetic_focal(rng: np.random.Generator, n: int, width: int):
    bits = rng.integers(1, 1 << width, size=n).astype(np.int64)
    masses = rng.random(n)
    masses /= masses.sum()
    return knp.group_sum(bits, masses)


def bench_kernels(repeat: int) -> None:
    rng = np.random.default_rng(0)
    width = 14
    b1, m1 = synthetic_focal(rng, 3000, width)
    b2, m2 = synthetic_focal(rng, 3000, width)
    block_bits = np.array(
        [0b11 << (2 * i) for i in range(width // 2)], dtype=np.int64
    )
    table = knp.belief_table(b1, m1, width)

    cases = [
        ("pairwise_combine", (b1, m1, b2, m2)),
        ("touched_blocks", (b1, block_bits)),
        ("union_of_blocks", (knp.touched_blocks(b1, block_bits), block_bits)),
        ("belief_table", (b1, m1, width)),
        ("mobius", (table,)),
    ]
    print(f"{'kernel':<18} {'numpy':>12} {'numba':>12} {'speedup':>9}")
    for name, args in cases:
        t_np = time_call(getattr(knp, name), *args, repeat=repeat)
        if knb is None:
            print(f"{name:<18} {t_np * 1e3:>10.2f}ms {'n/a':>12}")
            continue
        t_nb = time_call(getattr(knb, name), *args, repeat=repeat)
        print(
            f"{name:<18} {t_np * 1e3:>10.2f}ms {t_nb * 1e3:>10.2f}ms "
            f"{t_np / t_nb:>8.1f}x"
        )


def bench_workload(repeat: int) -> None:
    import sys
    from pathlib import Path

    sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "tests"))
    from generators import random_evidence, random_markov_tree

    rng = random.Random(7)
    instances = [
        (tree, random_evidence(rng, tree))
        for tree in (
            random_markov_tree(rng, rng.randint(3, 5), 8) for _ in range(20)
        )
    ]

    def verify_all():
        for tree, evidence in instances:
            qmtree.check_marginals_against_global(tree, evidence)

    best = time_call(verify_all, repeat=repeat)
    print(
        f"\nengine-vs-global verification x20 ({qmtree.get_backend()} backend): "
        f"{best * 1e3:.1f}ms"
    )


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()
    bench_kernels(args.repeat)
    bench_workload(args.repeat)


if __name__ == "__main__":
    main()
