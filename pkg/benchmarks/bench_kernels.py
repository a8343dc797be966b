"""Time each hot path under the numba and the numpy backend.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Each workload runs once per backend to warm up (numba compiles on first
call), then ``--repeat`` times; the table shows the best time and the
speedup.  Results from the two backends are compared before timing.
"""

import argparse
import itertools
import timeit

import numpy as np

from tileforge import kernels
from tileforge.analysis import fit_board
from tileforge.encode import alignment_exhaustive, encode_boolean_pair, encoder_equivalence_check
from tileforge.padic import PadicParams, f_p_array
from tileforge.sudoku import EXTEND, gen_affine, verify_board


def workloads():
    ns = np.arange(-(10**6), 10**6 + 1, dtype=np.int64)
    lines = np.array(list(itertools.product((1, 2), repeat=9)) * 200, dtype=np.int64)
    board = gen_affine(PadicParams(5), (0, 624), 2, 3, 4)
    small = gen_affine(PadicParams(5), (0, 80), 1, 1, 1)
    return {
        "f_p on 2e6 ints": lambda: f_p_array(5, ns),
        "classify 102k lines, p=3": lambda: kernels.classify_lines(lines, 3, 2),
        "verify board 625 rows": lambda: verify_board(board).full_lines,
        "verify board, extend mode": lambda: verify_board(small, EXTEND).partial_lines,
        "fit board 625 rows": lambda: tuple(fit_board(board)),
        "alignment search q=5": lambda: alignment_exhaustive(5).hypothesis_instances,
        "boolean pair equivalence": lambda: len(encoder_equivalence_check(encode_boolean_pair(3), 2).tiling_set),
    }


def _same(a, b):
    if isinstance(a, tuple) and a and isinstance(a[0], np.ndarray):
        return all(np.array_equal(x, y) for x, y in zip(a, b))
    if isinstance(a, np.ndarray):
        return np.array_equal(a, b)
    return a == b


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()
    if not kernels.HAS_NUMBA:
        parser.error("numba is unavailable (or TILEFORGE_DISABLE_NUMBA is set); nothing to compare")

    print(f"{'workload':<28} {'numba s':>10} {'numpy s':>10} {'speedup':>8}")
    for name, fn in workloads().items():
        best, results = {}, {}
        for backend in ("numba", "numpy"):
            kernels.set_backend(backend)
            results[backend] = fn()
            best[backend] = min(timeit.repeat(fn, number=1, repeat=args.repeat))
        kernels.set_backend("numba")
        if not _same(results["numba"], results["numpy"]):
            raise SystemExit(f"{name}: backends disagree")
        print(f"{name:<28} {best['numba']:>10.4f} {best['numpy']:>10.4f} {best['numpy'] / best['numba']:>7.1f}x")


if __name__ == "__main__":
    main()
