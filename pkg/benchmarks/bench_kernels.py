"""Compare the numba and numpy elimination kernels.

    python benchmarks/bench_kernels.py [--repeat 3] [--seed 0]

Each workload runs on both backends (numba is warmed up first so JIT time is
not counted), the outputs are checked to be identical, and the best wall time
of ``--repeat`` runs is reported.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from lndeform import _kernels
from lndeform.base import Zmod
from lndeform.fstar_complex import FStar
from lndeform.ln_structure import StructureTable
from lndeform.ring_core import hochschild_matrix, truncated_polynomial_ring
from lndeform.s_algebra import canonical_instance, trivial_instance


def workloads(seed: int):
    # differential matrices of the kind met in practice; random dense ones overflow int64 at once
    rng = np.random.default_rng(seed)
    _, T2 = canonical_instance(2)
    d1 = FStar(T2, StructureTable(2)).matrix(1).astype(np.int64)
    dual = truncated_polynomial_ring(3, Zmod(2))
    d1_dual = FStar(trivial_instance(dual, 2), StructureTable(2)).matrix(1).astype(np.int64)
    hh = hochschild_matrix(truncated_polynomial_ring(4, Zmod(2)), 2).astype(np.int64)
    hh_z = hochschild_matrix(truncated_polynomial_ring(5), 3).astype(np.int64)
    d1_z = FStar(trivial_instance(truncated_polynomial_ring(3), 3), StructureTable(3)).matrix(1).astype(np.int64)
    mixed = d1_z[rng.permutation(d1_z.shape[0])]
    return [
        ("smith  d1 canonical(2)", "smith", d1),
        ("smith  d1 Z[x]/(x^3) N=3", "smith", d1_z),
        ("smith  HH^3 Z[x]/(x^5)", "smith", hh_z),
        ("smith  d1 rows permuted", "smith", mixed),
        ("rref2  d1 F2[x]/(x^3) N=2", "rref", d1_dual),
        ("rref2  HH^2 F2[x]/(x^4)", "rref", hh),
    ]


def run(kind, M):
    if kind == "smith":
        try:
            return _kernels.smith_int64(M)
        except _kernels.KernelOverflow:
            # both backends would share this path, so the row is not a comparison
            return None
    return _kernels.rref_mod_p(M, 2)


def best_of(kind, M, repeat):
    best = float("inf")
    for _ in range(repeat):
        start = time.perf_counter()
        out = run(kind, M)
        best = min(best, time.perf_counter() - start)
    return best, out


def same(a, b) -> bool:
    if a is None or b is None:
        return a is b
    if isinstance(a, tuple) and len(a) == 3:
        return all(np.array_equal(x, y) for x, y in zip(a, b))
    return np.array_equal(a[0], b[0]) and a[1] == b[1]


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    if not _kernels._HAVE_NUMBA:
        raise SystemExit("numba is not importable; nothing to compare")
    prev = _kernels.BACKEND
    print(f"{'workload':<28}{'shape':>12}{'numba s':>11}{'numpy s':>11}{'speedup':>9}  match")
    try:
        for name, kind, M in workloads(args.seed):
            _kernels.set_backend("numba")
            run(kind, M)
            t_nb, out_nb = best_of(kind, M, args.repeat)
            _kernels.set_backend("numpy")
            t_np, out_np = best_of(kind, M, args.repeat)
            shape = "x".join(str(s) for s in M.shape)
            if out_nb is None:
                print(f"{name:<28}{shape:>12}  int64 overflow, object fallback only")
                continue
            print(f"{name:<28}{shape:>12}{t_nb:>11.4f}{t_np:>11.4f}{t_np / t_nb:>9.1f}  {same(out_nb, out_np)}")
    finally:
        _kernels.set_backend(prev)


if __name__ == "__main__":
    main()
