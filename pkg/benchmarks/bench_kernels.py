"""Time the compiled kernels against their pure-Python twins.

    python benchmarks/bench_kernels.py [--repeat N] [--quick]

Each row runs the same inputs through ``hypqec._core`` and
``hypqec._fallback``, checks that the outputs agree, and prints the best
wall time of each and the speed-up.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from hypqec import _fallback
from hypqec.construct import build
from hypqec.coxeter import presentation_from_symbol
from hypqec.decode import TannerGraph, prior_llr
from hypqec.gf2 import pack_rows
from hypqec.groups import relator_closure

try:
    from hypqec import _core
except ImportError:  # pragma: no cover
    _core = None

DAVIS = "ababacbdedcbabacedcbaedced"


def best_of(fn, repeat):
    times = []
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def coset_case(symbol, extra=()):
    pres = presentation_from_symbol(symbol)
    words = relator_closure(pres.relators() + [pres.parse_word(w) for w in extra])

    def run(mod):
        table, complete, _, _ = mod.coset_enumerate(pres.rank, words, [], 1_000_000)
        assert complete
        return mod.standardize_table(table)

    return run


def echelon_case(rows, cols, density=0.05):
    A = (np.random.default_rng(0).random((rows, cols)) < density).astype(np.uint8)
    packed = pack_rows(A)

    def run(mod):
        M = packed.copy()
        rank, piv = mod.gf2_echelon(M, cols, True)
        return rank, piv

    return run


def bp_case(descriptor, p, rounds):
    code = build(descriptor).code
    t = TannerGraph(code.hx)
    s = t.syndrome((np.random.default_rng(1).random(t.n) < p).astype(np.uint8))

    def run(mod):
        best, llr, *_ = mod.bp_kernel(t.check_ptr, t.edge_qubit, t.qubit_ptr, t.qubit_edge, s,
                                      prior_llr(p), rounds, False)
        return best, llr

    return run


def same(a, b):
    if isinstance(a, tuple):
        return all(same(x, y) for x, y in zip(a, b))
    return np.array_equal(np.asarray(a), np.asarray(b))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--quick", action="store_true", help="smaller inputs")
    args = ap.parse_args()
    if _core is None:
        raise SystemExit("the compiled extension is not built; nothing to compare")

    cases = [
        ("coset_enumerate H3 (120)", coset_case("5,3")),
        ("coset_enumerate H4 (14400)", coset_case("5,3,3")),
        ("gf2_echelon 500x1000", echelon_case(500, 1000)),
        ("bp_kernel torus L=8, 20 rounds", bp_case("4,4/word(abcbabcbabcbabcbabcbabcbabcbabcb)", 0.05, 20)),
        ("bp_kernel Davis, 20 rounds", bp_case(f"5,3,3,5/word({DAVIS})", 0.03, 20)),
    ]
    if not args.quick:
        cases += [
            ("coset_enumerate Davis (14400)", coset_case("5,3,3,5", [DAVIS])),
            ("gf2_echelon 2000x4000", echelon_case(2000, 4000, 0.01)),
        ]

    print(f"{'kernel':38s} {'compiled':>10s} {'python':>10s} {'speed-up':>9s}  agree")
    for name, run in cases:
        tc, oc = best_of(lambda: run(_core), args.repeat)
        tp, op = best_of(lambda: run(_fallback), max(1, args.repeat // 2))
        print(f"{name:38s} {tc:10.4f} {tp:10.4f} {tp / tc:8.1f}x  {same(oc, op)}")


if __name__ == "__main__":
    main()
