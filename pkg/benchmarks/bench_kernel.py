#!/usr/bin/env python3
"""Benchmark the two tautology-kernel lanes on random formulas.

The sweep kernel sits on the hot path of the decision procedure (one
stability test per search node), so both lanes are timed on the same
compiled programs: the Cython extension chunks the assignment space into
64-bit words; the pure lane packs whole truth columns into bigints.

Usage: python benchmarks/bench_kernel.py [--atoms N] [--formulas K] [--seed S]
"""

from __future__ import annotations

import argparse
import random
import time
from array import array

from cl4kit import _kernel_py, kernel
from cl4kit.syntax import Atom, Implies, Neg, ParAnd, ParOr, elem_letter

try:
    from cl4kit import _kernel as _compiled
except ImportError:
    _compiled = None


def random_formula(rng: random.Random, n_atoms: int, size: int):
    atoms = [Atom(elem_letter(f"p{i}")) for i in range(n_atoms)]

    def build(budget: int):
        if budget <= 1:
            return rng.choice(atoms)
        kind = rng.randrange(4)
        if kind == 0:
            return Neg(build(budget - 1))
        left = budget // 2
        if kind == 1:
            return ParAnd((build(left), build(budget - left)))
        if kind == 2:
            return ParOr((build(left), build(budget - left)))
        return Implies(build(left), build(budget - left))

    return build(size)


def bench(lane, programs, repeats: int = 3) -> float:
    best = []
    for ops, n in programs:
        prog = array("q", ops)
        times = []
        for _ in range(repeats):
            t0 = time.perf_counter()
            lane.falsifying(prog, n)
            times.append(time.perf_counter() - t0)
        best.append(min(times))
    return sum(best)


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--atoms", type=int, default=18)
    parser.add_argument("--formulas", type=int, default=20)
    parser.add_argument("--size", type=int, default=60)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    rng = random.Random(args.seed)
    falsifiable = []
    tautologies = []
    while len(falsifiable) < args.formulas:
        f = random_formula(rng, args.atoms, args.size)
        ops, atoms = kernel.compile_program(f)
        if len(atoms) != args.atoms:
            continue
        falsifiable.append((ops, len(atoms)))
        # f -> f over the same atoms: forces a full sweep in both lanes
        taut_ops, taut_atoms = kernel.compile_program(Implies(f, f))
        tautologies.append((taut_ops, len(taut_atoms)))

    print(f"{args.formulas} formulas, {args.atoms} atoms each, "
          f"{2 ** args.atoms} assignments per formula")
    for label, programs in (("falsifiable", falsifiable), ("tautologies", tautologies)):
        pure = bench(_kernel_py, programs)
        line = f"  {label:12} pure bigint: {pure:.3f}s"
        if _compiled is not None:
            compiled = bench(_compiled, programs)
            ratio = pure / compiled if compiled > 0 else float("inf")
            line += f"   compiled: {compiled:.3f}s   (pure/compiled {ratio:.1f}x)"
        else:
            line += "   compiled: not built"
        print(line)
    print(f"active lane at import: {kernel.active_lane()}")


if __name__ == "__main__":
    main()
