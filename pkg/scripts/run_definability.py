#!/usr/bin/env python3
"""Variety experiments at desk scale.

Posets among preorders (antisymmetry) and groups among monoids with a
partial inverse (totality of the inverse): both classes should be fixed
points of the closure operators, and the first also admits the
orthogonality characterization of its judgment.
"""
import argparse
import time

from phl.birkhoff import definability_check
from phl.semantics import enumerate_models, holds
from phl.syntax import NamedAxiom, parse_sequent
from phl.theories import mon_inv_theory, preorder_theory


def show(title, rep, elapsed):
    print(f"== {title} ({elapsed:.1f}s)")
    print(f"   class size (up to iso): {rep.class_size}")
    print(f"   hsp fixed point:        {'yes' if rep.fixed_point else 'NO'}")
    for w in rep.closure_failures:
        print(f"   closure failure: {w}")
    print(f"   orthogonality matches:  {'yes' if rep.orthogonality_ok else 'NO'}")
    for w in rep.orthogonality_failures:
        print(f"   mismatch: {w}")
    for w in rep.orthogonality_skipped:
        print(f"   skipped: {w}")
    print(f"   pool insufficiency notes: {len(rep.pool_insufficiency)}")


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--poset-size", type=int, default=3)
    ap.add_argument("--monoid-size", type=int, default=4)
    ap.add_argument("--depth", type=int, default=3)
    args = ap.parse_args()

    pre = preorder_theory()
    t0 = time.perf_counter()
    pool = list(enumerate_models(pre, args.poset_size))
    antisym = NamedAxiom("antisym", parse_sequent(
        "[x:*, y:*] leq(x,y) /\\ leq(y,x) |- x = y", pre.signature))
    rep = definability_check(pre, [antisym], pool, depth=args.depth,
                             size_cap=30)
    show(f"posets among the {len(pool)} preorders with <= {args.poset_size} "
         "elements", rep, time.perf_counter() - t0)

    mi = mon_inv_theory()
    t0 = time.perf_counter()
    mpool = list(enumerate_models(mi, args.monoid_size))
    inv_total = NamedAxiom("inv_total", parse_sequent(
        "[x:*] true |- def(inv(x))", mi.signature))
    grep = definability_check(mi, [inv_total], mpool, depth=args.depth,
                              size_cap=20)
    groups = sum(1 for m in mpool if holds(m, inv_total.sequent).ok)
    show(f"groups among the {len(mpool)} monoids with partial inverse and "
         f"<= {args.monoid_size} elements ({groups} satisfy the judgment)",
         grep, time.perf_counter() - t0)


if __name__ == "__main__":
    main()
