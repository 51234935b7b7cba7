#!/usr/bin/env python3
"""Random-sequent soundness sweep: everything the prover proves must hold in
every enumerated small model, and every countermodel it reports must be a
genuine one."""
import argparse
import random
import time

from phl.prover import Proved, Refuted, prove
from phl.sampling import random_sequent
from phl.semantics import enumerate_models, holds
from phl.theories import cat_theory, mon_theory, pos_theory


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--count", type=int, default=50, help="sequents per theory")
    ap.add_argument("--seed", type=int, default=20260809)
    ap.add_argument("--depth", type=int, default=3)
    ap.add_argument("--model-size", type=int, default=3)
    args = ap.parse_args()

    rng = random.Random(args.seed)
    for theory in (pos_theory(), mon_theory(), cat_theory()):
        t0 = time.perf_counter()
        models = enumerate_models(theory, args.model_size)
        tallies = {"Proved": 0, "Refuted": 0, "Unknown": 0}
        violations = 0
        for _ in range(args.count):
            seq = random_sequent(rng, theory, max_vars=3, max_atoms=2, depth=2)
            r = prove(theory, seq, depth=args.depth, model_size=2,
                      max_work=40_000)
            tallies[r.verdict] += 1
            if isinstance(r, Proved):
                for m in models:
                    if not holds(m, seq).ok:
                        violations += 1
            elif isinstance(r, Refuted):
                assert not holds(r.countermodel, seq).ok
        elapsed = time.perf_counter() - t0
        print(f"{theory.name:5s} {tallies}  models={len(models)}  "
              f"violations={violations}  ({elapsed:.1f}s)")
        assert violations == 0


if __name__ == "__main__":
    main()
