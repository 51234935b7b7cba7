import itertools

import pytest

from phl.freemodel import representing_model, repn_morphism
from phl.morphology import (
    MorphologyError, closed_submodel_generated, diagonal_fillers, factorize,
    is_closed_mono, is_dense, is_injective, is_retraction, is_surjective,
    is_U_retraction, orthogonal,
)
from phl.semantics import (
    Homomorphism, check_hom, compose_homs, enumerate_homs, enumerate_models,
    holds, identity_hom, is_model, make_structure,
)
from phl.syntax import parse_formula_in_context, parse_sequent
from phl.theories import (
    antichain_poset, chain_poset, cycle_preorder, mon_theory, pos_theory,
    set_theory, zmod_monoid,
)
from phl.translation import identity_morphism, make_theory_morphism, U_rho_hom


def incl(small, big, name="i"):
    maps = {s: {a: a for a in small.carrier(s)}
            for s in small.signature.sorts}
    return Homomorphism(name, small, big, maps)


class TestClosedMono:
    def test_submonoid_0_2_closed(self, mon, z4):
        sub, i = closed_submodel_generated(z4, {"*": {"0", "2"}})
        assert set(sub.carrier("*")) == {"0", "2"}
        assert is_closed_mono(i)

    def test_discrete_suborder_not_closed(self, pos, chain2):
        disc = antichain_poset(2)
        j = incl(disc, chain2)
        assert check_hom(j)
        assert not is_closed_mono(j)

    def test_identity_closed(self, chain2):
        assert is_closed_mono(identity_hom(chain2))

    def test_non_mono_rejected(self, chain2):
        h = Homomorphism("c", chain2, chain2, {"*": {"a": "b", "b": "b"}})
        with pytest.raises(MorphologyError):
            is_closed_mono(h)


class TestGeneratedSubmodel:
    def test_z4_generated_by_2(self, z4):
        sub, i = closed_submodel_generated(z4, {"*": {"2"}})
        assert set(sub.carrier("*")) == {"0", "2"}
        assert is_closed_mono(i)

    def test_empty_generates_constants(self, z4):
        sub, _ = closed_submodel_generated(z4, {"*": set()})
        assert set(sub.carrier("*")) == {"0"}

    def test_full_carrier(self, z4):
        sub, _ = closed_submodel_generated(z4, {"*": set(z4.carrier("*"))})
        assert sub.carriers == z4.carriers
        assert sub.funcs == z4.funcs

    def test_minimality(self, z4, mon):
        # any closed submodel containing {2} contains the generated one
        sub, _ = closed_submodel_generated(z4, {"*": {"2"}})
        for mask in itertools.product([False, True], repeat=4):
            subset = {e for e, keep in zip(z4.carrier("*"), mask) if keep}
            if "2" not in subset:
                continue
            cand, j = closed_submodel_generated(z4, {"*": subset})
            if set(cand.carrier("*")) == subset:  # subset already closed
                assert subset >= set(sub.carrier("*"))


class TestDense:
    def test_generating_inclusion_dense(self, mon, z2):
        one = make_structure("one", mon.signature, {"*": ("1",)})
        # bare element 1 inside Z/2: no tables on the source
        h = Homomorphism("j", one, z2, {"*": {"1": "1"}})
        assert check_hom(h)
        assert is_dense(h)

    def test_surjections_dense_for_relational(self, pos, chain2):
        pt = chain_poset(1)
        h = Homomorphism("c", chain2, pt, {"*": {"a": "a", "b": "a"}})
        assert is_dense(h)

    def test_proper_closed_inclusion_not_dense(self, z4):
        sub, i = closed_submodel_generated(z4, {"*": {"2"}})
        assert not is_dense(i)


class TestFactorize:
    def test_identity(self, chain2):
        fr = factorize(identity_hom(chain2))
        assert fr.mid.carriers == chain2.carriers
        assert is_dense(fr.dense) and is_closed_mono(fr.closed_mono)

    def test_generating_element(self, mon, z2):
        one = make_structure("one", mon.signature, {"*": ("1",)})
        h = Homomorphism("j", one, z2, {"*": {"1": "1"}})
        fr = factorize(h)
        assert set(fr.mid.carrier("*")) == {"0", "1"}  # dense onto Z/2

    def test_constant_map(self, chain2):
        h = Homomorphism("cb", chain2, chain2, {"*": {"a": "b", "b": "b"}})
        fr = factorize(h)
        assert set(fr.mid.carrier("*")) == {"b"}
        assert compose_homs(fr.closed_mono, fr.dense).maps == h.maps

    def test_random_homs_compose(self, pos, mon):
        for theory, k in ((pos, 3), (mon, 3)):
            models = list(enumerate_models(theory, 2))
            count = 0
            for m in models:
                for n in models:
                    for h in enumerate_homs(m, n):
                        fr = factorize(h)
                        assert compose_homs(fr.closed_mono, fr.dense).maps == h.maps
                        count += 1
                        if count > 60:
                            break
                    if count > 60:
                        break
                if count > 60:
                    break
            assert count > 0


class TestOrthogonality:
    def antisym_arrow(self):
        # over preorders, where antisymmetry is not an axiom
        from phl.theories import preorder_theory
        pre = preorder_theory()
        ctx, phi = parse_formula_in_context("[x:*, y:*] leq(x,y) /\\ leq(y,x)",
                                            pre.signature)
        src = representing_model(pre, ctx, phi, 2)
        ctx2, phi2 = parse_formula_in_context(
            "[x:*, y:*] leq(x,y) /\\ leq(y,x) /\\ x = y", pre.signature)
        tgt = representing_model(pre, ctx2, phi2, 2)
        from phl.syntax import Var
        return repn_morphism(src, tgt, (Var("x"), Var("y"))).hom

    def test_arrow_is_proper(self):
        e = self.antisym_arrow()
        assert e.source.size() == 2 and e.target.size() == 1

    def test_chain_orthogonal(self, chain2):
        e = self.antisym_arrow()
        assert orthogonal(chain2, e)

    def test_cycle_not_orthogonal(self):
        e = self.antisym_arrow()
        assert not orthogonal(cycle_preorder(), e)

    def test_validity_iff_orthogonality(self):
        from phl.theories import preorder_theory
        pre = preorder_theory()
        e = self.antisym_arrow()
        antisym = parse_sequent("[x:*, y:*] leq(x,y) /\\ leq(y,x) |- x = y",
                                pre.signature)
        for m in enumerate_models(pre, 3):
            assert holds(m, antisym).ok == orthogonal(m, e)


class TestDiagonalFillers:
    def test_unique_filler_for_dense_vs_closed(self, pos, mon):
        theory = mon_theory()
        models = list(enumerate_models(theory, 2))
        denses, monos = [], []
        for m in models:
            for n in models:
                for h in enumerate_homs(m, n):
                    fr = factorize(h)
                    denses.append(fr.dense)
                    monos.append(fr.closed_mono)
        checked = 0
        for e in denses[:8]:
            for mno in monos[:8]:
                for u in enumerate_homs(e.source, mno.source):
                    for v in enumerate_homs(e.target, mno.target):
                        if compose_homs(v, e).maps != compose_homs(mno, u).maps:
                            continue
                        fillers = diagonal_fillers(e, mno, u, v)
                        assert len(fillers) == 1
                        checked += 1
        assert checked > 0


class TestRetraction:
    def test_identity_is_retraction(self, chain2):
        assert is_retraction(identity_hom(chain2)).ok

    def test_collapse_chain_to_point(self, chain2):
        pt = chain_poset(1)
        h = Homomorphism("c", chain2, pt, {"*": {"a": "a", "b": "a"}})
        r = is_retraction(h)
        assert r.ok and r.section is not None

    def test_mod2_is_not_a_monoid_retraction(self, mon, z4, z2):
        # no monoid section exists: both preimages of 1 square to 2, not 0
        h = Homomorphism("mod2", z4, z2,
                         {"*": {"0": "0", "1": "1", "2": "0", "3": "1"}})
        assert check_hom(h)
        assert is_surjective(h)
        assert not is_retraction(h).ok

    def test_mod2_is_U_retraction(self, mon, z4, z2):
        # underlying sets: any section of the surjection works
        trivial = set_theory()
        rho = make_theory_morphism("u", trivial, mon_theory(), {"*": "*"},
                                   {}, {})
        h = Homomorphism("mod2", z4, z2,
                         {"*": {"0": "0", "1": "1", "2": "0", "3": "1"}})
        r = is_U_retraction(h, lambda f: U_rho_hom(rho, f))
        assert r.ok

    def test_retractions_are_dense(self, pos):
        models = list(enumerate_models(pos_theory(), 2))
        for m in models:
            for n in models:
                for h in enumerate_homs(m, n):
                    if is_retraction(h).ok:
                        assert is_dense(h)

    def test_surjective_closed_mono_is_iso(self, pos):
        models = list(enumerate_models(pos_theory(), 2))
        for m in models:
            for n in models:
                for h in enumerate_homs(m, n):
                    if is_injective(h) and is_surjective(h) \
                            and is_closed_mono(h):
                        inv = Homomorphism(
                            "inv", n, m,
                            {"*": {v: k for k, v in h.maps["*"].items()}})
                        assert check_hom(inv)


class TestComposition:
    def test_closed_monos_compose(self, z4):
        sub, i1 = closed_submodel_generated(z4, {"*": {"2"}})
        sub0, i2 = closed_submodel_generated(sub, {"*": set()})
        comp = compose_homs(i1, i2)
        assert is_closed_mono(comp)

    def test_dense_compose(self, mon, z2):
        one = make_structure("one", mon.signature, {"*": ("1",)})
        h = Homomorphism("j", one, z2, {"*": {"1": "1"}})
        ident = identity_hom(z2)
        assert is_dense(compose_homs(ident, h))
