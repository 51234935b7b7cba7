import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from phl.semantics import (
    ChainDiagram, Homomorphism, SemanticsError, chain_colimit, check_hom,
    compose_homs, enumerate_homs, enumerate_models, enumerate_structures,
    formula_holds_at, holds, identity_hom, interp_formula, interp_term,
    is_model, make_structure, parse_hom, parse_model, print_hom, print_model,
    product, terminal,
)
from phl.syntax import App, Context, Eq, RelApp, TRUE, Var, conj, defined, \
    parse_sequent
from phl.theories import (
    antichain_poset, chain_poset, cycle_preorder, mon_inv_theory, mon_theory,
    pos_theory, zmod_monoid,
)

from conftest import formulas_over


class TestInterpretation:
    def test_monoid_term_lookup(self, mon, z2):
        ctx = Context((("x", "*"), ("y", "*")))
        term = App("mul", (Var("x"), App("mul", (Var("y"), App("e", ())))))
        assert interp_term(z2, ctx, term, ("1", "1")) == "0"

    def test_projection(self, pos, chain2):
        ctx = Context((("x", "*"),))
        assert interp_term(chain2, ctx, Var("x"), ("a",)) == "a"

    def test_empty_table_undefined(self):
        mi = mon_inv_theory()
        m = make_structure("m2", mi.signature, {"*": ("e", "a")},
                           {"e": {(): "e"},
                            "mul": {("e", "e"): "e", ("e", "a"): "a",
                                    ("a", "e"): "a", ("a", "a"): "a"}})
        ctx = Context((("x", "*"),))
        assert interp_term(m, ctx, App("inv", (Var("x"),)), ("a",)) is None
        assert interp_formula(m, ctx, defined(App("inv", (Var("x"),)))) == set()

    def test_leq_formula(self, pos, chain2):
        ctx = Context((("x", "*"), ("y", "*")))
        f = RelApp("leq", (Var("x"), Var("y")))
        assert interp_formula(chain2, ctx, f) == {("a", "a"), ("a", "b"),
                                                  ("b", "b")}

    def test_truth_is_carrier(self, chain2):
        ctx = Context((("x", "*"),))
        assert interp_formula(chain2, ctx, TRUE) == {("a",), ("b",)}


class TestHolds:
    def antisym(self, pos):
        return parse_sequent("[x:*, y:*] leq(x,y) /\\ leq(y,x) |- x = y",
                             pos.signature)

    def test_chain_antisymmetric(self, pos, chain2):
        assert holds(chain2, self.antisym(pos)).ok

    def test_cycle_fails_with_witness(self, pos):
        r = holds(cycle_preorder(), self.antisym(pos))
        assert not r.ok
        assert r.witness in {("a", "b"), ("b", "a")}

    def test_tautology(self, pos, chain2):
        seq = parse_sequent("[x:*, y:*] leq(x,y) |- leq(x,y)", pos.signature)
        assert holds(chain2, seq).ok

    def test_is_model(self, pos, chain2):
        assert is_model(chain2, pos).ok
        empty = make_structure("mt", pos.signature, {"*": ()})
        assert is_model(empty, pos).ok
        report = is_model(cycle_preorder(), pos)
        assert not report.ok
        assert report.violations[0][0] == "antisym"


class TestHoms:
    def test_identity(self, chain2):
        assert check_hom(identity_hom(chain2))

    def test_collapse_to_point(self, pos, chain2):
        pt = chain_poset(1)
        h = Homomorphism("c", chain2, pt, {"*": {"a": "a", "b": "a"}})
        assert check_hom(h)

    def test_constant_and_reversal(self, chain2):
        const_b = Homomorphism("cb", chain2, chain2, {"*": {"a": "b", "b": "b"}})
        assert check_hom(const_b)
        rev = Homomorphism("rev", chain2, chain2, {"*": {"a": "b", "b": "a"}})
        assert not check_hom(rev)

    def test_enumerate_homs_count(self, chain2):
        # monotone self-maps of the 2-chain: aa, ab, bb
        assert len(enumerate_homs(chain2, chain2)) == 3

    def test_enumerate_agrees_with_brute_force(self, chain2, chain3):
        homs = enumerate_homs(chain2, chain3)
        brute = []
        for vals in itertools.product(chain3.carrier("*"), repeat=2):
            h = Homomorphism("b", chain2, chain3,
                             {"*": dict(zip(chain2.carrier("*"), vals))})
            if check_hom(h):
                brute.append(h.maps)
        assert [h.maps for h in homs] == brute

    def test_monoid_homs_preserve_unit(self, mon, z2, z4):
        homs = enumerate_homs(z4, z2)
        assert all(h.maps["*"]["0"] == "0" for h in homs)
        assert {h.maps["*"]["1"] for h in homs} == {"0", "1"}


class TestProduct:
    def test_square_of_chain(self, pos, chain2):
        p = product(pos.signature, [chain2, chain2])
        assert p.size() == 4
        assert is_model(p, pos).ok
        assert len(p.rel_table("leq")) == 9

    def test_empty_product_is_terminal(self, pos, mon):
        t = terminal(pos.signature)
        assert t.size() == 1
        assert is_model(t, pos).ok
        tm = terminal(mon.signature)
        assert is_model(tm, mon).ok
        assert len(tm.func_table("mul")) == 1

    def test_product_with_empty_is_empty(self, pos, chain2):
        empty = make_structure("mt", pos.signature, {"*": ()})
        p = product(pos.signature, [chain2, empty])
        assert p.size() == 0

    def test_size_cap(self, pos, chain3):
        with pytest.raises(SemanticsError):
            product(pos.signature, [chain3] * 8, cap=100)


class TestChainColimit:
    def inclusion(self, small, big):
        maps = {"*": {a: a for a in small.carrier("*")}}
        return Homomorphism("i", small, big, maps)

    def test_inclusion_chain(self, pos):
        c1, c2, c3 = chain_poset(1), chain_poset(2), chain_poset(3)
        d = ChainDiagram(
            order=(("1", "1"), ("2", "2"), ("3", "3"), ("1", "2"),
                   ("2", "3"), ("1", "3")),
            stages={"1": c1, "2": c2, "3": c3},
            arrows={("1", "2"): self.inclusion(c1, c2),
                    ("2", "3"): self.inclusion(c2, c3),
                    ("1", "3"): self.inclusion(c1, c3)})
        res = chain_colimit(pos_theory(), d)
        assert res.structure.size() == 3
        assert is_model(res.structure, pos_theory()).ok
        assert len(res.structure.rel_table("leq")) == 6
        for i in ("1", "2", "3"):
            assert check_hom(res.coprojections[i])

    def test_constant_diagram(self, pos, chain2):
        d = ChainDiagram(order=(("0", "0"),), stages={"0": chain2}, arrows={})
        res = chain_colimit(pos_theory(), d)
        assert res.structure.size() == 2
        assert len(res.structure.rel_table("leq")) == 3

    def test_monoid_two_stage(self, mon, z2, z4):
        h = Homomorphism("mod2", z4, z2,
                         {"*": {"0": "0", "1": "1", "2": "0", "3": "1"}})
        assert check_hom(h)
        d = ChainDiagram(order=(("a", "a"), ("b", "b"), ("a", "b")),
                         stages={"a": z4, "b": z2}, arrows={("a", "b"): h})
        res = chain_colimit(mon, d)
        assert res.structure.size() == 2
        assert is_model(res.structure, mon).ok

    def test_non_functorial_rejected(self, pos, chain2):
        swap = Homomorphism("s", chain2, chain2, {"*": {"a": "b", "b": "a"}})
        d = ChainDiagram(order=(("0", "0"), ("1", "1"), ("0", "1")),
                         stages={"0": chain2, "1": chain2},
                         arrows={("0", "1"): swap})
        with pytest.raises(SemanticsError):
            chain_colimit(pos_theory(), d)


class TestEnumeration:
    def test_monoid_counts(self, mon):
        # labelled monoids: 1 of size 1, 4 of size 2, 33 of size 3
        assert len(list(enumerate_structures(mon, {"*": 1}))) == 1
        assert len(list(enumerate_structures(mon, {"*": 2}))) == 4
        assert len(list(enumerate_structures(mon, {"*": 3}))) == 33

    def test_poset_counts(self, pos):
        # labelled posets: 1, 3, 19
        assert len(list(enumerate_structures(pos, {"*": 1}))) == 1
        assert len(list(enumerate_structures(pos, {"*": 2}))) == 3
        assert len(list(enumerate_structures(pos, {"*": 3}))) == 19

    def test_all_enumerated_are_models(self, pos):
        for m in enumerate_models(pos_theory(), 3):
            assert is_model(m, pos_theory()).ok


class TestMonotonicity:
    @settings(max_examples=40, deadline=None)
    @given(st.data())
    def test_hom_image_preserves_formulas(self, pos, data):
        ctx = Context((("x", "*"), ("y", "*")))
        f = data.draw(formulas_over(pos.signature, ctx))
        chain2 = chain_poset(2)
        chain3 = chain_poset(3)
        for h in enumerate_homs(chain2, chain3):
            for tup in interp_formula(chain2, ctx, f):
                image = tuple(h.maps["*"][a] for a in tup)
                assert formula_holds_at(chain3, ctx, f, image)

    @settings(max_examples=30, deadline=None)
    @given(st.data())
    def test_conj_is_intersection(self, pos, data):
        ctx = Context((("x", "*"), ("y", "*")))
        f1 = data.draw(formulas_over(pos.signature, ctx))
        f2 = data.draw(formulas_over(pos.signature, ctx))
        m = chain_poset(3)
        lhs = interp_formula(m, ctx, conj([f1, f2]))
        assert lhs == interp_formula(m, ctx, f1) & interp_formula(m, ctx, f2)


class TestTextFormats:
    def test_model_roundtrip(self, pos, chain2):
        text = print_model(chain2, "pos")
        m, claimed = parse_model(text, pos.signature)
        assert claimed == "pos"
        assert m.carriers == chain2.carriers
        assert m.rels == chain2.rels

    def test_monoid_model_roundtrip(self, mon, z4):
        m, _ = parse_model(print_model(z4, "mon"), mon.signature)
        assert m.funcs == z4.funcs

    def test_hom_roundtrip(self, chain2):
        h = Homomorphism("collapse", chain2, chain2,
                         {"*": {"a": "b", "b": "b"}})
        text = print_hom(h)
        h2 = parse_hom(text, {"chain2": chain2})
        assert h2.maps == h.maps
