"""Representing models by bounded term saturation and congruence closure.

The engine maintains an e-graph of provably defined terms: nodes are function
applications over congruence classes, merged by provable equality, together
with derived relation facts.  Saturation instantiates theory axioms over the
current classes; the depth budget bounds the construction depth of new nodes.
A presentation is saturated when one further pass with a relaxed budget
neither changes the graph nor defers any conclusion, in which case the
quotient structure is the exact representing model.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property

from .semantics import (
    Homomorphism, PartialStructure, check_hom, enumerate_homs, interp_formula,
    interp_term, is_model,
)
from .syntax import (
    App, Conj, Context, Eq, Formula, PhlError, RelApp, Signature, Term,
    Theory, Truth, Var, conj, conjuncts, print_term, subst_formula, subst_term,
    term_depth, well_formed,
)


class FreeModelError(PhlError):
    pass


@dataclass(frozen=True)
class SaturationStatus:
    saturated: bool
    depth: int

    def __str__(self):
        return f"{'Saturated' if self.saturated else 'Truncated'}({self.depth})"


class TermGraph:
    """E-graph over a signature with relation facts and a derivation trace.

    Congruence closure is incremental: every application node is indexed by
    its canonical key, each class keeps the application nodes it occurs in,
    and a merge only reprocesses the parents of the absorbed class.
    """

    def __init__(self, sig: Signature):
        self.sig = sig
        self.parent: list[int] = []
        self.sym: list[str | None] = []       # None for variables
        self.varname: list[str | None] = []
        self.children: list[tuple[int, ...]] = []
        self.sort: list[str] = []
        self.node_key: list[tuple | None] = []
        self.table: dict[tuple[str, tuple[int, ...]], int] = {}
        self.parents_of: dict[int, set[int]] = {}
        self.class_depth: dict[int, int] = {}
        self.facts: set[tuple[str, tuple[int, ...]]] = set()
        self.trace: list[str] = []
        self.vars: dict[str, int] = {}
        self.n_classes = 0

    def find(self, i: int) -> int:
        while self.parent[i] != i:
            self.parent[i] = self.parent[self.parent[i]]
            i = self.parent[i]
        return i

    def merge(self, a: int, b: int, reason: str = "") -> bool:
        if self.find(a) == self.find(b):
            return False
        if reason:
            self.trace.append(reason)
        queue = [(a, b)]
        while queue:
            x, y = queue.pop()
            rx, ry = self.find(x), self.find(y)
            if rx == ry:
                continue
            if ry < rx:
                rx, ry = ry, rx
            self.parent[ry] = rx
            self.n_classes -= 1
            self.class_depth[rx] = min(self.class_depth[rx],
                                       self.class_depth.pop(ry))
            if any(ry in args for _, args in self.facts):
                self.facts = {(r, tuple(self.find(c) for c in args))
                              for r, args in self.facts}
            moved = self.parents_of.pop(ry, set())
            self.parents_of.setdefault(rx, set()).update(moved)
            for i in moved:
                old = self.node_key[i]
                new = (self.sym[i], tuple(self.find(c) for c in self.children[i]))
                if old == new:
                    continue
                if old is not None and self.table.get(old) == i:
                    del self.table[old]
                j = self.table.get(new)
                if j is None:
                    self.table[new] = i
                    self.node_key[i] = new
                else:
                    self.node_key[i] = None
                    if self.find(j) != self.find(i):
                        queue.append((j, i))
        return True

    def add_var(self, name: str, sort: str) -> int:
        if name in self.vars:
            return self.find(self.vars[name])
        i = len(self.parent)
        self.parent.append(i)
        self.sym.append(None)
        self.varname.append(name)
        self.children.append(())
        self.sort.append(sort)
        self.node_key.append(None)
        self.class_depth[i] = 0
        self.n_classes += 1
        self.vars[name] = i
        return i

    def lookup(self, term: Term, env: dict[str, int]) -> int | None:
        """Class of a term over an environment, without creating nodes."""
        if isinstance(term, Var):
            c = env.get(term.name)
            return None if c is None else self.find(c)
        kids = []
        for a in term.args:
            c = self.lookup(a, env)
            if c is None:
                return None
            kids.append(c)
        i = self.table.get((term.func, tuple(kids)))
        return None if i is None else self.find(i)

    def add_term(self, term: Term, env: dict[str, int], cap: int | None) -> int | None:
        """Class of a term, creating nodes up to the depth cap; None when the
        budget does not allow materializing it."""
        if isinstance(term, Var):
            return self.find(env[term.name])
        kids = []
        for a in term.args:
            c = self.add_term(a, env, cap)
            if c is None:
                return None
            kids.append(self.find(c))
        key = (term.func, tuple(kids))
        i = self.table.get(key)
        if i is not None:
            return self.find(i)
        d = 1 + max((self.class_depth[k] for k in kids), default=0)
        if cap is not None and d > cap:
            return None
        decl = self.sig.function(term.func)
        i = len(self.parent)
        self.parent.append(i)
        self.sym.append(term.func)
        self.varname.append(None)
        self.children.append(tuple(kids))
        self.sort.append(decl.result)
        self.node_key.append(key)
        self.class_depth[i] = d
        self.n_classes += 1
        self.table[key] = i
        for k in set(kids):
            self.parents_of.setdefault(k, set()).add(i)
        return i

    def add_fact(self, rel: str, classes: tuple[int, ...], reason: str = "") -> bool:
        key = (rel, tuple(self.find(c) for c in classes))
        if key in self.facts:
            return False
        self.facts.add(key)
        if reason:
            self.trace.append(reason)
        return True

    def has_fact(self, rel: str, classes: tuple[int, ...]) -> bool:
        return (rel, tuple(self.find(c) for c in classes)) in self.facts

    def stamp(self) -> tuple[int, int, int]:
        return (len(self.parent), self.n_classes, len(self.facts))

    def classes_by_sort(self) -> dict[str, list[int]]:
        out: dict[str, list[int]] = {s: [] for s in self.sig.sorts}
        seen = set()
        for i in range(len(self.parent)):
            r = self.find(i)
            if r not in seen:
                seen.add(r)
                out[self.sort[r]].append(r)
        for s in out:
            out[s].sort()
        return out

    def copy(self) -> "TermGraph":
        g = TermGraph(self.sig)
        g.parent = list(self.parent)
        g.sym = list(self.sym)
        g.varname = list(self.varname)
        g.children = list(self.children)
        g.sort = list(self.sort)
        g.node_key = list(self.node_key)
        g.table = dict(self.table)
        g.parents_of = {k: set(v) for k, v in self.parents_of.items()}
        g.class_depth = dict(self.class_depth)
        g.facts = set(self.facts)
        g.trace = list(self.trace)
        g.vars = dict(self.vars)
        g.n_classes = self.n_classes
        return g

    def representatives(self) -> dict[int, Term]:
        """Deterministic canonical term per class, minimal by
        (depth, print length, print)."""
        reps: dict[int, Term] = {}

        def key(t: Term):
            s = print_term(t)
            return (term_depth(t), len(s), s)

        changed = True
        while changed:
            changed = False
            for i in range(len(self.parent)):
                r = self.find(i)
                if self.sym[i] is None:
                    cand: Term | None = Var(self.varname[i])
                else:
                    kid_terms = []
                    for c in self.children[i]:
                        t = reps.get(self.find(c))
                        if t is None:
                            kid_terms = None
                            break
                        kid_terms.append(t)
                    cand = (App(self.sym[i], tuple(kid_terms))
                            if kid_terms is not None else None)
                if cand is None:
                    continue
                cur = reps.get(r)
                if cur is None or key(cand) < key(cur):
                    reps[r] = cand
                    changed = True
        return reps


def holds_in_graph(g: TermGraph, f: Formula, env: dict[str, int]) -> bool:
    """Whether a formula instance is established by the current graph."""
    if isinstance(f, Truth):
        return True
    if isinstance(f, Conj):
        return all(holds_in_graph(g, p, env) for p in f.parts)
    if isinstance(f, Eq):
        a = g.lookup(f.lhs, env)
        b = g.lookup(f.rhs, env)
        return a is not None and b is not None and a == b
    classes = []
    for t in f.args:
        c = g.lookup(t, env)
        if c is None:
            return False
        classes.append(c)
    return g.has_fact(f.rel, tuple(classes))


def assert_in_graph(g: TermGraph, f: Formula, env: dict[str, int],
                    cap: int | None, reason: str = "") -> bool:
    """Drive a formula instance into the graph; True if some atom was
    deferred for exceeding the depth budget."""
    deferred = False
    if isinstance(f, Truth):
        return False
    if isinstance(f, Conj):
        for p in f.parts:
            deferred |= assert_in_graph(g, p, env, cap, reason)
        return deferred
    if isinstance(f, Eq):
        a = g.add_term(f.lhs, env, cap)
        b = g.add_term(f.rhs, env, cap)
        if a is None or b is None:
            return True
        if g.find(a) != g.find(b):
            g.merge(a, b, reason)
        return False
    classes = []
    for t in f.args:
        c = g.add_term(t, env, cap)
        if c is None:
            deferred = True
        else:
            classes.append(c)
    if deferred:
        return True
    g.add_fact(f.rel, tuple(classes), reason)
    return False


DEFAULT_WORK_BUDGET = 500_000


class WorkBudget:
    """Mutable instantiation allowance shared across saturation passes."""

    def __init__(self, limit: int = DEFAULT_WORK_BUDGET):
        self.remaining = limit
        self.exhausted = False

    def spend(self, n: int = 1) -> bool:
        self.remaining -= n
        if self.remaining < 0:
            self.exhausted = True
        return not self.exhausted


def saturation_pass(theory: Theory, g: TermGraph, cap: int | None,
                    budget: WorkBudget | None = None) -> tuple[bool, bool]:
    """One full pass of axiom instantiation; returns (changed, deferred).

    Environments range over the classes canonical at the start of the pass;
    classes absorbed mid-pass are skipped (their instances are covered at the
    absorbing class, which is always the older one).  An exhausted work
    budget aborts the pass and counts as a deferral."""
    before = g.stamp()
    deferred = False
    classes = g.classes_by_sort()
    for ax in theory.axioms:
        ctx = ax.sequent.context
        sorts = [s for _, s in ctx.vars]
        names = ctx.names
        for combo in itertools.product(*(classes[s] for s in sorts)):
            if budget is not None and not budget.spend():
                return g.stamp() != before, True
            if any(g.find(c) != c for c in combo):
                continue
            env = dict(zip(names, combo))
            if holds_in_graph(g, ax.sequent.premise, env):
                reason = f"{ax.name}@{combo}"
                deferred |= assert_in_graph(g, ax.sequent.conclusion, env, cap, reason)
    return g.stamp() != before, deferred


def saturate(theory: Theory, ctx: Context, constraint: Formula, depth: int,
             goal: Formula | None = None,
             max_work: int = DEFAULT_WORK_BUDGET) -> tuple[TermGraph, bool, int, bool]:
    """Saturate the term graph of a constrained context.

    Returns (graph, saturated, effective cap, goal reached).  The constraint
    is seeded without a budget, so terms occurring in it always materialize.
    When a goal formula is supplied, saturation stops as soon as the generic
    tuple provably satisfies it (sound: derived facts only grow).  The work
    budget bounds total axiom instantiations; exhausting it yields a
    truncated result.
    """
    if depth < 0:
        raise FreeModelError("depth must be >= 0")
    g = TermGraph(theory.signature)
    env = {name: g.add_var(name, sort) for name, sort in ctx.vars}
    assert_in_graph(g, constraint, env, None, "premise")
    cap = max([depth] + list(g.class_depth.values()))
    budget = WorkBudget(max_work)

    def goal_reached() -> bool:
        return goal is not None and holds_in_graph(
            g, goal, {n: g.find(i) for n, i in g.vars.items()})

    if goal_reached():
        return g, False, cap, True
    while True:
        changed, _ = saturation_pass(theory, g, cap, budget)
        if goal_reached():
            return g, False, cap, True
        if not changed or budget.exhausted:
            break
    if budget.exhausted:
        return g, False, cap, False
    probe = g.copy()
    changed, deferred = saturation_pass(theory, probe, cap + 1, budget)
    saturated = not changed and not deferred and not budget.exhausted
    return g, saturated, cap, False


@dataclass
class ModelPresentation:
    """A representing model presented by a context and constraint formula,
    carried by a saturated (or depth-truncated) term graph."""
    theory: Theory
    context: Context
    constraint: Formula
    status: SaturationStatus
    graph: TermGraph

    @cached_property
    def reps(self) -> dict[int, Term]:
        return self.graph.representatives()

    @cached_property
    def rep_ids(self) -> dict[int, str]:
        return {c: print_term(t) for c, t in self.reps.items()}

    @cached_property
    def structure(self) -> PartialStructure:
        g = self.graph
        ids = self.rep_ids
        carriers = {}
        for s, classes in g.classes_by_sort().items():
            named = sorted((ids[c] for c in classes),
                           key=lambda x: (len(x), x))
            carriers[s] = tuple(named)
        funcs: dict[str, dict[tuple[str, ...], str]] = {}
        for (fname, kids), node in g.table.items():
            funcs.setdefault(fname, {})[tuple(ids[g.find(k)] for k in kids)] = \
                ids[g.find(node)]
        rels: dict[str, frozenset] = {}
        for rname, kids in g.facts:
            rels.setdefault(rname, set()).add(tuple(ids[g.find(k)] for k in kids))
        rels = {r: frozenset(v) for r, v in rels.items()}
        return PartialStructure("repn", self.theory.signature, carriers, funcs, rels)

    @property
    def generic_env(self) -> dict[str, int]:
        return {name: self.graph.find(i) for name, i in self.graph.vars.items()}

    @property
    def generic_tuple(self) -> tuple[str, ...]:
        return tuple(self.rep_ids[self.graph.find(self.graph.vars[n])]
                     for n in self.context.names)

    def element_count(self) -> int:
        return sum(len(c) for c in self.structure.carriers.values())

    def term_class(self, term: Term) -> str | None:
        """Representative id of a term over the generator context, or None if
        it is not an element within the recorded depth."""
        c = self.graph.lookup(term, self.generic_env)
        return None if c is None else self.rep_ids[c]

    def terms_equal(self, a: Term, b: Term) -> bool | None:
        ca = self.graph.lookup(a, self.generic_env)
        cb = self.graph.lookup(b, self.generic_env)
        if ca is None or cb is None:
            return None
        return ca == cb

    def entails(self, f: Formula) -> bool:
        """Whether the generic tuple satisfies a formula over the context,
        within the recorded budget."""
        return holds_in_graph(self.graph, f, self.generic_env)


def representing_model(theory: Theory, ctx: Context, constraint: Formula,
                       depth: int,
                       max_work: int = DEFAULT_WORK_BUDGET) -> ModelPresentation:
    """The representing model of a constrained context, built to a depth."""
    diags = well_formed(constraint, theory.signature, ctx)
    if diags:
        raise FreeModelError("ill-formed constraint: " + "; ".join(map(str, diags)))
    g, saturated, _cap, _ = saturate(theory, ctx, constraint, depth,
                                     max_work=max_work)
    p = ModelPresentation(theory, ctx, constraint, SaturationStatus(saturated, depth), g)
    if saturated:
        report = is_model(p.structure, theory)
        if not report.ok:
            raise FreeModelError(
                f"saturated presentation failed model check: {report.violations}")
    return p


# ---------------------------------------------------------------------------
# representability and morphisms of presentations

@dataclass(frozen=True)
class YonedaReport:
    interp_size: int
    hom_size: int
    bijective: bool


def yoneda_check(p: ModelPresentation, m: PartialStructure) -> YonedaReport:
    """Verify that tuples of the constraint's interpretation correspond
    bijectively to homomorphisms out of the presentation."""
    if not p.status.saturated:
        raise FreeModelError("yoneda_check requires a saturated presentation")
    tuples = sorted(interp_formula(m, p.context, p.constraint))
    struct = p.structure
    seen_maps = []
    ok = True
    for tup in tuples:
        maps: dict[str, dict[str, str]] = {s: {} for s in struct.signature.sorts}
        for c, rep in p.reps.items():
            val = interp_term(m, p.context, rep, tup)
            if val is None:
                ok = False
                break
            maps[p.graph.sort[c]][p.rep_ids[c]] = val
        else:
            h = Homomorphism("yoneda", struct, m, maps)
            if not check_hom(h):
                ok = False
            if maps in seen_maps:
                ok = False
            seen_maps.append(maps)
            continue
        break
    homs = enumerate_homs(struct, m)
    bij = ok and len(seen_maps) == len(tuples) == len(homs) and \
        all(h.maps in seen_maps for h in homs)
    return YonedaReport(len(tuples), len(homs), bij)


@dataclass(frozen=True)
class RepnMorphism:
    """Morphism of representing models induced by a term vector over the
    target's context."""
    source: ModelPresentation
    target: ModelPresentation
    terms: tuple[Term, ...]
    hom: Homomorphism


def repn_morphism(source: ModelPresentation, target: ModelPresentation,
                  terms) -> RepnMorphism:
    """The homomorphism sending a class [s] to [s(terms/x)], provided the
    target provably satisfies the instantiated source constraint."""
    terms = tuple(terms)
    if not source.status.saturated or not target.status.saturated:
        raise FreeModelError("repn_morphism requires saturated presentations")
    if len(terms) != len(source.context):
        raise FreeModelError("term vector does not match the source context")
    assignment = dict(zip(source.context.names, terms))
    obligation = subst_formula(source.constraint, assignment)
    if not target.entails(obligation):
        raise FreeModelError(
            "obligation not established: target does not prove the "
            f"instantiated constraint {print_term_vector(terms)}")
    maps: dict[str, dict[str, str]] = {s: {} for s in source.theory.signature.sorts}
    for c, rep in source.reps.items():
        image_term = subst_term(rep, assignment)
        tc = target.graph.lookup(image_term, target.generic_env)
        if tc is None:
            raise FreeModelError(
                f"image of {print_term(rep)} not present in the target")
        maps[source.graph.sort[c]][source.rep_ids[c]] = target.rep_ids[tc]
    h = Homomorphism("repn", source.structure, target.structure, maps)
    if not check_hom(h):
        raise FreeModelError("induced map is not a homomorphism")
    return RepnMorphism(source, target, terms, h)


def print_term_vector(terms) -> str:
    return "(" + ", ".join(print_term(t) for t in terms) + ")"


def repn_coequalizer(f: RepnMorphism, g: RepnMorphism, depth: int) -> ModelPresentation:
    """Coequalizer of a parallel pair of presentation morphisms, presented by
    conjoining the component equations to the target constraint."""
    if f.source is not g.source and f.source.constraint != g.source.constraint:
        raise FreeModelError("not a parallel pair: different sources")
    if f.target is not g.target and f.target.constraint != g.target.constraint:
        raise FreeModelError("not a parallel pair: different targets")
    eqs = [Eq(a, b) for a, b in zip(f.terms, g.terms)]
    formula = conj(list(conjuncts(f.target.constraint)) + eqs)
    return representing_model(f.target.theory, f.target.context, formula, depth)


# ---------------------------------------------------------------------------
# free algebras over a relative theory

@dataclass(frozen=True)
class FreeAlgebraResult:
    presentation: ModelPresentation
    unit: Homomorphism          # base model -> underlying structure of the free algebra
    generators: dict[str, tuple[str, str]]  # variable -> (sort, base element)


def free_algebra(rel_theory, base_model: PartialStructure, depth: int,
                 check_universal_to: int = 0) -> FreeAlgebraResult:
    """Free algebra on a base-theory model, as the representing model of the
    model's diagram: one generator per element, one constraint per table
    entry."""
    from .translation import pht_of
    theory = pht_of(rel_theory)
    sig = base_model.signature
    var_of: dict[tuple[str, str], str] = {}
    ctx_entries = []
    generators = {}
    i = 0
    for s in sig.sorts:
        for a in base_model.carrier(s):
            v = f"g{i}"
            i += 1
            var_of[(s, a)] = v
            ctx_entries.append((v, s))
            generators[v] = (s, a)
    ctx = Context(tuple(ctx_entries))
    atoms: list[Formula] = []
    for fdecl in sig.functions:
        for args, val in sorted(base_model.func_table(fdecl.name).items()):
            term = App(fdecl.name,
                       tuple(Var(var_of[(s, a)]) for s, a in zip(fdecl.arg_sorts, args)))
            atoms.append(Eq(term, Var(var_of[(fdecl.result, val)])))
    for rdecl in sig.relations:
        for args in sorted(base_model.rel_table(rdecl.name)):
            atoms.append(RelApp(rdecl.name,
                                tuple(Var(var_of[(s, a)])
                                      for s, a in zip(rdecl.arg_sorts, args))))
    constraint = conj(atoms)
    p = representing_model(theory, ctx, constraint, depth)

    underlying = forget_to_base(p.structure, sig)
    maps: dict[str, dict[str, str]] = {s: {} for s in sig.sorts}
    for (s, a), v in var_of.items():
        c = p.graph.find(p.graph.vars[v])
        maps[s][a] = p.rep_ids[c]
    unit = Homomorphism("unit", base_model, underlying, maps)
    if not check_hom(unit):
        raise FreeModelError("unit of the free algebra is not a homomorphism")
    return FreeAlgebraResult(p, unit, generators)


def forget_to_base(m: PartialStructure, base_sig: Signature) -> PartialStructure:
    """Drop operator tables, keeping only the base-signature part."""
    funcs = {f.name: dict(m.func_table(f.name)) for f in base_sig.functions}
    rels = {r.name: m.rel_table(r.name) for r in base_sig.relations}
    carriers = {s: m.carrier(s) for s in base_sig.sorts}
    return PartialStructure(m.name, base_sig, carriers, funcs, rels)
