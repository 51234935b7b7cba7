"""Finite partial structures: interpretation, validity, homomorphisms,
products, finite-stage chain colimits, and bounded model enumeration.

Structures are immutable by convention after construction; every operation
here is pure.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

from .syntax import (
    App, Conj, Context, Eq, FuncDecl, PhlError, Sequent, Signature, Theory,
    TokenStream, Truth, Var, print_theory,
)

UNDEF = None


class SemanticsError(PhlError):
    pass


@dataclass(frozen=True)
class PartialStructure:
    name: str
    signature: Signature
    carriers: dict[str, tuple[str, ...]]
    funcs: dict[str, dict[tuple[str, ...], str]]
    rels: dict[str, frozenset[tuple[str, ...]]]

    def carrier(self, sort: str) -> tuple[str, ...]:
        return self.carriers.get(sort, ())

    def func_table(self, name: str) -> dict[tuple[str, ...], str]:
        return self.funcs.get(name, {})

    def rel_table(self, name: str) -> frozenset[tuple[str, ...]]:
        return self.rels.get(name, frozenset())

    def size(self) -> int:
        return sum(len(c) for c in self.carriers.values())


def make_structure(name: str, sig: Signature, carriers, funcs=None, rels=None,
                   check: bool = True) -> PartialStructure:
    carriers = {s: tuple(carriers.get(s, ())) for s in sig.sorts}
    funcs = {f: dict(t) for f, t in (funcs or {}).items()}
    rels = {r: frozenset(tuple(x) for x in t) for r, t in (rels or {}).items()}
    m = PartialStructure(name, sig, carriers, funcs, rels)
    if check:
        problems = structure_diagnostics(m)
        if problems:
            raise SemanticsError(f"bad structure '{name}': " + "; ".join(problems))
    return m


def structure_diagnostics(m: PartialStructure) -> list[str]:
    out = []
    elems = {s: set(c) for s, c in m.carriers.items()}
    for s, c in m.carriers.items():
        if len(set(c)) != len(c):
            out.append(f"duplicate elements in carrier {s}")
    for fname, table in m.funcs.items():
        decl = m.signature.function(fname)
        if decl is None:
            out.append(f"table for unknown function '{fname}'")
            continue
        for args, val in table.items():
            if len(args) != len(decl.arg_sorts):
                out.append(f"bad arity in table of '{fname}'")
                continue
            for a, s in zip(args, decl.arg_sorts):
                if a not in elems.get(s, ()):
                    out.append(f"'{fname}' entry uses unknown element '{a}'")
            if val not in elems.get(decl.result, ()):
                out.append(f"'{fname}' entry has unknown value '{val}'")
    for rname, table in m.rels.items():
        decl = m.signature.relation(rname)
        if decl is None:
            out.append(f"table for unknown relation '{rname}'")
            continue
        for args in table:
            if len(args) != len(decl.arg_sorts):
                out.append(f"bad arity in table of '{rname}'")
                continue
            for a, s in zip(args, decl.arg_sorts):
                if a not in elems.get(s, ()):
                    out.append(f"'{rname}' entry uses unknown element '{a}'")
    return out


# ---------------------------------------------------------------------------
# interpretation

def interp_term(m: PartialStructure, ctx: Context, term, tup) -> str | None:
    """Kleene-strict evaluation; UNDEF (None) when any stage is undefined."""
    env = dict(zip(ctx.names, tup))
    return _eval_term(m, env, term)


def _eval_term(m: PartialStructure, env: dict[str, str], term) -> str | None:
    if isinstance(term, Var):
        return env[term.name]
    vals = []
    for a in term.args:
        v = _eval_term(m, env, a)
        if v is UNDEF:
            return UNDEF
        vals.append(v)
    return m.func_table(term.func).get(tuple(vals), UNDEF)


def formula_holds_at(m: PartialStructure, ctx: Context, f, tup) -> bool:
    env = dict(zip(ctx.names, tup))
    return _holds_env(m, env, f)


def _holds_env(m: PartialStructure, env: dict[str, str], f) -> bool:
    if isinstance(f, Truth):
        return True
    if isinstance(f, Conj):
        return all(_holds_env(m, env, p) for p in f.parts)
    if isinstance(f, Eq):
        lv = _eval_term(m, env, f.lhs)
        rv = _eval_term(m, env, f.rhs)
        return lv is not UNDEF and rv is not UNDEF and lv == rv
    vals = []
    for a in f.args:
        v = _eval_term(m, env, a)
        if v is UNDEF:
            return False
        vals.append(v)
    return tuple(vals) in m.rel_table(f.rel)


def context_tuples(m: PartialStructure, ctx: Context):
    return itertools.product(*(m.carrier(s) for _, s in ctx.vars))


def interp_formula(m: PartialStructure, ctx: Context, f) -> set[tuple[str, ...]]:
    return {tup for tup in context_tuples(m, ctx) if formula_holds_at(m, ctx, f, tup)}


@dataclass(frozen=True)
class HoldsResult:
    ok: bool
    witness: tuple[str, ...] | None = None

    def __bool__(self):
        return self.ok


def holds(m: PartialStructure, seq: Sequent) -> HoldsResult:
    """Validity of a sequent; on failure carries a premise tuple outside the
    conclusion."""
    for tup in context_tuples(m, seq.context):
        if formula_holds_at(m, seq.context, seq.premise, tup) and \
                not formula_holds_at(m, seq.context, seq.conclusion, tup):
            return HoldsResult(False, tup)
    return HoldsResult(True)


@dataclass(frozen=True)
class ModelReport:
    ok: bool
    violations: tuple[tuple[str, tuple[str, ...]], ...] = ()

    def __bool__(self):
        return self.ok


def is_model(m: PartialStructure, theory: Theory) -> ModelReport:
    bad = []
    for ax in theory.axioms:
        r = holds(m, ax.sequent)
        if not r.ok:
            bad.append((ax.name, r.witness))
    return ModelReport(not bad, tuple(bad))


# ---------------------------------------------------------------------------
# homomorphisms

@dataclass(frozen=True)
class Homomorphism:
    name: str
    source: PartialStructure
    target: PartialStructure
    maps: dict[str, dict[str, str]]

    def apply(self, sort: str, elem: str) -> str:
        return self.maps[sort][elem]

    def apply_tuple(self, sorts, tup):
        return tuple(self.maps[s][a] for s, a in zip(sorts, tup))


def check_hom(h: Homomorphism) -> bool:
    m, n = h.source, h.target
    if m.signature != n.signature:
        return False
    for s in m.signature.sorts:
        table = h.maps.get(s, {})
        if set(table) != set(m.carrier(s)):
            return False
        if not set(table.values()) <= set(n.carrier(s)):
            return False
    for f in m.signature.functions:
        for args, val in m.func_table(f.name).items():
            im = h.apply_tuple(f.arg_sorts, args)
            want = n.func_table(f.name).get(im, UNDEF)
            if want is UNDEF or want != h.apply(f.result, val):
                return False
    for r in m.signature.relations:
        for args in m.rel_table(r.name):
            if h.apply_tuple(r.arg_sorts, args) not in n.rel_table(r.name):
                return False
    return True


def identity_hom(m: PartialStructure) -> Homomorphism:
    return Homomorphism("id", m, m, {s: {a: a for a in m.carrier(s)}
                                     for s in m.signature.sorts})


def compose_homs(g: Homomorphism, f: Homomorphism) -> Homomorphism:
    if f.target is not g.source and f.target != g.source:
        raise SemanticsError("homomorphisms not composable")
    maps = {s: {a: g.maps[s][f.maps[s][a]] for a in f.source.carrier(s)}
            for s in f.source.signature.sorts}
    return Homomorphism(f"{g.name}.{f.name}", f.source, g.target, maps)


def homs_equal(f: Homomorphism, g: Homomorphism) -> bool:
    return f.source == g.source and f.target == g.target and f.maps == g.maps


def iter_homs(m: PartialStructure, n: PartialStructure,
              restrict: dict[str, dict[str, set[str]]] | None = None):
    """Homomorphisms m -> n by backtracking over element assignments with
    incremental preservation checks.  `restrict` optionally limits the
    permitted values of individual elements."""
    if m.signature != n.signature:
        return
    todo = [(s, a) for s in m.signature.sorts for a in m.carrier(s)]
    for s, _ in todo:
        if not n.carrier(s):
            return
    maps: dict[str, dict[str, str]] = {s: {} for s in m.signature.sorts}

    fun_constraints = []
    for f in m.signature.functions:
        for args, val in m.func_table(f.name).items():
            fun_constraints.append((f.name, f.arg_sorts, args, f.result, val))
    rel_constraints = []
    for r in m.signature.relations:
        for args in m.rel_table(r.name):
            rel_constraints.append((r.name, r.arg_sorts, args))

    def consistent() -> bool:
        for fname, arg_sorts, args, res_sort, val in fun_constraints:
            if all(a in maps[s] for a, s in zip(args, arg_sorts)):
                im = tuple(maps[s][a] for a, s in zip(args, arg_sorts))
                want = n.func_table(fname).get(im)
                if want is None:
                    return False
                if val in maps[res_sort] and maps[res_sort][val] != want:
                    return False
        for rname, arg_sorts, args in rel_constraints:
            if all(a in maps[s] for a, s in zip(args, arg_sorts)):
                im = tuple(maps[s][a] for a, s in zip(args, arg_sorts))
                if im not in n.rel_table(rname):
                    return False
        return True

    count = 0

    def rec(i: int):
        nonlocal count
        if i == len(todo):
            count += 1
            yield Homomorphism(f"h{count - 1}", m, n,
                               {s: dict(t) for s, t in maps.items()})
            return
        s, a = todo[i]
        allowed = n.carrier(s)
        if restrict is not None:
            r = restrict.get(s, {}).get(a)
            if r is not None:
                allowed = [b for b in allowed if b in r]
        for b in allowed:
            maps[s][a] = b
            if consistent():
                yield from rec(i + 1)
            del maps[s][a]

    yield from rec(0)


def enumerate_homs(m: PartialStructure, n: PartialStructure) -> list[Homomorphism]:
    """All homomorphisms m -> n (exhaustive)."""
    return list(iter_homs(m, n))


def exists_hom(m: PartialStructure, n: PartialStructure,
               restrict=None) -> Homomorphism | None:
    return next(iter_homs(m, n, restrict), None)


def hom_image(h: Homomorphism) -> dict[str, set[str]]:
    return {s: set(h.maps[s].values()) for s in h.source.signature.sorts}


# ---------------------------------------------------------------------------
# products and colimits

PRODUCT_CAP = 100_000


def _pack(tup) -> str:
    return "(" + ",".join(tup) + ")"


def product(sig: Signature, factors, cap: int = PRODUCT_CAP,
            name: str | None = None) -> PartialStructure:
    """Product structure; the empty product is the terminal structure."""
    factors = list(factors)
    total = 1
    for s in sig.sorts:
        n = 1
        for m in factors:
            n *= len(m.carrier(s))
        total += n
        if total > cap:
            raise SemanticsError(f"product carrier would exceed cap {cap}")
    carriers = {}
    elem_tuples = {}
    for s in sig.sorts:
        tuples = list(itertools.product(*(m.carrier(s) for m in factors)))
        elem_tuples[s] = tuples
        carriers[s] = tuple(_pack(t) for t in tuples)
    funcs: dict[str, dict[tuple[str, ...], str]] = {}
    for f in sig.functions:
        table: dict[tuple[str, ...], str] = {}
        arg_spaces = [elem_tuples[s] for s in f.arg_sorts]
        for args in itertools.product(*arg_spaces):
            vals = []
            for i, m in enumerate(factors):
                component = tuple(a[i] for a in args)
                v = m.func_table(f.name).get(component, UNDEF)
                if v is UNDEF:
                    break
                vals.append(v)
            else:
                # empty product: the loop over factors is vacuous, which makes
                # the terminal's tables total
                table[tuple(_pack(a) for a in args)] = _pack(tuple(vals))
        funcs[f.name] = table
    rels: dict[str, frozenset] = {}
    for r in sig.relations:
        rows = set()
        arg_spaces = [elem_tuples[s] for s in r.arg_sorts]
        for args in itertools.product(*arg_spaces):
            if all(tuple(a[i] for a in args) in factors[i].rel_table(r.name)
                   for i in range(len(factors))):
                rows.add(tuple(_pack(a) for a in args))
        rels[r.name] = frozenset(rows)
    pname = name or ("1" if not factors else "x".join(m.name for m in factors))
    return PartialStructure(pname, sig, carriers, funcs, rels)


def terminal(sig: Signature) -> PartialStructure:
    return product(sig, [], name="1")


@dataclass(frozen=True)
class ChainDiagram:
    """Functor from a finite directed poset: stages keyed by id, and a
    connecting homomorphism for every strict pair i < j."""
    order: tuple[tuple[str, str], ...]        # reflexive-transitive pairs (i, j)
    stages: dict[str, PartialStructure]
    arrows: dict[tuple[str, str], Homomorphism]

    def leq(self, i: str, j: str) -> bool:
        return (i, j) in self.order


def _diagram_diagnostics(d: ChainDiagram) -> list[str]:
    out = []
    ids = sorted(d.stages)
    if not ids:
        out.append("empty diagram")
        return out
    for i in ids:
        if not d.leq(i, i):
            out.append(f"order not reflexive at {i}")
    for i, j in d.order:
        if i != j and d.leq(j, i):
            out.append(f"order not antisymmetric on {i},{j}")
        if i != j and (i, j) not in d.arrows:
            out.append(f"missing arrow {i} -> {j}")
    for i, j in itertools.product(ids, repeat=2):
        if not any(d.leq(i, k) and d.leq(j, k) for k in ids):
            out.append(f"poset not directed at {i},{j}")
            break
    for (i, j), h in d.arrows.items():
        if not check_hom(h):
            out.append(f"arrow {i} -> {j} is not a homomorphism")
        if h.source != d.stages[i] or h.target != d.stages[j]:
            out.append(f"arrow {i} -> {j} has wrong endpoints")
    for i, j in d.order:
        for k in ids:
            if i != j and j != k and d.leq(j, k):
                left = compose_homs(d.arrows[(j, k)], d.arrows[(i, j)])
                if left.maps != d.arrows[(i, k)].maps:
                    out.append(f"non-functorial composite {i} -> {j} -> {k}")
    return out


@dataclass(frozen=True)
class ColimitResult:
    structure: PartialStructure
    coprojections: dict[str, Homomorphism]


def chain_colimit(theory: Theory, diagram: ChainDiagram) -> ColimitResult:
    """Colimit of a finite directed diagram of partial structures.

    Carriers are classes of the disjoint union under the cospan relation;
    since the poset is finite and directed it has a top stage, and every
    cospan can be taken there.
    """
    problems = _diagram_diagnostics(diagram)
    if problems:
        raise SemanticsError("bad diagram: " + "; ".join(problems))
    sig = theory.signature
    ids = sorted(diagram.stages)
    top = next(i for i in ids if all(diagram.leq(j, i) for j in ids))

    def to_top(i: str, sort: str, elem: str) -> str:
        if i == top:
            return elem
        return diagram.arrows[(i, top)].maps[sort][elem]

    # classes keyed by image in the top stage
    class_id: dict[str, dict[str, str]] = {}
    carriers = {}
    for s in sig.sorts:
        names = {}
        for a in diagram.stages[top].carrier(s):
            names[a] = f"[{top};{a}]"
        class_id[s] = names
        carriers[s] = tuple(names[a] for a in diagram.stages[top].carrier(s))

    def cls(i: str, sort: str, elem: str) -> str:
        return class_id[sort][to_top(i, sort, elem)]

    tops = diagram.stages[top]
    funcs = {}
    for f in sig.functions:
        table = {}
        for args, val in tops.func_table(f.name).items():
            key = tuple(class_id[s][a] for s, a in zip(f.arg_sorts, args))
            table[key] = class_id[f.result][val]
        funcs[f.name] = table
    rels = {}
    for r in sig.relations:
        rows = set()
        for args in tops.rel_table(r.name):
            rows.add(tuple(class_id[s][a] for s, a in zip(r.arg_sorts, args)))
        rels[r.name] = frozenset(rows)
    colim = PartialStructure("colim", sig, carriers, funcs, rels)

    copr = {}
    for i in ids:
        maps = {s: {a: cls(i, s, a) for a in diagram.stages[i].carrier(s)}
                for s in sig.sorts}
        copr[i] = Homomorphism(f"copr_{i}", diagram.stages[i], colim, maps)
        if not check_hom(copr[i]):
            raise SemanticsError(f"coprojection from {i} failed to commute")
    if all(is_model(diagram.stages[i], theory).ok for i in ids):
        if not is_model(colim, theory).ok:
            raise SemanticsError("colimit of models failed to be a model")
    return ColimitResult(colim, copr)


# ---------------------------------------------------------------------------
# bounded enumeration of structures and models

_HOLE = "?"
_U3 = object()   # definitely undefined
_UNK = object()  # depends on an unassigned cell


def _totalish_functions(theory: Theory) -> set[str]:
    """Function symbols asserted total by an axiom with a trivial premise."""
    out = set()
    for ax in theory.axioms:
        if not isinstance(ax.sequent.premise, Truth):
            continue
        for a in _flat_atoms(ax.sequent.conclusion):
            if isinstance(a, Eq) and a.lhs == a.rhs and isinstance(a.lhs, App):
                if all(isinstance(x, Var) for x in a.lhs.args):
                    out.add(a.lhs.func)
    return out


def _flat_atoms(f):
    if isinstance(f, Conj):
        for p in f.parts:
            yield from _flat_atoms(p)
    elif not isinstance(f, Truth):
        yield f


def enumerate_structures(theory: Theory, sizes: dict[str, int]):
    """Yield every partial structure on fixed carriers that models the theory.

    Backtracking over table cells with three-valued pruning: a branch dies as
    soon as some axiom instance is definitely violated.  Each pending axiom
    instance watches the unassigned cells its last evaluation touched and is
    only rechecked when one of them changes.
    """
    sig = theory.signature
    carriers = {s: tuple(f"{_sort_tag(s)}{i}" for i in range(sizes.get(s, 0)))
                for s in sig.sorts}

    totalish = _totalish_functions(theory)

    def func_rank(d: FuncDecl):
        if not d.arg_sorts:
            return (0, 0, d.name)
        if d.name in totalish:
            return (1, len(d.arg_sorts), d.name)
        return (2, len(d.arg_sorts), d.name)

    cells: list[tuple[str, str, tuple[str, ...]]] = []
    for f in sorted(sig.functions, key=func_rank):
        for args in itertools.product(*(carriers[s] for s in f.arg_sorts)):
            cells.append(("fun", f.name, args))
    for r in sorted(sig.relations, key=lambda d: (len(d.arg_sorts), d.name)):
        for args in itertools.product(*(carriers[s] for s in r.arg_sorts)):
            cells.append(("rel", r.name, args))

    funcs = {f.name: {args: _HOLE for kind, name, args in cells
                      if kind == "fun" and name == f.name}
             for f in sig.functions}
    rels = {r.name: {args: _HOLE for kind, name, args in cells
                     if kind == "rel" and name == r.name}
            for r in sig.relations}

    def eval_term(env, term, touched):
        if isinstance(term, Var):
            return env[term.name]
        vals = []
        for a in term.args:
            v = eval_term(env, a, touched)
            if v is _U3 or v is _UNK:
                return v
            vals.append(v)
        key = tuple(vals)
        cell = funcs[term.func].get(key, _HOLE)
        if cell == _HOLE:
            touched.append(("fun", term.func, key))
            return _UNK
        if cell is UNDEF:
            return _U3
        return cell

    def eval_formula(env, f, touched):
        if isinstance(f, Truth):
            return True
        if isinstance(f, Conj):
            result = True
            for p in f.parts:
                r = eval_formula(env, p, touched)
                if r is False:
                    return False
                if r is None:
                    result = None
            return result
        if isinstance(f, Eq):
            l = eval_term(env, f.lhs, touched)
            r = eval_term(env, f.rhs, touched)
            if l is _U3 or r is _U3:
                return False
            if l is _UNK or r is _UNK:
                return None
            return l == r
        vals = []
        for a in f.args:
            v = eval_term(env, a, touched)
            if v is _U3:
                return False
            if v is _UNK:
                return None
            vals.append(v)
        key = tuple(vals)
        cell = rels[f.rel].get(key, _HOLE)
        if cell == _HOLE:
            touched.append(("rel", f.rel, key))
            return None
        return cell

    instances = []
    for ax in theory.axioms:
        for tup in itertools.product(*(carriers[s] for _, s in ax.sequent.context.vars)):
            env = dict(zip(ax.sequent.context.names, tup))
            instances.append((ax.sequent, env))
    watch: list[frozenset] = [frozenset()] * len(instances)

    def status(k):
        seq, env = instances[k]
        touched: list = []
        p = eval_formula(env, seq.premise, touched)
        if p is False:
            return True
        c = eval_formula(env, seq.conclusion, touched)
        if p is True and c is False:
            return False
        if p is True and c is True:
            return True
        watch[k] = frozenset(touched)
        return None

    def freeze(count):
        fs = {f: {a: v for a, v in t.items() if v is not UNDEF}
              for f, t in funcs.items()}
        rs = {r: frozenset(a for a, v in t.items() if v is True)
              for r, t in rels.items()}
        return PartialStructure(f"M{count}", sig, dict(carriers), fs, rs)

    count = 0

    def rec(i, unknown):
        nonlocal count
        if i == len(cells):
            if all(status(k) for k in unknown):
                count += 1
                yield freeze(count)
            return
        kind, name, args = cells[i]
        cell_key = (kind, name, args)
        table = funcs[name] if kind == "fun" else rels[name]
        options = (list(carriers[sig.function(name).result]) + [UNDEF]
                   if kind == "fun" else [False, True])
        for value in options:
            table[args] = value
            still = []
            trail = []
            ok = True
            for k in unknown:
                if cell_key not in watch[k]:
                    still.append(k)
                    continue
                trail.append((k, watch[k]))
                st = status(k)
                if st is False:
                    ok = False
                    break
                if st is None:
                    still.append(k)
            if ok:
                yield from rec(i + 1, still)
            for k, old in trail:
                watch[k] = old
        table[args] = _HOLE

    initial = []
    ok0 = True
    for k in range(len(instances)):
        st = status(k)
        if st is False:
            ok0 = False
            break
        if st is None:
            initial.append(k)
    if ok0:
        yield from rec(0, initial)


def _sort_tag(sort: str) -> str:
    return "u" if sort == "*" else sort


def size_profiles(sorts, max_size: int):
    """All carrier-size assignments with every sort at most max_size."""
    for combo in itertools.product(range(max_size + 1), repeat=len(sorts)):
        yield dict(zip(sorts, combo))


@lru_cache(maxsize=64)
def _models_cached(theory_src: str, max_size: int) -> tuple:
    from dataclasses import replace
    from .syntax import parse_theory
    theory = parse_theory(theory_src)
    out = []
    for sizes in size_profiles(theory.signature.sorts, max_size):
        for m in enumerate_structures(theory, sizes):
            out.append(replace(m, name=f"M{len(out)}"))
    return tuple(out)


def enumerate_models(theory: Theory, max_size: int) -> tuple:
    """All models with every carrier of size <= max_size (cached per theory)."""
    return _models_cached(print_theory(theory), max_size)


# ---------------------------------------------------------------------------
# model and hom text formats

def print_model(m: PartialStructure, theory_name: str = "?") -> str:
    lines = [f"model {m.name} of {theory_name}"]
    for s in m.signature.sorts:
        lines.append(f"carrier {s}: " + " ".join(m.carrier(s)) + ";")
    for f in m.signature.functions:
        for args in sorted(m.func_table(f.name)):
            val = m.funcs[f.name][args]
            lines.append(f"fun {f.name}: ({','.join(args)}) -> {val};")
    for r in m.signature.relations:
        rows = sorted(m.rel_table(r.name))
        if rows:
            lines.append(f"rel {r.name}: " + " ".join(f"({','.join(t)})" for t in rows) + ";")
    return "\n".join(lines) + "\n"


def _elem(ts: TokenStream) -> str:
    if ts.at("number"):
        return ts.next().text
    return ts.expect("ident").text


def _parse_elem_tuple(ts: TokenStream) -> tuple[str, ...]:
    ts.expect("punct", "(")
    elems = []
    while not ts.at("punct", ")"):
        elems.append(_elem(ts))
        if ts.at("punct", ","):
            ts.next()
    ts.expect("punct", ")")
    return tuple(elems)


def parse_model(text: str, sig: Signature) -> tuple[PartialStructure, str]:
    """Parse the model text format; returns the structure and the theory name
    it claims to model."""
    ts = TokenStream(text)
    ts.expect_word("model")
    name = ts.expect("ident").text
    ts.expect_word("of")
    theory_name = ts.expect("ident").text
    carriers: dict[str, tuple[str, ...]] = {}
    funcs: dict[str, dict] = {}
    rels: dict[str, set] = {}
    while not ts.at("eof"):
        if ts.at_word("carrier"):
            ts.next()
            sort = ts.expect("ident").text if not ts.at("star") else ts.next().text
            ts.expect("punct", ":")
            elems = []
            while not ts.at("punct", ";"):
                elems.append(_elem(ts))
            ts.expect("punct", ";")
            carriers[sort] = tuple(elems)
        elif ts.at_word("fun"):
            ts.next()
            fname = ts.expect("ident").text
            ts.expect("punct", ":")
            args = _parse_elem_tuple(ts)
            ts.expect("arrow")
            val = _elem(ts)
            ts.expect("punct", ";")
            funcs.setdefault(fname, {})[args] = val
        elif ts.at_word("rel"):
            ts.next()
            rname = ts.expect("ident").text
            ts.expect("punct", ":")
            rows = rels.setdefault(rname, set())
            while not ts.at("punct", ";"):
                rows.add(_parse_elem_tuple(ts))
            ts.expect("punct", ";")
        else:
            ts.error(f"unexpected {ts.peek().text!r} in model body")
    unknown = set(carriers) - set(sig.sorts)
    if unknown:
        raise SemanticsError(f"carriers for unknown sorts {sorted(unknown)}")
    m = make_structure(name, sig, carriers, funcs, rels)
    return m, theory_name


def print_hom(h: Homomorphism) -> str:
    lines = [f"hom {h.name} : {h.source.name} -> {h.target.name}"]
    for s in h.source.signature.sorts:
        entries = " ".join(f"{a}->{b}" for a, b in sorted(h.maps.get(s, {}).items()))
        lines.append(f"map {s}: {entries};")
    return "\n".join(lines) + "\n"


def parse_hom(text: str, models: dict[str, PartialStructure]) -> Homomorphism:
    ts = TokenStream(text)
    ts.expect_word("hom")
    name = ts.expect("ident").text
    ts.expect("punct", ":")
    src_name = ts.expect("ident").text
    ts.expect("arrow")
    tgt_name = ts.expect("ident").text
    for n in (src_name, tgt_name):
        if n not in models:
            ts.error(f"unknown model '{n}'")
    src, tgt = models[src_name], models[tgt_name]
    maps: dict[str, dict[str, str]] = {}
    while not ts.at("eof"):
        ts.expect_word("map")
        sort = ts.expect("ident").text if not ts.at("star") else ts.next().text
        ts.expect("punct", ":")
        table = maps.setdefault(sort, {})
        while not ts.at("punct", ";"):
            a = _elem(ts)
            ts.expect("arrow")
            b = _elem(ts)
            table[a] = b
        ts.expect("punct", ";")
    return Homomorphism(name, src, tgt, maps)
