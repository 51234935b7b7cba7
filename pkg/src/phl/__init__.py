"""Toolkit for finitary partial Horn logic over many-sorted signatures."""

from .syntax import (  # noqa: F401
    App, Conj, Context, Eq, FuncDecl, NamedAxiom, ParseError, PhlError, RelApp,
    RelDecl, Sequent, Signature, Theory, TRUE, Truth, Var, WellFormedError,
    conj, defined, parse_sequent, parse_theory, print_sequent, print_theory,
    substitute, well_formed,
)
