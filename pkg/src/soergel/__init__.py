"""Diagrammatic rewriting for bimodule categories of right-angled Coxeter
systems, with an exact polynomial-matrix oracle and the canonical basis of
maps to the unit object."""

from .coxeter import CoxeterGraph, coefficients, make_graph, parse_graph
from .expr import Expression, LinComb, parse_expr, print_expr, typecheck
from .lightleaves import enumerate_FL, is_member_FL
from .rewrite import Trace, normalize, registry

__all__ = [
    "CoxeterGraph", "coefficients", "make_graph", "parse_graph",
    "Expression", "LinComb", "parse_expr", "print_expr", "typecheck",
    "enumerate_FL", "is_member_FL",
    "Trace", "normalize", "registry",
]
