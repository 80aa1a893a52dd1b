"""Right-angled Coxeter systems and the crossing coefficients.

A right-angled system is a finite generator set S with m(s,r) in {2, inf}
for distinct s, r (m(s,s) = 1).  The graph records only the infinite bonds;
every unlisted pair commutes.

The representation data consumed by the rewrite rules is the pair of scalar
families (mu, lambda) defined by decomposing, in the span of the hyperplane
forms,

    P_t(x_s) = sum_r lambda[t,s][r] * x_r      (t-invariant part)
    I_t(x_s) = mu[t,s] * x_t                   (t-anti-invariant part)

Under the geometric representation fixed here (B(a_s,a_s)=1, B=0 for m=2,
B=-1 for m=inf) these come out as

    t = s:        mu = 1,  lambda = {}
    m(t,s) = 2:   mu = 0,  lambda = {s: 1}
    m(t,s) = inf: mu = -1, lambda = {s: 1, t: 1}

and both identities are asserted exactly at construction time, so any
mismatch between the action, the hyperplane forms and these scalars fails
loudly.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from . import polyring

INF = 0  # marker for m(s,r) = infinity; compare with .m() results via is_infinite


class GraphError(ValueError):
    pass


@dataclass(frozen=True)
class CoxeterGraph:
    generators: tuple
    infinite_pairs: frozenset  # of frozenset({s, r})

    def __post_init__(self):
        if len(set(self.generators)) != len(self.generators):
            raise GraphError("duplicate generator")
        gens = set(self.generators)
        for pair in self.infinite_pairs:
            if len(pair) != 2:
                raise GraphError("self-pair in infinite bonds")
            if not pair <= gens:
                raise GraphError(f"unknown name in pair {set(pair)}")

    def index(self, s: str) -> int:
        try:
            return self.generators.index(s)
        except ValueError:
            raise KeyError(f"unknown generator {s!r}") from None

    def check_gen(self, s: str):
        if s not in self.generators:
            raise KeyError(f"unknown generator {s!r}")

    def m(self, s: str, r: str):
        """Coxeter exponent: 1, 2 or INF."""
        self.check_gen(s)
        self.check_gen(r)
        if s == r:
            return 1
        if frozenset((s, r)) in self.infinite_pairs:
            return INF
        return 2

    def commutes(self, s: str, r: str) -> bool:
        return self.m(s, r) == 2

    def infinite(self, s: str, r: str) -> bool:
        return self.m(s, r) == INF

    def inf_neighbors(self, s: str) -> tuple:
        self.check_gen(s)
        return tuple(t for t in self.generators
                     if t != s and frozenset((s, t)) in self.infinite_pairs)


def make_graph(generators, infinite_pairs=()) -> CoxeterGraph:
    return CoxeterGraph(
        tuple(generators),
        frozenset(frozenset(p) for p in infinite_pairs),
    )


def parse_graph(text: str) -> CoxeterGraph:
    """Parse the line-based graph format.

    One `gens: a b c` line, then zero or more `inf: a b` lines; `#` starts
    a comment.
    """
    gens = None
    pairs = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("gens:"):
            if gens is not None:
                raise GraphError(f"line {lineno}: repeated gens line")
            gens = tuple(line[len("gens:"):].split())
            if not gens:
                raise GraphError(f"line {lineno}: empty generator list")
        elif line.startswith("inf:"):
            if gens is None:
                raise GraphError(f"line {lineno}: inf before gens")
            names = line[len("inf:"):].split()
            if len(names) != 2:
                raise GraphError(f"line {lineno}: inf needs two names")
            a, b = names
            if a == b:
                raise GraphError(f"line {lineno}: self-pair {a}")
            for n in names:
                if n not in gens:
                    raise GraphError(f"line {lineno}: unknown name {n!r}")
            pairs.append((a, b))
        else:
            raise GraphError(f"line {lineno}: unrecognized line {line!r}")
    if gens is None:
        raise GraphError("missing gens line")
    return make_graph(gens, pairs)


def print_graph(graph: CoxeterGraph) -> str:
    lines = ["gens: " + " ".join(graph.generators)]
    seen = set()
    for s in graph.generators:
        for t in graph.inf_neighbors(s):
            pair = frozenset((s, t))
            if pair not in seen:
                seen.add(pair)
                lines.append(f"inf: {s} {t}")
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class RepCoefficients:
    """The scalars mu[t,s] and lambda[t,s][r] of the crossing relations."""

    graph: CoxeterGraph
    mu: dict
    lam: dict

    def mu_of(self, t: str, s: str) -> Fraction:
        return self.mu[(t, s)]

    def lam_of(self, t: str, s: str) -> dict:
        return self.lam[(t, s)]


@lru_cache(maxsize=None)
def coefficients(graph: CoxeterGraph) -> RepCoefficients:
    """Compute and verify the (mu, lambda) families for a graph."""
    mu = {}
    lam = {}
    for t in graph.generators:
        for s in graph.generators:
            if t == s:
                mu[(t, s)] = Fraction(1)
                lam[(t, s)] = {}
            elif graph.commutes(t, s):
                mu[(t, s)] = Fraction(0)
                lam[(t, s)] = {s: Fraction(1)}
            else:
                mu[(t, s)] = Fraction(-1)
                lam[(t, s)] = {s: Fraction(1), t: Fraction(1)}
    out = RepCoefficients(graph, mu, lam)
    _verify(out)
    return out


def _verify(coeffs: RepCoefficients):
    """Assert P_t(x_s) = sum lambda*x_r and I_t(x_s) = mu*x_t exactly."""
    graph = coeffs.graph
    for t in graph.generators:
        for s in graph.generators:
            xs = polyring.x_form(graph, s)
            p_part = polyring.p_op(graph, t, xs)
            i_part = polyring.i_op(graph, t, xs)
            lam_sum = polyring.const(graph, 0)
            for r, c in coeffs.lam_of(t, s).items():
                lam_sum = lam_sum + polyring.x_form(graph, r).scale(c)
            if p_part != lam_sum:
                raise ArithmeticError(
                    f"lambda identity fails for (t,s)=({t},{s})")
            if i_part != polyring.x_form(graph, t).scale(coeffs.mu_of(t, s)):
                raise ArithmeticError(
                    f"mu identity fails for (t,s)=({t},{s})")
