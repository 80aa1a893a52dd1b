"""Exact multivariate polynomial arithmetic over the rationals.

Polynomials live in Q[y_s : s in S], one coordinate y_s per generator of a
right-angled Coxeter graph, in declaration order.  A polynomial is a sparse
map from exponent tuples to Fraction coefficients; zero coefficients are
never stored, so equality is plain dict equality.

The graph-aware operations implement the reflection action of W on this
ring and the averaging / divided-difference operators built from it:

  act(g, p)      the ring automorphism induced by the generator g,
                 determined by g.y_g = -y_g + 2*sum(y_t : m(g,t) = inf)
                 and g.y_r = y_r for r != g
  p_op(s, p)     (p + s.p)/2, the s-invariant part
  i_op(s, p)     (p - s.p)/2, the s-anti-invariant part
  demazure(s, p) (p - s.p)/(2*x_s), exact division (note the factor 2)

x_form(s) = y_s - sum(y_t : m(s,t) = inf) is the linear form cutting out
the reflection hyperplane of s; i_op(s, p) is always divisible by it.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from .coxeter import CoxeterGraph

Rat = Fraction
Mono = tuple  # exponent tuple, one entry per generator

_ZERO = Fraction(0)
_HALF = Fraction(1, 2)


class Poly:
    """Sparse exact polynomial; immutable by convention."""

    __slots__ = ("nvars", "coeffs", "_hash")

    def __init__(self, nvars: int, coeffs: dict | None = None):
        self.nvars = nvars
        self.coeffs = {m: c for m, c in (coeffs or {}).items() if c != 0}
        self._hash = None

    @staticmethod
    def zero(nvars: int) -> "Poly":
        return Poly(nvars)

    @staticmethod
    def const(nvars: int, value) -> "Poly":
        c = Fraction(value)
        if c == 0:
            return Poly(nvars)
        return Poly(nvars, {(0,) * nvars: c})

    @staticmethod
    def variable(nvars: int, idx: int) -> "Poly":
        mono = [0] * nvars
        mono[idx] = 1
        return Poly(nvars, {tuple(mono): Fraction(1)})

    def is_zero(self) -> bool:
        return not self.coeffs

    def is_constant(self) -> bool:
        return all(sum(m) == 0 for m in self.coeffs)

    def constant_value(self) -> Fraction:
        if not self.is_constant():
            raise ValueError("polynomial is not constant")
        return self.coeffs.get((0,) * self.nvars, _ZERO)

    def __bool__(self) -> bool:
        return bool(self.coeffs)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Poly)
            and self.nvars == other.nvars
            and self.coeffs == other.coeffs
        )

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.nvars, frozenset(self.coeffs.items())))
        return self._hash

    def __add__(self, other: "Poly") -> "Poly":
        if not other.coeffs:
            return self
        if not self.coeffs:
            return other
        out = dict(self.coeffs)
        for m, c in other.coeffs.items():
            out[m] = out.get(m, _ZERO) + c
        return Poly(self.nvars, out)

    def __sub__(self, other: "Poly") -> "Poly":
        out = dict(self.coeffs)
        for m, c in other.coeffs.items():
            out[m] = out.get(m, _ZERO) - c
        return Poly(self.nvars, out)

    def __neg__(self) -> "Poly":
        return Poly(self.nvars, {m: -c for m, c in self.coeffs.items()})

    def __mul__(self, other: "Poly") -> "Poly":
        if not self.coeffs or not other.coeffs:
            return Poly(self.nvars)
        out: dict = {}
        for ma, ca in self.coeffs.items():
            for mb, cb in other.coeffs.items():
                m = tuple(x + y for x, y in zip(ma, mb))
                out[m] = out.get(m, _ZERO) + ca * cb
        return Poly(self.nvars, out)

    def scale(self, c) -> "Poly":
        c = Fraction(c)
        if c == 0:
            return Poly(self.nvars)
        return Poly(self.nvars, {m: k * c for m, k in self.coeffs.items()})

    def __repr__(self):
        return f"Poly({self.coeffs!r})"


def y_var(graph: "CoxeterGraph", s: str) -> Poly:
    """The coordinate y_s."""
    return Poly.variable(len(graph.generators), graph.index(s))


def one(graph: "CoxeterGraph") -> Poly:
    return Poly.const(len(graph.generators), 1)


def const(graph: "CoxeterGraph", value) -> Poly:
    return Poly.const(len(graph.generators), value)


@lru_cache(maxsize=None)
def x_form(graph: "CoxeterGraph", s: str) -> Poly:
    """Equation of the reflection hyperplane of s: y_s - sum of inf-neighbours."""
    p = y_var(graph, s)
    for t in graph.inf_neighbors(s):
        p = p - y_var(graph, t)
    return p


@lru_cache(maxsize=None)
def _act_images(graph: "CoxeterGraph", g: str) -> tuple:
    """Image of each coordinate under the generator g, as a tuple of Poly."""
    if g not in graph.generators:
        raise KeyError(f"unknown generator {g!r}")
    images = []
    for t in graph.generators:
        if t != g:
            images.append(y_var(graph, t))
        else:
            img = y_var(graph, g).scale(-1)
            for u in graph.inf_neighbors(g):
                img = img + y_var(graph, u).scale(2)
            images.append(img)
    return tuple(images)


@lru_cache(maxsize=1 << 16)
def _act_mono(graph: "CoxeterGraph", g: str, mono: Mono) -> Poly:
    images = _act_images(graph, g)
    out = one(graph)
    for i, e in enumerate(mono):
        for _ in range(e):
            out = out * images[i]
    return out


def act(graph: "CoxeterGraph", g: str, p: Poly) -> Poly:
    """Apply the generator g to p as a ring automorphism."""
    out = Poly.zero(p.nvars)
    for mono, c in p.coeffs.items():
        out = out + _act_mono(graph, g, mono).scale(c)
    return out


def p_op(graph: "CoxeterGraph", s: str, p: Poly) -> Poly:
    """(p + s.p)/2: the s-invariant component of p."""
    return (p + act(graph, s, p)).scale(_HALF)


def i_op(graph: "CoxeterGraph", s: str, p: Poly) -> Poly:
    """(p - s.p)/2: the s-anti-invariant component of p."""
    return (p - act(graph, s, p)).scale(_HALF)


def demazure(graph: "CoxeterGraph", s: str, p: Poly) -> Poly:
    """(p - s.p)/(2 x_s); the division is always exact."""
    return _divide_exact(i_op(graph, s, p), x_form(graph, s), graph.index(s))


def _divide_exact(p: Poly, d: Poly, pivot: int) -> Poly:
    """Divide p by d, where d = y_pivot - (terms without y_pivot).

    Long division in the pivot variable; a nonzero remainder signals a
    representation-setup bug and raises.
    """
    quot = Poly.zero(p.nvars)
    rem = p
    while True:
        cand = [(m, c) for m, c in rem.coeffs.items() if m[pivot] >= 1]
        if not cand:
            break
        mono, c = max(cand)
        qm = list(mono)
        qm[pivot] -= 1
        qterm = Poly(p.nvars, {tuple(qm): c})
        quot = quot + qterm
        rem = rem - qterm * d
    if not rem.is_zero():
        raise ArithmeticError("inexact division by hyperplane form")
    return quot


def specialize(graph: "CoxeterGraph", p: Poly, point: dict) -> Fraction:
    """Evaluate p at a rational point given as {generator name: value}."""
    for s in graph.generators:
        if s not in point:
            raise KeyError(f"missing variable y_{s} in specialization point")
    vals = [Fraction(point[s]) for s in graph.generators]
    total = _ZERO
    for mono, c in p.coeffs.items():
        term = c
        for v, e in zip(vals, mono):
            if e:
                term *= v ** e
        total += term
    return total


def _mono_key(mono: Mono):
    # graded lexicographic: total degree, then exponent vector descending
    return (sum(mono), tuple(-e for e in mono))


def poly_str(graph: "CoxeterGraph", p: Poly) -> str:
    """Canonical text form: terms in graded-lex order, coefficients num/den."""
    if p.is_zero():
        return "0"
    parts = []
    for mono in sorted(p.coeffs, key=_mono_key):
        c = p.coeffs[mono]
        factors = []
        for name, e in zip(graph.generators, mono):
            if e == 1:
                factors.append(f"y_{name}")
            elif e > 1:
                factors.append(f"y_{name}^{e}")
        mag = abs(c)
        if not factors:
            body = str(mag)
        elif mag == 1:
            body = "*".join(factors)
        else:
            body = "*".join([str(mag)] + factors)
        if not parts:
            parts.append(body if c > 0 else "-" + body)
        else:
            parts.append(("+ " if c > 0 else "- ") + body)
    return " ".join(parts)
