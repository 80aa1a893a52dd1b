"""Exact bimodule evaluation: the ground-truth oracle.

A word (s_1, ..., s_n) denotes the tensor product bimodule
R (x)_{R^{s_1}} R (x)_{R^{s_2}} ... (x)_{R^{s_n}} R with n+1 polynomial
slots.  Every element can be written uniquely as a sum over bit vectors

    sum_e  p_e * (1 (x) x_{s_1}^{e_1} (x) ... (x) x_{s_n}^{e_n})

with all polynomial content pushed into slot 0: slot k decomposes its
content q as p_op(s_k, q) + x_{s_k} * demazure(s_k, q), and both
s_k-invariant factors slide across the tensor gap to the left.  Elements
are stored as {bits: Poly}; maps as columns over the 2^n canonical basis.

Morphism generators act slot-wise:

    m@i   multiply slots i and i+1 together
    j@i   slot i *= demazure(s, slot i+1); drop slot i+1
    a@i   split slot i into (q*x_s, 1, 1) + (q, 1, x_s)
    f@i   (q * demazure(s, mid), 1, x_s * r) + (q * p_op(s, mid), 1, r)
    x@i   multiply slot i by x_s

Composition of maps is exact Poly matrix composition (all generator maps
are left-R-linear), which is what makes the oracle usable for verifying
every rewrite rule by literal matrix equality.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .coxeter import CoxeterGraph
from .expr import Expression, LinComb, Term, step_codomain, words_along
from .polyring import Poly, demazure, one, p_op, specialize, x_form


def basis_slots(graph: CoxeterGraph, word: tuple, bits: tuple) -> tuple:
    unit = one(graph)
    slots = [unit]
    for s, b in zip(word, bits):
        slots.append(x_form(graph, s) if b else unit)
    return tuple(slots)


@lru_cache(maxsize=1 << 16)
def canonicalize(graph: CoxeterGraph, word: tuple, slots: tuple) -> tuple:
    """Canonical form of a pure tensor, as a tuple of (bits, Poly) pairs.

    Processes the rightmost slot: its content splits into an invariant part
    (bit 0) and x_s times an invariant part (bit 1); the invariant factors
    multiply into the slot to the left and the sweep recurses.
    """
    if not word:
        p = slots[0]
        return (((), p),) if not p.is_zero() else ()
    s = word[-1]
    p = slots[-1]
    head, neck = slots[:-2], slots[-2]
    out: dict = {}
    unit = one(graph)
    xs = x_form(graph, s)
    if p == unit:
        parts = [(0, None)]  # slide nothing
    elif p == xs:
        parts = [(1, None)]
    else:
        parts = []
        inv = p_op(graph, s, p)
        if not inv.is_zero():
            parts.append((0, inv))
        der = demazure(graph, s, p)
        if not der.is_zero():
            parts.append((1, der))
    for bit, carry in parts:
        sub_neck = neck if carry is None else neck * carry
        for bits, q in canonicalize(graph, word[:-1], head + (sub_neck,)):
            key = bits + (bit,)
            cur = out.get(key)
            out[key] = q if cur is None else cur + q
    return tuple((b, q) for b, q in out.items() if not q.is_zero())


def element_from_slots(graph, word, slots) -> dict:
    return dict(canonicalize(graph, tuple(word), tuple(slots)))


def right_multiply(graph: CoxeterGraph, word: tuple, element: dict,
                   q: Poly) -> dict:
    """Multiply by q on the right (last slot) and re-canonicalize."""
    out: dict = {}
    for bits, p in element.items():
        slots = list(basis_slots(graph, word, bits))
        slots[0] = p
        slots[-1] = slots[-1] * q
        _accumulate(out, canonicalize(graph, tuple(word), tuple(slots)))
    return _trim(out)


def left_multiply(element: dict, q: Poly) -> dict:
    return _trim({bits: p * q for bits, p in element.items()})


def _accumulate(acc: dict, pairs):
    for bits, q in pairs:
        cur = acc.get(bits)
        acc[bits] = q if cur is None else cur + q


def _trim(element: dict) -> dict:
    return {b: p for b, p in element.items() if not p.is_zero()}


@lru_cache(maxsize=1 << 17)
def _term_on_basis(graph: CoxeterGraph, word: tuple, t: Term,
                   bits: tuple) -> tuple:
    """Image of a canonical basis vector under one term, canonicalized."""
    slots = list(basis_slots(graph, word, bits))
    cod = step_codomain(graph, word, t)
    i, s = t.pos, t.gen
    branches = []
    if t.kind == "m":
        branches.append(slots[:i] + [slots[i] * slots[i + 1]] + slots[i + 2:])
    elif t.kind == "j":
        branches.append(slots[:i] + [slots[i] * demazure(graph, s, slots[i + 1])]
                        + slots[i + 2:])
    elif t.kind == "a":
        unit = one(graph)
        xs = x_form(graph, s)
        branches.append(slots[:i] + [slots[i] * xs, unit, unit] + slots[i + 1:])
        branches.append(slots[:i] + [slots[i], unit, xs] + slots[i + 1:])
    elif t.kind == "f":
        unit = one(graph)
        xs = x_form(graph, s)
        branches.append(slots[:i] + [slots[i] * demazure(graph, s, slots[i + 1]),
                                     unit, xs * slots[i + 2]] + slots[i + 3:])
        branches.append(slots[:i] + [slots[i] * p_op(graph, s, slots[i + 1]),
                                     unit, slots[i + 2]] + slots[i + 3:])
    elif t.kind == "x":
        branches.append(list(slots))
        branches[-1][i] = branches[-1][i] * x_form(graph, s)
    else:
        raise AssertionError(t.kind)
    out: dict = {}
    for br in branches:
        _accumulate(out, canonicalize(graph, cod, tuple(br)))
    return tuple((b, q) for b, q in out.items() if not q.is_zero())


def apply_term(graph: CoxeterGraph, word: tuple, element: dict,
               t: Term) -> dict:
    out: dict = {}
    for bits, p in element.items():
        for cbits, q in _term_on_basis(graph, word, t, bits):
            cur = out.get(cbits)
            prod = q * p
            out[cbits] = prod if cur is None else cur + prod
    return _trim(out)


# ---------------------------------------------------------------------------
# maps

@dataclass
class BimoduleMap:
    """Matrix of an expression on the canonical left bases (exact Polys)."""

    domain: tuple
    codomain: tuple
    cols: dict  # domain bits -> {codomain bits -> Poly}

    def entry(self, row: tuple, col: tuple) -> Poly:
        return self.cols.get(col, {}).get(row)

    def normalized(self) -> "BimoduleMap":
        cols = {}
        for c, el in self.cols.items():
            el = _trim(el)
            if el:
                cols[c] = el
        return BimoduleMap(self.domain, self.codomain, cols)

    def __eq__(self, other):
        if not isinstance(other, BimoduleMap):
            return NotImplemented
        a, b = self.normalized(), other.normalized()
        return (a.domain == b.domain and a.codomain == b.codomain
                and a.cols == b.cols)

    def __add__(self, other: "BimoduleMap") -> "BimoduleMap":
        assert self.domain == other.domain and self.codomain == other.codomain
        cols = {c: dict(el) for c, el in self.cols.items()}
        for c, el in other.cols.items():
            _accumulate(cols.setdefault(c, {}), el.items())
        return BimoduleMap(self.domain, self.codomain,
                           {c: _trim(el) for c, el in cols.items()}).normalized()

    def scaled(self, coeff: Poly) -> "BimoduleMap":
        return BimoduleMap(self.domain, self.codomain,
                           {c: left_multiply(el, coeff)
                            for c, el in self.cols.items()}).normalized()

    def is_zero(self) -> bool:
        return all(not _trim(el) for el in self.cols.values())


def zero_map(domain: tuple, codomain: tuple) -> BimoduleMap:
    return BimoduleMap(tuple(domain), tuple(codomain), {})


def identity_map(graph: CoxeterGraph, word: tuple) -> BimoduleMap:
    unit = one(graph)
    cols = {bits: {bits: unit}
            for bits in itertools.product((0, 1), repeat=len(word))}
    return BimoduleMap(tuple(word), tuple(word), cols)


def eval_term(graph: CoxeterGraph, word: tuple, t: Term) -> BimoduleMap:
    cod = step_codomain(graph, word, t)
    cols = {}
    for bits in itertools.product((0, 1), repeat=len(word)):
        el = dict(_term_on_basis(graph, word, t, bits))
        if el:
            cols[bits] = el
    return BimoduleMap(tuple(word), cod, cols)


def eval_expression(graph: CoxeterGraph, e: Expression) -> BimoduleMap:
    """Functorial evaluation: compose the term maps along the chain."""
    words = words_along(graph, e)
    cols = {}
    for bits in itertools.product((0, 1), repeat=len(e.domain)):
        element = {bits: one(graph)}
        for word, t in zip(words, e.terms):
            element = apply_term(graph, word, element, t)
            if not element:
                break
        if element:
            cols[bits] = element
    return BimoduleMap(tuple(e.domain), words[-1], cols)


def eval_lincomb(graph: CoxeterGraph, lc: LinComb, domain=None,
                 codomain=None) -> BimoduleMap:
    """Poly-weighted sum of expression evaluations.

    domain/codomain must be supplied when lc is empty (the zero map needs
    its type).
    """
    if lc.is_zero():
        if domain is None or codomain is None:
            raise ValueError("zero LinComb needs explicit domain/codomain")
        return zero_map(domain, codomain)
    total = None
    for e, c in lc.items():
        m = eval_expression(graph, e).scaled(c)
        total = m if total is None else total + m
    return total


def eval_any(graph: CoxeterGraph, obj, domain=None, codomain=None):
    if isinstance(obj, Expression):
        return eval_expression(graph, obj)
    return eval_lincomb(graph, obj, domain, codomain)


def maps_equal(a: BimoduleMap, b: BimoduleMap) -> bool:
    return a == b


def counterexample_basis_vector(a: BimoduleMap, b: BimoduleMap):
    """First domain basis vector on which the two maps differ, or None."""
    if a.domain != b.domain or a.codomain != b.codomain:
        return ()
    for bits in itertools.product((0, 1), repeat=len(a.domain)):
        if _trim(dict(a.cols.get(bits, {}))) != _trim(dict(b.cols.get(bits, {}))):
            return bits
    return None


# ---------------------------------------------------------------------------
# linear independence by rational specialization

@dataclass
class IndependenceResult:
    independent: bool
    inconclusive: bool
    points: list  # specialization points actually used

    def __bool__(self):
        return self.independent


def _rank(rows: list) -> int:
    rows = [list(r) for r in rows if any(v != 0 for v in r)]
    rank = 0
    ncols = len(rows[0]) if rows else 0
    col = 0
    while rows and col < ncols:
        piv = next((i for i, r in enumerate(rows) if r[col] != 0), None)
        if piv is None:
            col += 1
            continue
        rows[0], rows[piv] = rows[piv], rows[0]
        head = rows[0]
        inv = Fraction(1) / head[col]
        for r in rows[1:]:
            if r[col] != 0:
                f = r[col] * inv
                for j in range(col, ncols):
                    r[j] -= f * head[j]
        rows = [r for r in rows[1:] if any(v != 0 for v in r)]
        rank += 1
        col += 1
    return rank


def independent(graph: CoxeterGraph, maps: list, seed: int,
                trials: int = 3) -> IndependenceResult:
    """Test left-linear independence of maps into R over the polynomial ring.

    Full rank of the coefficient vectors at a single rational point already
    certifies independence over the fraction field (a nonzero minor); a
    rank drop at every tried point is reported as inconclusive, never as
    dependence.
    """
    if not maps:
        return IndependenceResult(True, False, [])
    dom = maps[0].domain
    assert all(m.domain == dom and m.codomain == () for m in maps)
    rng = random.Random(seed)
    points = []
    bits_order = list(itertools.product((0, 1), repeat=len(dom)))
    for _ in range(trials):
        point = {s: Fraction(rng.randint(2, 97), rng.randint(1, 7))
                 for s in graph.generators}
        points.append(point)
        rows = []
        for m in maps:
            row = []
            for bits in bits_order:
                p = m.cols.get(bits, {}).get(())
                row.append(specialize(graph, p, point) if p is not None
                           else Fraction(0))
            rows.append(row)
        if _rank(rows) == len(maps):
            return IndependenceResult(True, False, points)
    return IndependenceResult(False, True, points)
