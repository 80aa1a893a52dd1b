"""Morphism expressions: tensor words, generator terms, linear combinations.

A Word is a tuple of generator names; it stands for the tensor product of
the corresponding one-letter bimodules, with the empty word as the unit.
An Expression is a word together with a chain of Terms applied first to
last.  Five term kinds exist:

  j@i(s)   merge two adjacent equal letters (s,s) at positions i, i+1
  m@i(s)   multiply out the letter s at position i
  a@i(s)   insert a pair (s,s) at position i
  f@i(s,r) cross adjacent letters (s,r) -> (r,s); requires m(s,r) = 2
  x@i(s)   multiply tensor slot i by the hyperplane form x_s; a word of
           length n has slots 0..n, slot i sitting left of letter i

Offsets count identity strands to the left (0-based).  p@i(s) and eps@i(s)
are parser macros for a+j and a+m; they are not term kinds of their own.

A LinComb is a finite formal sum of expressions with Poly coefficients,
all sharing one domain word and one codomain word.
"""

from __future__ import annotations

import random
import re
from dataclasses import dataclass
from functools import lru_cache

from .coxeter import CoxeterGraph
from .polyring import Poly

KINDS = ("j", "m", "a", "f", "x")

# consumed/produced letter counts per kind
_ARITY = {"j": (2, 1), "m": (1, 0), "a": (0, 2), "f": (2, 2), "x": (0, 0)}


class ExprError(ValueError):
    pass


class TypeMismatch(ExprError):
    def __init__(self, msg, index=None):
        super().__init__(msg)
        self.index = index


@dataclass(frozen=True)
class Term:
    kind: str
    pos: int
    gen: str
    gen2: str | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ExprError(f"unknown term kind {self.kind!r}")
        if (self.kind == "f") != (self.gen2 is not None):
            raise ExprError("gen2 is for crossings only")
        if self.pos < 0:
            raise ExprError("negative offset")

    @property
    def arity(self) -> int:
        return _ARITY[self.kind][0]

    @property
    def coarity(self) -> int:
        return _ARITY[self.kind][1]

    def shifted(self, delta: int) -> "Term":
        return Term(self.kind, self.pos + delta, self.gen, self.gen2)

    def sort_key(self):
        return (self.pos, KINDS.index(self.kind), self.gen, self.gen2 or "")

    def __str__(self):
        if self.kind == "f":
            return f"f@{self.pos}({self.gen},{self.gen2})"
        return f"{self.kind}@{self.pos}({self.gen})"


def J(s, i):
    return Term("j", i, s)


def M(s, i):
    return Term("m", i, s)


def A(s, i):
    return Term("a", i, s)


def F(s, r, i):
    return Term("f", i, s, r)


def X(s, i):
    return Term("x", i, s)


def step_codomain(graph: CoxeterGraph, word: tuple, t: Term) -> tuple:
    """Codomain word of a single term, or raise TypeMismatch."""
    n = len(word)
    k, i, g = t.kind, t.pos, t.gen
    graph.check_gen(g)

    def need(pos, gen):
        if pos >= n:
            raise TypeMismatch(f"{t}: position {pos} beyond word of length {n}")
        if word[pos] != gen:
            raise TypeMismatch(
                f"{t}: letter {word[pos]!r} at position {pos}, expected {gen!r}")

    if k == "j":
        need(i, g)
        need(i + 1, g)
        return word[:i] + (g,) + word[i + 2:]
    if k == "m":
        need(i, g)
        return word[:i] + word[i + 1:]
    if k == "a":
        if i > n:
            raise TypeMismatch(f"{t}: insertion point {i} beyond word length {n}")
        return word[:i] + (g, g) + word[i:]
    if k == "f":
        graph.check_gen(t.gen2)
        if g == t.gen2 or not graph.commutes(g, t.gen2):
            raise TypeMismatch(f"{t}: crossing needs m({g},{t.gen2}) = 2")
        need(i, g)
        need(i + 1, t.gen2)
        return word[:i] + (t.gen2, g) + word[i + 2:]
    if k == "x":
        if i > n:
            raise TypeMismatch(f"{t}: slot {i} beyond word of length {n}")
        return word
    raise AssertionError(k)


@dataclass(frozen=True)
class Expression:
    domain: tuple
    terms: tuple

    def __post_init__(self):
        object.__setattr__(self, "domain", tuple(self.domain))
        object.__setattr__(self, "terms", tuple(self.terms))

    def __len__(self):
        return len(self.terms)

    def replace(self, start: int, stop: int, segment) -> "Expression":
        return Expression(self.domain,
                          self.terms[:start] + tuple(segment) + self.terms[stop:])

    def sort_key(self):
        return (self.domain, tuple(t.sort_key() for t in self.terms),
                tuple((t.kind, t.pos, t.gen, t.gen2 or "") for t in self.terms))

    def __str__(self):
        return print_expr(self)


@lru_cache(maxsize=1 << 17)
def words_along(graph: CoxeterGraph, e: Expression) -> tuple:
    """All intermediate words: words_along(e)[k] is the domain of term k."""
    words = [tuple(e.domain)]
    for idx, t in enumerate(e.terms):
        try:
            words.append(step_codomain(graph, words[-1], t))
        except TypeMismatch as exc:
            raise TypeMismatch(f"term {idx}: {exc}", index=idx) from None
    return tuple(words)


def typecheck(graph: CoxeterGraph, e: Expression) -> tuple:
    """Return the codomain word; TypeMismatch carries the first bad index."""
    return words_along(graph, e)[-1]


def right_offset(graph: CoxeterGraph, e: Expression, k: int) -> int:
    """Strands to the right of term k: pos + arity + right_offset = length."""
    t = e.terms[k]
    word = words_along(graph, e)[k]
    return len(word) - t.arity - t.pos


# ---------------------------------------------------------------------------
# linear combinations

class LinComb:
    """Finite Poly-weighted sum of expressions with a common domain/codomain."""

    __slots__ = ("terms",)

    def __init__(self, terms: dict | None = None):
        self.terms = {}
        if terms:
            for e, c in terms.items():
                self.add(e, c)

    @staticmethod
    def of(e: Expression, coeff: Poly) -> "LinComb":
        lc = LinComb()
        lc.add(e, coeff)
        return lc

    @staticmethod
    def zero() -> "LinComb":
        return LinComb()

    def add(self, e: Expression, coeff: Poly):
        if coeff.is_zero():
            return
        cur = self.terms.get(e)
        new = coeff if cur is None else cur + coeff
        if new.is_zero():
            self.terms.pop(e, None)
        else:
            self.terms[e] = new

    def __iadd__(self, other: "LinComb"):
        for e, c in other.terms.items():
            self.add(e, c)
        return self

    def __add__(self, other: "LinComb") -> "LinComb":
        out = LinComb(dict(self.terms))
        out += other
        return out

    def scaled(self, coeff: Poly) -> "LinComb":
        out = LinComb()
        for e, c in self.terms.items():
            out.add(e, c * coeff)
        return out

    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other):
        return isinstance(other, LinComb) and self.terms == other.terms

    def __len__(self):
        return len(self.terms)

    def items(self):
        return self.terms.items()

    def expressions(self):
        return list(self.terms)

    def sorted_items(self):
        return sorted(self.terms.items(), key=lambda ec: ec[0].sort_key())

    def __repr__(self):
        return f"LinComb({len(self.terms)} exprs)"


# ---------------------------------------------------------------------------
# text form

_TERM_RE = re.compile(
    r"(?P<kind>j|m|a|f|x|p|eps)\s*@\s*(?P<pos>\d+)\s*"
    r"\(\s*(?P<g1>\w+)\s*(?:,\s*(?P<g2>\w+)\s*)?\)$"
)


def parse_expr(text: str) -> Expression:
    """Parse `word g g ... | t1 ; t2 ; ...`; p/eps macros expand inline."""
    if "|" not in text:
        raise ExprError("expected `word ... | ...`")
    head, _, tail = text.partition("|")
    head = head.strip()
    if not head.startswith("word"):
        raise ExprError("expression must start with `word`")
    domain = tuple(head[len("word"):].split())
    terms = []
    for chunk in tail.split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        mt = _TERM_RE.match(chunk)
        if not mt:
            raise ExprError(f"bad term syntax at {chunk!r}")
        kind, pos = mt.group("kind"), int(mt.group("pos"))
        g1, g2 = mt.group("g1"), mt.group("g2")
        if (kind == "f") != (g2 is not None):
            raise ExprError(f"bad arity in {chunk!r}")
        if kind == "p":
            terms += [A(g1, pos), J(g1, pos + 1)]
        elif kind == "eps":
            terms += [A(g1, pos), M(g1, pos)]
        elif kind == "f":
            terms.append(F(g1, g2, pos))
        else:
            terms.append(Term(kind, pos, g1))
    return Expression(domain, tuple(terms))


def print_expr(e: Expression) -> str:
    head = "word" + "".join(" " + g for g in e.domain)
    if not e.terms:
        return head + " |"
    return head + " | " + " ; ".join(str(t) for t in e.terms)


def print_lincomb(graph: CoxeterGraph, lc: LinComb) -> str:
    """One `<poly> * [ <terms> ]` line per expression, canonically sorted."""
    from .polyring import poly_str
    if lc.is_zero():
        return "0"
    lines = []
    for e, c in lc.sorted_items():
        body = " ; ".join(str(t) for t in e.terms) if e.terms else ""
        lines.append(f"{poly_str(graph, c)} * [ {body} ]")
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# seeded generation of R-expressions

def legal_terms(graph: CoxeterGraph, word: tuple, allow_grow: bool,
                allow_x: bool) -> list:
    """All terms applicable to `word`, in a fixed deterministic order."""
    n = len(word)
    out = []
    for i in range(n):
        out.append(M(word[i], i))
    for i in range(n - 1):
        if word[i] == word[i + 1]:
            out.append(J(word[i], i))
        elif graph.commutes(word[i], word[i + 1]):
            out.append(F(word[i], word[i + 1], i))
    if allow_grow:
        for s in graph.generators:
            for i in range(n + 1):
                out.append(A(s, i))
    if allow_x:
        for s in graph.generators:
            for i in range(n + 1):
                out.append(X(s, i))
    return out


def random_expression(graph: CoxeterGraph, word: tuple, max_len: int,
                      seed: int, allow_alpha: bool = True,
                      allow_x: bool = True) -> Expression:
    """Seeded random well-typed expression from `word` to the empty word.

    Deterministic per seed.  Retries a bounded number of times; plain
    multiplications always complete, so the bound is generous.
    """
    if max_len < len(word):
        raise ExprError("max_len shorter than the word")
    rng = random.Random(seed)
    for _ in range(200):
        terms = []
        cur = tuple(word)
        ok = True
        while cur:
            budget = max_len - len(terms)
            if budget < len(cur):
                ok = False
                break
            # alphas cost 3 terms minimum to clean up after themselves
            allow_grow = allow_alpha and budget >= len(cur) + 3
            cands = legal_terms(graph, cur, allow_grow,
                                allow_x and budget > len(cur))
            # bias toward shrinking terms so walks finish
            weights = [4 if t.kind in ("m", "j") else 1 for t in cands]
            t = rng.choices(cands, weights)[0]
            terms.append(t)
            cur = step_codomain(graph, cur, t)
        if ok:
            return Expression(word, tuple(terms))
    raise RuntimeError("random_expression: retries exhausted")
