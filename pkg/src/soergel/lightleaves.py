"""Moves, the canonical basis of maps to the unit, and currying.

A map from a word to the unit object factors (when it is in normal form)
through three kinds of *moves*, indexed by right offsets (0 = rightmost
strand):

  m(t)        multiply out the strand at right offset t
  ch(t, t')   walk the strand at right offset t'+1 rightward across
              commuting strands and merge it into the equal strand at
              right offset t  (t' = t means the strands are adjacent)
  cch(t, t')  ch(t, t') followed by multiplying the merged strand out

A move sequence is in *good order* when its targets strictly decrease in
application order.  The basis of Hom(word, unit) consists of the good-order
move sequences satisfying the canonical-choice condition `canonical_moves`:
an m-move never deletes a left-type strand (one mergeable further left),
and a cch-move never multiplies out a strand that is still left-type after
the merge.  For good-order sequences this is equivalent to having no bad
merge or multiplication sites at all, and `is_member_FL` checks both
formulations against each other.
"""

from __future__ import annotations

from dataclasses import dataclass

from .coxeter import CoxeterGraph
from .expr import Expression, F, J, M, A, Term, step_codomain, typecheck, words_along
from .measures import is_left_type, stats


class MoveError(ValueError):
    pass


@dataclass(frozen=True)
class Move:
    kind: str      # 'm', 'ch', 'cch'
    target: int    # right offset of the acted strand
    source: int    # right offset t' of ch/cch; == target for 'm'

    def __post_init__(self):
        if self.kind not in ("m", "ch", "cch"):
            raise MoveError(f"unknown move kind {self.kind!r}")
        if self.source < self.target:
            raise MoveError("source right-offset below target")

    def __str__(self):
        if self.kind == "m":
            return f"m({self.target})"
        return f"{self.kind}({self.target},{self.source})"


def expand(graph: CoxeterGraph, word: tuple, mv: Move) -> list:
    """Terms of one move on `word`; raises MoveError when illegal."""
    l = len(word)
    if mv.kind == "m":
        if not 0 <= mv.target < l:
            raise MoveError(f"{mv}: no strand at right offset {mv.target}")
        i = l - 1 - mv.target
        return [M(word[i], i)]
    if not 0 <= mv.target <= mv.source <= l - 2:
        raise MoveError(f"{mv}: offsets out of range for length {l}")
    a = l - 2 - mv.source          # mover position
    tgt = l - 1 - mv.target        # target position
    g = word[a]
    if word[tgt] != g:
        raise MoveError(f"{mv}: strands {word[a]!r} and {word[tgt]!r} differ")
    terms = []
    cur = list(word)
    for p in range(a, tgt - 1):
        other = cur[p + 1]
        if not graph.commutes(g, other):
            raise MoveError(f"{mv}: {g!r} cannot cross {other!r}")
        terms.append(F(g, other, p))
        cur[p], cur[p + 1] = cur[p + 1], cur[p]
    terms.append(J(g, tgt - 1))
    if mv.kind == "cch":
        terms.append(M(g, tgt - 1))
    return terms


def parse_moves(graph: CoxeterGraph, e: Expression) -> list:
    """Segment an expression into moves; fails unless every crossing run
    ascends by one and ends in a merge at one more."""
    words = words_along(graph, e)
    moves = []
    idx = 0
    terms = e.terms
    while idx < len(terms):
        word = words[idx]
        l = len(word)
        t = terms[idx]
        if t.kind == "m":
            moves.append(Move("m", l - 1 - t.pos, l - 1 - t.pos))
            idx += 1
            continue
        if t.kind in ("a", "x"):
            raise MoveError(f"term {idx}: {t} is not part of any move")
        if t.kind == "f":
            first = t.pos
            pos = t.pos
            while idx < len(terms) and terms[idx].kind == "f" \
                    and terms[idx].pos == pos:
                idx += 1
                pos += 1
            if idx == len(terms) or terms[idx].kind != "j" \
                    or terms[idx].pos != pos:
                raise MoveError(
                    f"term {idx}: crossing run must end in a merge at +1")
            target = l - 2 - pos
            source = l - 2 - first
        else:  # bare j
            target = source = l - 2 - t.pos
        jpos = terms[idx].pos
        idx += 1
        kind = "ch"
        # a following m on the merged strand completes the move
        if idx < len(terms) and terms[idx].kind == "m" \
                and terms[idx].pos == jpos:
            kind = "cch"
            idx += 1
        moves.append(Move(kind, target, source))
    return moves


def expand_moves(graph: CoxeterGraph, word: tuple, moves) -> Expression:
    terms = []
    cur = tuple(word)
    for mv in moves:
        seg = expand(graph, cur, mv)
        terms += seg
        for t in seg:
            cur = step_codomain(graph, cur, t)
    return Expression(word, tuple(terms))


def good_order(moves) -> bool:
    return all(b.target < a.target for a, b in zip(moves, moves[1:]))


def canonical_moves(graph: CoxeterGraph, word: tuple, moves) -> bool:
    """The canonical-choice condition on a move sequence.

    (i) an m-move must not delete a left-type strand; (ii) a cch-move's
    merged strand must not be left-type after the merge.  Chains carry no
    extra condition: a legal chain target is left-type by construction.
    """
    cur = tuple(word)
    for mv in moves:
        l = len(cur)
        if mv.kind == "m":
            if is_left_type(graph, cur, l - mv.target):
                return False
        for t in expand(graph, cur, mv):
            nxt = step_codomain(graph, cur, t)
            if mv.kind == "cch" and t.kind == "j":
                # merged strand sits at 1-based l - 1 - target in the new word
                if is_left_type(graph, nxt, len(nxt) - mv.target):
                    return False
            cur = nxt
    return cur == ()


@dataclass(frozen=True)
class LightLeaf:
    domain: tuple
    moves: tuple

    def expression(self, graph: CoxeterGraph) -> Expression:
        return expand_moves(graph, self.domain, self.moves)

    def __str__(self):
        return " ".join(str(m) for m in self.moves) if self.moves else "(id)"


def is_member_FL(graph: CoxeterGraph, e: Expression) -> bool:
    """Membership in the canonical basis of Hom(word, unit).

    Both formulations are computed: moves + good order + canonical-choice,
    and good order + no bad merge/multiplication sites; they must agree.
    """
    if typecheck(graph, e) != ():
        raise MoveError("not a map to the unit object")
    try:
        moves = parse_moves(graph, e)
    except MoveError:
        return False
    order = good_order(moves)
    by_moves = order and canonical_moves(graph, e.domain, moves)
    rec = stats(graph, e)
    by_counts = order and rec.m_bad_count == 0 and rec.j_bad_count == 0
    if by_moves != by_counts:
        raise AssertionError(
            f"membership characterizations disagree on {e}: "
            f"moves={by_moves} counts={by_counts}")
    return by_moves


def enumerate_FL(graph: CoxeterGraph, word: tuple, max_len: int = 64) -> list:
    """All basis elements on `word`, by seeded-order DFS with pruning.

    Moves are generated with larger targets first (good order is then
    automatic) and sources ascending; the canonical-choice conditions
    prune m/cch branches.  Deterministic.
    """
    if len(word) > max_len:
        raise MoveError(f"word longer than the configured bound {max_len}")
    for g in word:
        graph.check_gen(g)
    out = []

    def legal_moves(cur, bound):
        l = len(cur)
        for t in range(min(bound, l) - 1, -1, -1):
            tgt = l - 1 - t
            if not is_left_type(graph, cur, tgt + 1):
                yield Move("m", t, t)
            for src in range(t, l - 1):
                a = l - 2 - src
                if cur[a] != cur[tgt]:
                    continue
                if not all(graph.commutes(cur[p], cur[tgt])
                           for p in range(a + 1, tgt)):
                    continue
                yield Move("ch", t, src)
                merged = cur[:a] + cur[a + 1:]
                if not is_left_type(graph, merged, len(merged) - t):
                    yield Move("cch", t, src)

    def walk(cur, bound, acc):
        if cur == ():
            out.append(LightLeaf(tuple(word), tuple(acc)))
            return
        for mv in legal_moves(cur, bound):
            nxt = cur
            for t in expand(graph, cur, mv):
                nxt = step_codomain(graph, nxt, t)
            walk(nxt, mv.target, acc + [mv])

    walk(tuple(word), len(word) + 1, [])
    return out


# ---------------------------------------------------------------------------
# currying between Hom spaces

def curry_F(graph: CoxeterGraph, e: Expression, t: str) -> Expression:
    """Hom(t . M, N) -> Hom(M, t . N): pair creation then the original map."""
    graph.check_gen(t)
    if not e.domain or e.domain[0] != t:
        raise MoveError(f"domain does not start with {t!r}")
    terms = (A(t, 0),) + tuple(term.shifted(1) for term in e.terms)
    out = Expression(e.domain[1:], terms)
    typecheck(graph, out)
    return out


def uncurry_G(graph: CoxeterGraph, e: Expression, t: str) -> Expression:
    """Hom(M, t . N) -> Hom(t . M, N): the original map then merge-and-multiply."""
    graph.check_gen(t)
    cod = typecheck(graph, e)
    if not cod or cod[0] != t:
        raise MoveError(f"codomain does not start with {t!r}")
    terms = tuple(term.shifted(1) for term in e.terms) + (J(t, 0), M(t, 0))
    out = Expression((t,) + e.domain, terms)
    typecheck(graph, out)
    return out
