"""Statistics attached to an expression and the termination keys.

A merge (j) or multiplication (m) term is *bad* when the letter it acts on
is of left type in the term's own domain word: an earlier equal letter is
visible through a corridor of commuting letters.  Bad sites are exactly
what the normalization stages remove, and the remaining fields are the
bookkeeping quantities whose lexicographic keys strictly decrease along
the rewrite stages (f3/f2/f5 keys below).
"""

from __future__ import annotations

from dataclasses import dataclass

from .coxeter import CoxeterGraph
from .expr import Expression, right_offset, words_along


def is_left_type(graph: CoxeterGraph, word: tuple, i: int) -> bool:
    """1-based position i: earlier equal letter with all-commuting corridor."""
    if not 1 <= i <= len(word):
        raise IndexError(f"position {i} out of range for word of length {len(word)}")
    target = word[i - 1]
    for j in range(i - 1, 0, -1):
        other = word[j - 1]
        if other == target:
            return True
        if not graph.commutes(other, target):
            return False
    return False


@dataclass(frozen=True)
class MeasureRecord:
    m_bad_count: int
    j_bad_count: int
    j_positions: tuple
    f_count: int
    f_to_right: int
    depth_mj: int
    m_far_from_bottom: int
    min_m_bad: int            # chain index, 1-based; 0 = none
    mj_after_min_m_bad: int
    fn_of_m_bads: tuple       # (0, 0) when there is no m-bad site
    max_j_bad: int            # chain index, 1-based; 0 = none
    mj_equal_to_left: int


def stats(graph: CoxeterGraph, e: Expression) -> MeasureRecord:
    """All statistics in one pass; badness uses the term's domain word."""
    words = words_along(graph, e)
    length = len(e.terms)
    m_bads = []
    j_bads = []
    j_positions = []
    f_count = f_to_right = depth_mj = m_far = equal_left = 0
    for k, t in enumerate(e.terms, start=1):
        word = words[k - 1]
        if t.kind == "f":
            f_count += 1
            f_to_right += t.pos
        elif t.kind in ("m", "j"):
            depth_mj += k
            if t.kind == "m":
                m_far += length - k
            bad = is_left_type(graph, word, t.pos + 1)
            if bad:
                (m_bads if t.kind == "m" else j_bads).append(k)
            if t.kind == "j":
                j_positions.append(k + right_offset(graph, e, k - 1))
            equal_left += sum(1 for q in range(t.pos) if word[q] == t.gen)
    min_m_bad = m_bads[0] if m_bads else 0
    mj_after = sum(1 for k, t in enumerate(e.terms, start=1)
                   if k > min_m_bad and t.kind in ("m", "j"))
    if m_bads:
        fn = (mj_after, e.terms[min_m_bad - 1].pos)
    else:
        fn = (0, 0)
    return MeasureRecord(
        m_bad_count=len(m_bads),
        j_bad_count=len(j_bads),
        j_positions=tuple(j_positions),
        f_count=f_count,
        f_to_right=f_to_right,
        depth_mj=depth_mj,
        m_far_from_bottom=m_far,
        min_m_bad=min_m_bad,
        mj_after_min_m_bad=mj_after,
        fn_of_m_bads=fn,
        max_j_bad=j_bads[-1] if j_bads else 0,
        mj_equal_to_left=equal_left,
    )


def f3_key(graph: CoxeterGraph, e: Expression) -> tuple:
    """Composite key decreased by every ordering-stage rewrite."""
    r = stats(graph, e)
    return (r.j_positions, r.f_count, r.f_to_right, r.depth_mj)


def f2_key(graph: CoxeterGraph, e: Expression) -> tuple:
    """Key decreased by every bad-multiplication round; (0,0) is the floor."""
    return stats(graph, e).fn_of_m_bads


def f5_key(graph: CoxeterGraph, e: Expression) -> int:
    """Key decreased whenever the m-slide relation fires in the outer loop."""
    return stats(graph, e).mj_equal_to_left


def stats_lines(r: MeasureRecord) -> str:
    pairs = [
        ("m_bad_count", r.m_bad_count),
        ("j_bad_count", r.j_bad_count),
        ("j_positions", " ".join(map(str, r.j_positions)) or "-"),
        ("f_count", r.f_count),
        ("f_to_right", r.f_to_right),
        ("depth_mj", r.depth_mj),
        ("m_far_from_bottom", r.m_far_from_bottom),
        ("min_m_bad", r.min_m_bad),
        ("mj_after_min_m_bad", r.mj_after_min_m_bad),
        ("fn_of_m_bads", f"{r.fn_of_m_bads[0]} {r.fn_of_m_bads[1]}"),
        ("max_j_bad", r.max_j_bad),
        ("mj_equal_to_left", r.mj_equal_to_left),
    ]
    return "\n".join(f"{k}: {v}" for k, v in pairs)
