"""Relative Psi-floor diagrams: compatible pairs, relative choices and (alpha, beta)-markings."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import factorial
from typing import Iterator

from .arith import IntSeq, bounded_subsequences
from .choices import choose_internal, local_multiplicity, ports
from .diagram import PsiFloorDiagram, _edge_factor
from .marking import AddedVertex, MarkingPoset, count_linear_extensions, make_poset, sibling_quotient

__all__ = [
    "CompatiblePair",
    "RelativeEdgeChoice",
    "enumerate_compatible_pairs",
    "relative_diagram_multiplicity",
    "enumerate_relative_choices",
    "relative_choice_multiplicity",
    "build_relative_marking_poset",
    "count_relative_markings",
]


@dataclass(frozen=True)
class CompatiblePair:
    alpha_v: tuple[IntSeq, ...]
    beta_v: tuple[IntSeq, ...]

    def to_trace(self) -> dict:
        return {
            "alpha": [a.to_text() for a in self.alpha_v],
            "beta": [b.to_text() for b in self.beta_v],
        }


@dataclass(frozen=True)
class RelativeEdgeChoice:
    """Chosen floor-floor edge ids and chosen beta-end counts ``c(v)`` per vertex."""

    chosen_internal: tuple[frozenset[int], ...]
    chosen_beta_counts: tuple[IntSeq, ...]

    def size(self, v: int) -> int:
        return len(self.chosen_internal[v]) + self.chosen_beta_counts[v].size

    def to_trace(self) -> list[dict]:
        return [
            {"vertex": v, "chosen_edges": sorted(edges), "chosen_beta": c.to_text()}
            for v, (edges, c) in enumerate(zip(self.chosen_internal, self.chosen_beta_counts))
        ]


def enumerate_compatible_pairs(
    D: PsiFloorDiagram, alpha: IntSeq, beta: IntSeq
) -> Iterator[CompatiblePair]:
    """Every way to distribute ``alpha`` and ``beta`` over the vertices of ``D``.

    A degree-0 vertex carries no alpha, and its ``beta(v)`` has size
    ``a_v + 2 - val(v)``. For absolute diagrams that forces ``-div(v)`` ends
    of weight 1.
    """
    if (alpha + beta).weight != D.degree:
        raise ValueError(
            f"I(alpha+beta) = {(alpha + beta).weight} differs from the degree {D.degree}"
        )
    zero = IntSeq.zero(1)
    targets = [D.d(v) - D.div(v) for v in range(D.n)]
    if any(t < 0 for t in targets):
        return
    a_acc: list[IntSeq] = []
    b_acc: list[IntSeq] = []

    def rec(v, a_left, b_left):
        if v == D.n:
            if not a_left and not b_left:
                yield CompatiblePair(tuple(a_acc), tuple(b_acc))
            return
        t = targets[v]
        if not D.is_floor(v):
            size = D.a(v) + 2 - D.val(v)
            for bv in bounded_subsequences(b_left, t):
                if bv.size != size:
                    continue
                a_acc.append(zero)
                b_acc.append(bv)
                yield from rec(v + 1, a_left, b_left - bv)
                a_acc.pop()
                b_acc.pop()
            return
        for av in bounded_subsequences(a_left):
            rest = t - av.weight
            if rest < 0:
                continue
            for bv in bounded_subsequences(b_left, rest):
                a_acc.append(av)
                b_acc.append(bv)
                yield from rec(v + 1, a_left - av, b_left - bv)
                a_acc.pop()
                b_acc.pop()

    yield from rec(0, alpha, beta)


def relative_diagram_multiplicity(D: PsiFloorDiagram, pair: CompatiblePair) -> Fraction:
    """``I^beta(v)`` over floors, edge weights, and ``1/beta(v)!`` over degree-0 vertices.

    Ends at a degree-0 vertex contribute no weight factor. In the absolute
    case they all have weight 1, so this agrees with taking ``I^beta`` over
    all of ``beta``.
    """
    mult = _edge_factor(D)
    for v in range(D.n):
        if D.is_floor(v):
            mult *= pair.beta_v[v].power_product
        else:
            mult /= pair.beta_v[v].factorial_product
    return mult


def _sized_subsequences(bound: IntSeq, size: int) -> Iterator[IntSeq]:
    for s in bounded_subsequences(bound):
        if s.size == size:
            yield s


def enumerate_relative_choices(
    D: PsiFloorDiagram, pair: CompatiblePair
) -> Iterator[RelativeEdgeChoice]:
    required = [D.a(v) + 2 - 2 * D.d(v) if D.is_floor(v) else 0 for v in range(D.n)]
    zero = IntSeq.zero(1)
    for internal in choose_internal(D, required):
        per_vertex = []
        for v in range(D.n):
            if not D.is_floor(v):
                per_vertex.append([zero])
                continue
            need = required[v] - len(internal[v])
            opts = list(_sized_subsequences(pair.beta_v[v], need)) if need >= 0 else []
            if not opts:
                break
            per_vertex.append(opts)
        else:
            frozen = tuple(frozenset(x) for x in internal)
            yield from (
                RelativeEdgeChoice(frozen, counts) for counts in _product(per_vertex)
            )


def _product(options: list[list[IntSeq]]) -> Iterator[tuple[IntSeq, ...]]:
    from itertools import product

    return product(*options)


def relative_choice_multiplicity(
    D: PsiFloorDiagram, pair: CompatiblePair, C: RelativeEdgeChoice
) -> Fraction:
    """Local factors times ``1/omega`` over chosen edges (beta-ends included) times ``1/c(v)!``.

    As in the absolute case, edges to degree-0 vertices are never choosable
    but count as non-chosen in ``i(v)`` and ``o(v)``.
    """
    mult = Fraction(1)
    for v in range(D.n):
        if not D.is_floor(v):
            continue
        p = ports(D, v)
        chosen = C.chosen_internal[v]
        c = C.chosen_beta_counts[v]
        i = p.incoming_fixed + sum(1 for e, _ in p.incoming_internal if e not in chosen)
        o = p.outgoing_fixed + sum(1 for e, _ in p.outgoing_internal if e not in chosen)
        o += pair.beta_v[v].size - c.size + pair.alpha_v[v].size
        mult *= local_multiplicity(D.d(v), i, o)
        for e in chosen:
            mult /= D.edges[e][2]
        mult /= c.power_product
        mult /= c.factorial_product
    return mult


def build_relative_marking_poset(
    D: PsiFloorDiagram, pair: CompatiblePair, C: RelativeEdgeChoice
) -> MarkingPoset:
    """Poset of the (alpha, beta)-marking.

    Beta-vertices hang off floors only (the ends at a degree-0 vertex meet the
    marked point and are not placed separately). Alpha-vertices come after
    every other vertex, ordered by weight; equal weights are unconstrained
    among themselves.
    """
    added: list[AddedVertex] = []
    for v in range(D.n):
        if not D.is_floor(v):
            continue
        free = pair.beta_v[v] - C.chosen_beta_counts[v]
        for w, count in free.items():
            added += [AddedVertex("beta", v, w)] * count
    chosen = set().union(*C.chosen_internal) if D.n else set()
    for e, (s, t, w) in enumerate(D.edges):
        if D.is_floor(s) and D.is_floor(t) and e not in chosen:
            added.append(AddedVertex("subdivision", (s, t), w))
    first_alpha = D.n + len(added)
    for v in range(D.n):
        for w, count in pair.alpha_v[v].items():
            added += [AddedVertex("alpha", v, w)] * count
    extra = []
    alpha_ids = range(first_alpha, D.n + len(added))
    for x in alpha_ids:
        extra += [(y, x) for y in range(first_alpha)]
        wx = added[x - D.n].weight
        extra += [(y, x) for y in alpha_ids if added[y - D.n].weight < wx]
    return make_poset(D.n, added, extra)


def count_relative_markings(
    D: PsiFloorDiagram, pair: CompatiblePair, C: RelativeEdgeChoice
) -> int:
    P = build_relative_marking_poset(D, pair, C)
    return sibling_quotient(P, count_linear_extensions(P))
