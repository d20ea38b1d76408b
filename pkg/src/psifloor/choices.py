"""Edge choices on absolute Psi-floor diagrams and their multiplicities."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import factorial
from typing import Iterator

from .diagram import PsiFloorDiagram

__all__ = [
    "VertexPorts",
    "EdgeChoice",
    "ports",
    "enumerate_choices",
    "choice_multiplicity",
    "local_multiplicity",
    "floor_edges",
    "choose_internal",
]


@dataclass(frozen=True)
class VertexPorts:
    """Edges at a floor.

    ``incoming_internal``/``outgoing_internal`` hold ``(edge id, weight)`` for
    edges to other floors; ``end_edges`` counts the indistinguishable weight-1
    ends leaving the floor. Edges to degree-0 vertices can never be chosen,
    but they still count as non-chosen edges in the local multiplicity, so
    they are tallied in ``incoming_fixed``/``outgoing_fixed``.
    """

    incoming_internal: tuple[tuple[int, int], ...]
    outgoing_internal: tuple[tuple[int, int], ...]
    end_edges: int
    incoming_fixed: int = 0
    outgoing_fixed: int = 0


@dataclass(frozen=True)
class EdgeChoice:
    """Per-vertex chosen internal edge ids and number of chosen end edges.

    Degree-0 vertices always carry an empty entry.
    """

    chosen_internal: tuple[frozenset[int], ...]
    chosen_end_count: tuple[int, ...]

    def size(self, v: int) -> int:
        return len(self.chosen_internal[v]) + self.chosen_end_count[v]

    def to_trace(self) -> list[dict]:
        return [
            {"vertex": v, "chosen_edges": sorted(edges), "chosen_ends": ends}
            for v, (edges, ends) in enumerate(zip(self.chosen_internal, self.chosen_end_count))
        ]


def ports(D: PsiFloorDiagram, v: int) -> VertexPorts:
    if not D.is_floor(v):
        raise ValueError(f"vertex {v} has degree 0; ports are only defined for floors")
    inc = tuple((e, D.edges[e][2]) for e in D.in_edges[v] if D.is_floor(D.edges[e][0]))
    out = tuple((e, D.edges[e][2]) for e in D.out_edges[v] if D.is_floor(D.edges[e][1]))
    fixed_in = len(D.in_edges[v]) - len(inc)
    fixed_out = len(D.out_edges[v]) - len(out)
    return VertexPorts(inc, out, D.d(v) - D.div(v), fixed_in, fixed_out)


def floor_edges(D: PsiFloorDiagram) -> list[int]:
    """Ids of the edges joining two floors, the only choosable internal edges."""
    return [e for e, (s, t, _) in enumerate(D.edges) if D.is_floor(s) and D.is_floor(t)]


def choose_internal(D: PsiFloorDiagram, required: list[int]) -> Iterator[list[set[int]]]:
    """Assign each floor-floor edge to nobody, its source or its target.

    Yields per-vertex sets of chosen internal edges in which no vertex holds
    more than ``required[v]`` edges. Ordering: per edge, unchosen first, then
    chosen at the source, then at the target.
    """
    internal = floor_edges(D)
    chosen: list[set[int]] = [set() for _ in range(D.n)]

    def rec(i):
        if i == len(internal):
            yield [set(x) for x in chosen]
            return
        e = internal[i]
        s, t, _ = D.edges[e]
        yield from rec(i + 1)
        for v in (s, t):
            if len(chosen[v]) < required[v]:
                chosen[v].add(e)
                yield from rec(i + 1)
                chosen[v].discard(e)

    yield from rec(0)


def _required(D: PsiFloorDiagram) -> list[int]:
    return [D.a(v) - 2 * (D.d(v) - 1) if D.is_floor(v) else 0 for v in range(D.n)]


def enumerate_choices(D: PsiFloorDiagram) -> Iterator[EdgeChoice]:
    required = _required(D)
    ends = [D.d(v) - D.div(v) if D.is_floor(v) else 0 for v in range(D.n)]
    for internal in choose_internal(D, required):
        counts = []
        for v in range(D.n):
            c = required[v] - len(internal[v])
            if c < 0 or c > ends[v]:
                break
            counts.append(c)
        else:
            yield EdgeChoice(tuple(frozenset(x) for x in internal), tuple(counts))


def local_multiplicity(d: int, i: int, o: int) -> Fraction:
    """``d^i/d! * d^o/d!`` for a floor of degree ``d``."""
    f = factorial(d)
    return Fraction(d**i * d**o, f * f)


def choice_multiplicity(D: PsiFloorDiagram, C: EdgeChoice) -> Fraction:
    mult = Fraction(1)
    for v in range(D.n):
        if not D.is_floor(v):
            continue
        p = ports(D, v)
        chosen = C.chosen_internal[v]
        i = p.incoming_fixed + sum(1 for e, _ in p.incoming_internal if e not in chosen)
        o = p.outgoing_fixed + sum(1 for e, _ in p.outgoing_internal if e not in chosen)
        o += p.end_edges - C.chosen_end_count[v]
        mult *= local_multiplicity(D.d(v), i, o)
        mult /= factorial(C.chosen_end_count[v])
        for e in chosen:
            mult /= D.edges[e][2]
    return mult
