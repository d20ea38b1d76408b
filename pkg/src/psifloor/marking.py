"""Markings of Psi-floor diagrams, counted as linear extensions of a poset."""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import permutations
from math import factorial, prod
from typing import Iterator

from .choices import EdgeChoice, ports
from .diagram import PsiFloorDiagram

__all__ = [
    "AddedVertex",
    "MarkingPoset",
    "CyclicPosetError",
    "build_marking_poset",
    "count_linear_extensions",
    "brute_force_linear_extensions",
    "iter_linear_extensions",
    "count_markings",
]


class CyclicPosetError(ValueError):
    pass


@dataclass(frozen=True)
class AddedVertex:
    """A white vertex added while marking.

    ``kind`` is one of ``"end"``, ``"subdivision"``, ``"alpha"``, ``"beta"``.
    ``attach`` is the base vertex the new edge leaves from, or the
    ``(src, tgt)`` pair for a subdivided edge.
    """

    kind: str
    attach: int | tuple[int, int]
    weight: int = 1


@dataclass(frozen=True)
class MarkingPoset:
    """Base vertices ``0..n_base-1`` (a chain) plus added vertices ``n_base + j``.

    ``relations`` holds pairs ``(x, y)`` meaning ``x`` precedes ``y``; the
    base chain is implied. ``sibling_groups`` lists element ids of mutually
    indistinguishable added vertices.
    """

    n_base: int
    added: tuple[AddedVertex, ...] = ()
    relations: tuple[tuple[int, int], ...] = ()
    sibling_groups: tuple[tuple[int, ...], ...] = field(default=())

    @property
    def size(self) -> int:
        return self.n_base + len(self.added)

    def all_relations(self) -> list[tuple[int, int]]:
        chain = [(i, i + 1) for i in range(self.n_base - 1)]
        return chain + list(self.relations)

    def predecessor_masks(self) -> tuple[int, ...]:
        """Bitmask of direct predecessors for each element."""
        masks = [0] * self.size
        for x, y in self.all_relations():
            masks[y] |= 1 << x
        return tuple(masks)


def _group_siblings(n_base: int, added: list[AddedVertex]) -> tuple[tuple[int, ...], ...]:
    groups = defaultdict(list)
    for j, x in enumerate(added):
        if x.kind == "subdivision":
            groups[("sub", j)].append(n_base + j)
        else:
            groups[(x.kind, x.attach, x.weight)].append(n_base + j)
    return tuple(tuple(g) for g in groups.values())


def _attach_relations(n_base: int, added: list[AddedVertex]) -> list[tuple[int, int]]:
    rel = []
    for j, x in enumerate(added):
        me = n_base + j
        if x.kind == "subdivision":
            u, w = x.attach
            rel += [(u, me), (me, w)]
        else:
            rel.append((x.attach, me))
    return rel


def make_poset(n_base: int, added: list[AddedVertex], extra=()) -> MarkingPoset:
    rel = _attach_relations(n_base, added) + list(extra)
    return MarkingPoset(n_base, tuple(added), tuple(rel), _group_siblings(n_base, added))


def build_marking_poset(D: PsiFloorDiagram, C: EdgeChoice) -> MarkingPoset:
    """Add the non-chosen end vertices and subdivide the non-chosen floor edges."""
    added = []
    chosen = set()
    for v in range(D.n):
        chosen |= C.chosen_internal[v]
    for v in range(D.n):
        if D.is_floor(v):
            free_ends = ports(D, v).end_edges - C.chosen_end_count[v]
            added += [AddedVertex("end", v)] * free_ends
    for e, (s, t, w) in enumerate(D.edges):
        if D.is_floor(s) and D.is_floor(t) and e not in chosen:
            added.append(AddedVertex("subdivision", (s, t), w))
    return make_poset(D.n, added)


@lru_cache(maxsize=65536)
def _count_downsets(preds: tuple[int, ...]) -> int:
    n = len(preds)
    full = (1 << n) - 1
    layer = {0: 1}
    for _ in range(n):
        nxt: dict[int, int] = defaultdict(int)
        for mask, ways in layer.items():
            for x in range(n):
                bit = 1 << x
                if not mask & bit and preds[x] & mask == preds[x]:
                    nxt[mask | bit] += ways
        if not nxt:
            raise CyclicPosetError("order constraints contain a cycle")
        layer = nxt
    return layer.get(full, 0)


def count_linear_extensions(P: MarkingPoset) -> int:
    """Number of total orders of all (labeled) elements respecting ``P``.

    Dynamic programming over down-sets: each step appends one element whose
    predecessors are already placed.
    """
    return _count_downsets(P.predecessor_masks())


def brute_force_linear_extensions(P: MarkingPoset) -> int:
    rel = P.all_relations()
    count = 0
    for perm in permutations(range(P.size)):
        pos = {x: i for i, x in enumerate(perm)}
        if all(pos[x] < pos[y] for x, y in rel):
            count += 1
    return count


def iter_linear_extensions(P: MarkingPoset, canonical: bool = True) -> Iterator[tuple[int, ...]]:
    """Generate linear extensions; with ``canonical`` only one per sibling class.

    A canonical extension lists the members of each sibling group in
    increasing id order.
    """
    preds = list(P.predecessor_masks())
    if canonical:
        for group in P.sibling_groups:
            for x, y in zip(group, group[1:]):
                preds[y] |= 1 << x
    n = P.size
    order: list[int] = []

    def rec(mask):
        if len(order) == n:
            yield tuple(order)
            return
        for x in range(n):
            bit = 1 << x
            if not mask & bit and preds[x] & mask == preds[x]:
                order.append(x)
                yield from rec(mask | bit)
                order.pop()

    yield from rec(0)


def sibling_quotient(P: MarkingPoset, labeled: int) -> int:
    sym = prod(factorial(len(g)) for g in P.sibling_groups)
    if labeled % sym:
        raise AssertionError(
            f"linear extension count {labeled} not divisible by sibling symmetry {sym}"
        )
    return labeled // sym


def count_markings(D: PsiFloorDiagram, C: EdgeChoice) -> int:
    """Number of markings of ``(D, C)`` up to equivalence."""
    P = build_marking_poset(D, C)
    return sibling_quotient(P, count_linear_extensions(P))
