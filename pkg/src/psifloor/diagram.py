"""Absolute Psi-floor diagrams: validity, type, multiplicity and enumeration."""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from itertools import combinations_with_replacement
from math import factorial
from typing import Iterator, NamedTuple

from .arith import IntSeq

__all__ = [
    "PsiFloorDiagram",
    "DiagramSignature",
    "Violation",
    "DiagramStructureError",
    "UnmarkableDiagramError",
    "validate",
    "signature",
    "relative_type",
    "diagram_multiplicity",
    "enumerate_diagrams",
    "enumerate_diagrams_unchecked",
]


class DiagramStructureError(ValueError):
    """Malformed input: vertex indices out of range, non-positive weights, loops."""


class UnmarkableDiagramError(ValueError):
    """The diagram has more vertices than its type leaves room for."""


class Violation(NamedTuple):
    condition: str
    where: object
    message: str


@dataclass(frozen=True)
class PsiFloorDiagram:
    """Vertex-ordered weighted graph with ``(degree, psi_power)`` decorations.

    The position of a vertex in ``vertices`` is its place in the linear order.
    Edges are ``(src, tgt, weight)`` triples; they are kept sorted so that
    equality is equality of the edge sets.
    """

    vertices: tuple[tuple[int, int], ...]
    edges: tuple[tuple[int, int, int], ...] = ()

    def __post_init__(self):
        vertices = tuple((int(d), int(a)) for d, a in self.vertices)
        edges = tuple(sorted((int(s), int(t), int(w)) for s, t, w in self.edges))
        object.__setattr__(self, "vertices", vertices)
        object.__setattr__(self, "edges", edges)
        n = len(vertices)
        if n == 0:
            raise DiagramStructureError("a diagram needs at least one vertex")
        for d, a in vertices:
            if d < 0 or a < 0:
                raise DiagramStructureError(f"negative decoration ({d}, {a})")
        for s, t, w in edges:
            if not (0 <= s < n and 0 <= t < n):
                raise DiagramStructureError(f"edge ({s}, {t}) has an index out of range")
            if s == t:
                raise DiagramStructureError(f"loop at vertex {s}")
            if w < 1:
                raise DiagramStructureError(f"edge ({s}, {t}) has weight {w} < 1")

    def __hash__(self):
        return hash((self.vertices, self.edges))

    @property
    def n(self) -> int:
        return len(self.vertices)

    @property
    def degree(self) -> int:
        return sum(d for d, _ in self.vertices)

    def d(self, v: int) -> int:
        return self.vertices[v][0]

    def a(self, v: int) -> int:
        return self.vertices[v][1]

    def is_floor(self, v: int) -> bool:
        return self.vertices[v][0] > 0

    @cached_property
    def in_edges(self) -> tuple[tuple[int, ...], ...]:
        """Edge ids entering each vertex."""
        out = [[] for _ in self.vertices]
        for e, (_, t, _) in enumerate(self.edges):
            out[t].append(e)
        return tuple(tuple(x) for x in out)

    @cached_property
    def out_edges(self) -> tuple[tuple[int, ...], ...]:
        out = [[] for _ in self.vertices]
        for e, (s, _, _) in enumerate(self.edges):
            out[s].append(e)
        return tuple(tuple(x) for x in out)

    def div(self, v: int) -> int:
        return sum(self.edges[e][2] for e in self.out_edges[v]) - sum(
            self.edges[e][2] for e in self.in_edges[v]
        )

    def val(self, v: int) -> int:
        return len(self.in_edges[v]) + len(self.out_edges[v])

    def to_json(self) -> dict:
        return {
            "vertices": [list(x) for x in self.vertices],
            "edges": [list(x) for x in self.edges],
        }

    @classmethod
    def from_json(cls, data: dict | str) -> "PsiFloorDiagram":
        if isinstance(data, str):
            data = json.loads(data)
        return cls(
            tuple(tuple(x) for x in data["vertices"]),
            tuple(tuple(x) for x in data.get("edges", ())),
        )


@dataclass(frozen=True)
class DiagramSignature:
    degree: int
    type: IntSeq


def _is_tree(D: PsiFloorDiagram) -> bool:
    if len(D.edges) != D.n - 1:
        return False
    parent = list(range(D.n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for s, t, _ in D.edges:
        rs, rt = find(s), find(t)
        if rs == rt:
            return False
        parent[rs] = rt
    return True


def _zero_vertex_ok(a: int, val: int, div: int) -> bool:
    """Relative valence condition at a degree-0 vertex.

    The ends of the vertex that meet the line form a sequence of size
    ``a + 2 - val`` and weight ``-div``; such a sequence must exist.
    """
    size, weight = a + 2 - val, -div
    if size < 0 or weight < 0:
        return False
    return size <= weight and (size == 0) == (weight == 0)


def validate(D: PsiFloorDiagram, relative: bool = False) -> list[Violation]:
    """Every violated diagram condition; an empty list means ``D`` is valid.

    Conditions are tagged ``"tree"`` (connected, genus 0) and ``"1"`` .. ``"6"``
    in the order edge direction, no edges between degree-0 vertices,
    positivity, string inequality, divergence, degree-0 valence. With
    ``relative`` the valence condition only asks for room for the ends that
    meet the line (see ``_zero_vertex_ok``).
    """
    out = []
    if not _is_tree(D):
        out.append(Violation("tree", None, "graph is not a connected tree"))
    for e, (s, t, _) in enumerate(D.edges):
        if not s < t:
            out.append(Violation("1", e, f"edge {s}->{t} does not respect the order"))
        if D.d(s) == 0 and D.d(t) == 0:
            out.append(Violation("2", e, f"edge {s}->{t} joins two degree-0 vertices"))
    for v, (d, a) in enumerate(D.vertices):
        if d == 0 and a == 0:
            out.append(Violation("3", v, f"vertex {v} has d_v = a_v = 0"))
        if a - 2 * (d - 1) < 0:
            out.append(Violation("4", v, f"vertex {v} violates the string inequality"))
        div = D.div(v)
        if div > d:
            out.append(Violation("5", v, f"vertex {v} has divergence {div} > {d}"))
        if d == 0 and relative:
            if not _zero_vertex_ok(a, D.val(v), div):
                out.append(Violation("6", v, f"degree-0 vertex {v} has no room for its ends"))
        elif d == 0 and D.val(v) != a + 2 + div:
            out.append(
                Violation("6", v, f"degree-0 vertex {v} has valence {D.val(v)} != {a + 2 + div}")
            )
    return out


def _psi_type(D: PsiFloorDiagram, budget: int) -> IntSeq:
    top = max(a for _, a in D.vertices)
    counts = [0] * (top + 1)
    for _, a in D.vertices:
        counts[a] += 1
    ik = sum(i * c for i, c in enumerate(counts))
    white = budget - ik - D.n
    if white < 0:
        raise UnmarkableDiagramError(
            f"diagram cannot be marked: {white} white vertices would be needed"
        )
    counts[0] += white
    return IntSeq(tuple(counts), 0)


def signature(D: PsiFloorDiagram) -> DiagramSignature:
    """Degree and (absolute) type of ``D``."""
    d = D.degree
    return DiagramSignature(d, _psi_type(D, 3 * d - 1))


def relative_type(D: PsiFloorDiagram, beta: IntSeq) -> IntSeq:
    """Type of ``D`` when counted relative to a line with non-fixed profile ``beta``."""
    return _psi_type(D, 2 * D.degree + beta.size - 1)


def _edge_factor(D: PsiFloorDiagram) -> Fraction:
    mult = Fraction(1)
    for s, t, w in D.edges:
        mult *= w * w
        if D.d(s) == 0 or D.d(t) == 0:
            mult /= w
    return mult


def diagram_multiplicity(D: PsiFloorDiagram) -> Fraction:
    mult = _edge_factor(D)
    for v in range(D.n):
        if D.d(v) == 0:
            mult /= factorial(abs(D.div(v)))
    return mult


# enumeration


def _multiset_permutations(items: list) -> Iterator[tuple]:
    """Distinct permutations of ``items`` in lexicographic order."""
    seq = sorted(items)
    n = len(seq)
    while True:
        yield tuple(seq)
        i = n - 2
        while i >= 0 and seq[i] >= seq[i + 1]:
            i -= 1
        if i < 0:
            return
        j = n - 1
        while seq[j] <= seq[i]:
            j -= 1
        seq[i], seq[j] = seq[j], seq[i]
        seq[i + 1 :] = reversed(seq[i + 1 :])


def _decorations(d: int, k: IntSeq) -> Iterator[tuple[tuple[int, int], ...]]:
    """Ordered vertex decorations of total degree ``d`` realizing the Psi-powers of ``k``."""
    positive = [(i, c) for i, c in k.items() if i > 0]
    for zeros in range(k[0] + 1):
        groups = positive + ([(0, zeros)] if zeros else [])
        if not groups:
            continue
        # per Psi-power, a multiset of degrees obeying positivity and the string inequality
        options = []
        for a, count in groups:
            lo = 0 if a > 0 else 1
            hi = a // 2 + 1
            options.append(
                [(a, combo) for combo in combinations_with_replacement(range(lo, hi + 1), count)]
            )
        found = set()

        def rec(j, remaining, acc):
            if j == len(options):
                if remaining == 0:
                    found.add(tuple(sorted(acc)))
                return
            for a, combo in options[j]:
                s = sum(combo)
                if s <= remaining:
                    rec(j + 1, remaining - s, acc + [(dv, a) for dv in combo])

        rec(0, d, [])
        seqs = []
        for multiset in found:
            for perm in _multiset_permutations(list(multiset)):
                if perm[0][0] > 0:  # the smallest vertex only has outgoing edges
                    seqs.append(perm)
        yield from sorted(seqs)


def _trees(
    deco: tuple[tuple[int, int], ...], d: int, relative: bool = False
) -> Iterator[tuple[tuple[int, int, int], ...]]:
    """Weighted trees on the ordered vertices satisfying conditions (1), (2), (5), (6).

    With ``relative`` the valence condition (6) is relaxed as in
    ``_zero_vertex_ok``.

    Vertices are attached in order; vertex ``j`` links to at most one vertex
    of each component of the forest already built on ``0..j-1``, which hands
    out every labeled tree exactly once. All in-edges of ``j`` are fixed at
    that point, so degree-0 targets and divergence slack are checked eagerly.
    """
    n = len(deco)
    degs = [dv for dv, _ in deco]
    psi = [a for _, a in deco]
    in_w = [0] * n
    in_c = [0] * n
    out_w = [0] * n
    out_c = [0] * n
    comp = [-1] * n
    edges: list[tuple[int, int, int]] = []

    def slack(u):
        # remaining room for out_w - out_c (degree-0) or out_w (floor)
        if degs[u] > 0:
            return degs[u] + in_w[u] - out_w[u]
        return in_w[u] + in_c[u] - psi[u] - 2 - (out_w[u] - out_c[u])

    def finish_ok():
        for v in range(n):
            if degs[v] > 0:
                continue
            if relative:
                if not _zero_vertex_ok(psi[v], in_c[v] + out_c[v], out_w[v] - in_w[v]):
                    return False
            elif slack(v) != 0:
                return False
        return True

    def step(j):
        if j == n:
            if len(set(comp)) == 1 and finish_ok():
                yield tuple(edges)
            return
        yield from attach(j, sorted(set(comp[:j])), 0, [])

    def attach(j, comps, ci, linked):
        if ci == len(comps):
            # all in-edges of j are now fixed
            if degs[j] == 0 and not relative and in_w[j] + in_c[j] - psi[j] - 2 < 0:
                return
            new = min(linked) if linked else j
            saved = comp[:]
            for c in linked:
                for u in range(j):
                    if saved[u] == c:
                        comp[u] = new
            comp[j] = new
            yield from step(j + 1)
            comp[:] = saved
            comp[j] = -1
            return
        c = comps[ci]
        yield from attach(j, comps, ci + 1, linked)
        for u in range(j):
            if comp[u] != c:
                continue
            if degs[u] == 0 and degs[j] == 0:
                continue
            room = slack(u)
            if degs[u] > 0:
                wmax = min(d, room)
            elif relative:
                if in_c[u] + out_c[u] >= psi[u] + 2:
                    continue
                wmax = min(d, in_w[u] - out_w[u])
            else:
                # degree-0 vertices also need divergence <= 0
                wmax = min(d, room + 1, in_w[u] - out_w[u])
            for w in range(1, wmax + 1):
                in_w[j] += w
                in_c[j] += 1
                out_w[u] += w
                out_c[u] += 1
                edges.append((u, j, w))
                yield from attach(j, comps, ci + 1, linked + [c])
                edges.pop()
                in_w[j] -= w
                in_c[j] -= 1
                out_w[u] -= w
                out_c[u] -= 1

    comp[0] = 0
    if n == 1:
        yield ()
        return
    yield from step(1)


def enumerate_diagrams_unchecked(
    d: int, k: IntSeq, relative: bool = False
) -> Iterator[PsiFloorDiagram]:
    """All valid diagrams of degree ``d`` whose Psi-powers match ``k``.

    ``k[0]`` only bounds the number of Psi-power-0 vertices; no dimension
    condition is imposed. ``relative`` relaxes the degree-0 valence condition
    for counts relative to a line.
    """
    if d < 1:
        raise ValueError("degree must be at least 1")
    if k.base != 0:
        raise ValueError("type must be a base-0 sequence")
    for deco in _decorations(d, k):
        for edges in _trees(deco, d, relative):
            yield PsiFloorDiagram(deco, edges)


def enumerate_diagrams(d: int, k: IntSeq) -> Iterator[PsiFloorDiagram]:
    """Every Psi-floor diagram of degree ``d`` and type ``k``, each exactly once."""
    if d < 1:
        raise ValueError("degree must be at least 1")
    if k.weight != 3 * d - 1 - k.size:
        raise ValueError(f"dimension condition Ik = 3d - 1 - |k| fails for d={d}, k={k}")
    return enumerate_diagrams_unchecked(d, k)
