"""Worked examples with known exact values, checked by ``psifloor verify``."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import factorial
from typing import Callable

from .arith import kseq, stirling2, tseq
from .choices import EdgeChoice, choice_multiplicity
from .diagram import PsiFloorDiagram, diagram_multiplicity
from .engine import trace_tilde
from .marking import count_markings
from .recursion import p1_invariant
from .relative import (
    CompatiblePair,
    RelativeEdgeChoice,
    count_relative_markings,
    relative_choice_multiplicity,
    relative_diagram_multiplicity,
)

__all__ = ["Fixture", "FIXTURES", "example_diagram", "run_fixtures"]


def example_diagram() -> PsiFloorDiagram:
    """Degree 5, type (7,0,1,1): a chain of four vertices with a weight-2 middle edge."""
    return PsiFloorDiagram(((1, 0), (2, 3), (1, 2), (1, 0)), ((0, 1, 1), (1, 2, 2), (2, 3, 1)))


def example_choice() -> EdgeChoice:
    return EdgeChoice(
        (frozenset(), frozenset({0}), frozenset(), frozenset()),
        (0, 0, 2, 0),
    )


def example_pair() -> CompatiblePair:
    z = tseq()
    return CompatiblePair((z, z, z, tseq(1)), (z, tseq(1), tseq(0, 1), tseq(1)))


def example_relative_choice() -> RelativeEdgeChoice:
    z = tseq()
    return RelativeEdgeChoice(
        (frozenset(), frozenset({0}), frozenset({1}), frozenset()),
        (z, z, tseq(0, 1), z),
    )


def _tilde_contributions():
    total, parts = trace_tilde(4, kseq(1, 0, 0, 0, 2), (4, 4, 0))
    return (total, sorted(c.value for c in parts))


@dataclass(frozen=True)
class Fixture:
    name: str
    expected: object
    compute: Callable[[], object]

    def run(self) -> tuple[bool, object]:
        actual = self.compute()
        return actual == self.expected, actual


FIXTURES: tuple[Fixture, ...] = (
    Fixture("diagram_multiplicity", Fraction(4), lambda: diagram_multiplicity(example_diagram())),
    Fixture(
        "choice_multiplicity",
        Fraction(1, 2),
        lambda: choice_multiplicity(example_diagram(), example_choice()),
    ),
    Fixture("marking_count", 7, lambda: count_markings(example_diagram(), example_choice())),
    Fixture(
        "relative_diagram_multiplicity",
        Fraction(8),
        lambda: relative_diagram_multiplicity(example_diagram(), example_pair()),
    ),
    Fixture(
        "relative_choice_multiplicity",
        Fraction(1, 2),
        lambda: relative_choice_multiplicity(
            example_diagram(), example_pair(), example_relative_choice()
        ),
    ),
    Fixture(
        "relative_marking_count",
        5,
        lambda: count_relative_markings(
            example_diagram(), example_pair(), example_relative_choice()
        ),
    ),
    Fixture(
        "tilde_4_(1,0,0,0,2)",
        (Fraction(1, 4), [Fraction(1, 24), Fraction(1, 12), Fraction(1, 8)]),
        _tilde_contributions,
    ),
    Fixture("stirling_3_2", 3, lambda: stirling2(3, 2)),
    Fixture("stirling_3_1", 1, lambda: stirling2(3, 1)),
    *(
        Fixture(
            f"p1_one_point_degree_{d}",
            Fraction(1, factorial(d) ** 2),
            (lambda d=d: p1_invariant(d, 0)),
        )
        for d in range(1, 5)
    ),
)


def run_fixtures(pattern: str | None = None) -> list[tuple[Fixture, bool, object]]:
    """Run fixtures whose name contains ``pattern`` (all when ``None``)."""
    chosen = [f for f in FIXTURES if pattern is None or pattern in f.name]
    return [(f, *f.run()) for f in chosen]
