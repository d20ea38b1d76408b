from fractions import Fraction

import pytest

from oracles import absolute_types
from psifloor.arith import tseq
from psifloor.choices import choice_multiplicity, enumerate_choices
from psifloor.diagram import PsiFloorDiagram, diagram_multiplicity, enumerate_diagrams
from psifloor.fixtures import example_diagram, example_pair, example_relative_choice
from psifloor.marking import brute_force_linear_extensions, count_linear_extensions, count_markings, iter_linear_extensions
from psifloor.relative import (
    CompatiblePair,
    RelativeEdgeChoice,
    build_relative_marking_poset,
    count_relative_markings,
    enumerate_compatible_pairs,
    enumerate_relative_choices,
    relative_choice_multiplicity,
    relative_diagram_multiplicity,
)

Z = tseq()


def single_pair(D, alpha, beta):
    (pair,) = enumerate_compatible_pairs(D, alpha, beta)
    return pair


def test_example_pair_is_enumerated():
    pairs = list(enumerate_compatible_pairs(example_diagram(), tseq(1), tseq(2, 1)))
    assert example_pair() in pairs
    assert len(pairs) == len(set(pairs))


def test_pairs_reject_wrong_degree():
    with pytest.raises(ValueError):
        list(enumerate_compatible_pairs(example_diagram(), tseq(1), tseq(1)))


def test_example_relative_diagram_multiplicity():
    assert relative_diagram_multiplicity(example_diagram(), example_pair()) == 8


def test_example_relative_choice_is_enumerated():
    D, pair = example_diagram(), example_pair()
    choices = list(enumerate_relative_choices(D, pair))
    assert example_relative_choice() in choices
    for C in choices:
        for v in range(D.n):
            if D.is_floor(v):
                assert C.size(v) == D.a(v) + 2 - 2 * D.d(v)


def test_example_relative_choice_multiplicity_matches_stated_value():
    # the worked example states 1/2; the formula as implemented gives 1/4
    got = relative_choice_multiplicity(example_diagram(), example_pair(), example_relative_choice())
    assert got == Fraction(1, 2)


def test_example_relative_choice_multiplicity_by_hand():
    # v0: i=0, o=1 (edge 0 is chosen at v1 only) -> 1
    # v1: i=0, o=2 (edge 1 and one beta end) -> 2^0/2 * 2^2/2 = 1
    # v2: i=0, o=1 (edge 2) -> 1, then 1/2 for chosen edge 1 and 1/2 for the chosen weight-2 end
    # v3: i=1, o=2 (beta end and alpha end) -> 1
    got = relative_choice_multiplicity(example_diagram(), example_pair(), example_relative_choice())
    assert got == Fraction(1, 4)


def test_example_relative_marking_count():
    assert count_relative_markings(example_diagram(), example_pair(), example_relative_choice()) == 5


def test_single_vertex_cases():
    D = PsiFloorDiagram(((1, 0),))
    pair = single_pair(D, tseq(1), Z)
    assert pair == CompatiblePair((tseq(1),), (Z,))
    assert relative_diagram_multiplicity(D, pair) == 1
    (C,) = enumerate_relative_choices(D, pair)
    assert C == RelativeEdgeChoice((frozenset(),), (Z,))
    assert relative_choice_multiplicity(D, pair, C) == 1
    assert count_relative_markings(D, pair, C) == 1

    pair = single_pair(D, Z, tseq(1))
    assert relative_diagram_multiplicity(D, pair) == 1


def test_beta_power_product_at_floors():
    D = PsiFloorDiagram(((2, 2),))
    pair = single_pair(D, Z, tseq(0, 1))
    assert relative_diagram_multiplicity(D, pair) == 2


def test_degree_zero_vertex_divides_by_beta_factorial():
    # weight 3 into a degree-0 vertex with Psi-power 1: two ends of weights (1, 2)
    D = PsiFloorDiagram(((3, 4), (0, 1)), ((0, 1, 3),))
    pairs = list(enumerate_compatible_pairs(D, Z, tseq(1, 1)))
    assert [p.beta_v for p in pairs] == [(Z, tseq(1, 1))]
    # 3^2/3 for the edge, 1/(1!1!) for the ends
    assert relative_diagram_multiplicity(D, pairs[0]) == 3


def test_two_equal_alpha_at_one_floor_counted_once():
    D = PsiFloorDiagram(((2, 2),))
    pair = single_pair(D, tseq(2), Z)
    (C,) = enumerate_relative_choices(D, pair)
    P = build_relative_marking_poset(D, pair, C)
    assert brute_force_linear_extensions(P) == 2
    assert count_relative_markings(D, pair, C) == 1


def test_equal_alpha_at_different_floors_are_distinct():
    D = PsiFloorDiagram(((2, 2), (1, 0)), ((0, 1, 1),))
    pairs = [p for p in enumerate_compatible_pairs(D, tseq(2), tseq(1)) if p.alpha_v == (tseq(1), tseq(1))]
    assert len(pairs) == 1
    for C in enumerate_relative_choices(D, pairs[0]):
        P = build_relative_marking_poset(D, pairs[0], C)
        alpha_ids = {D.n + j for j, x in enumerate(P.added) if x.kind == "alpha"}
        assert len(alpha_ids) == 2
        assert all(len(set(g) & alpha_ids) <= 1 for g in P.sibling_groups)
        assert count_linear_extensions(P) == brute_force_linear_extensions(P)
        # both relative orders of the two alpha vertices survive among canonical extensions
        orders = {tuple(x for x in ext if x in alpha_ids) for ext in iter_linear_extensions(P)}
        assert len(orders) == 2


@pytest.mark.parametrize("d", [1, 2, 3])
def test_alpha_vertices_last_and_weight_monotone(d):
    checked = 0
    for k in absolute_types(d):
        for D in enumerate_diagrams(d, k):
            for alpha in (tseq(1), tseq(0, 1), tseq(1, 1), tseq(2)):
                if alpha.weight > d:
                    continue
                beta = tseq(d - alpha.weight)
                for pair in enumerate_compatible_pairs(D, alpha, beta):
                    for C in enumerate_relative_choices(D, pair):
                        P = build_relative_marking_poset(D, pair, C)
                        alpha_ids = [D.n + j for j, x in enumerate(P.added) if x.kind == "alpha"]
                        for ext in iter_linear_extensions(P, canonical=False):
                            tail = ext[len(ext) - len(alpha_ids):]
                            assert sorted(tail) == alpha_ids
                            weights = [P.added[x - D.n].weight for x in tail]
                            assert weights == sorted(weights)
                            checked += 1
    assert checked > 0


@pytest.mark.parametrize("d", [1, 2, 3])
def test_absolute_specialization(d):
    beta = tseq(d)
    for k in absolute_types(d):
        for D in enumerate_diagrams(d, k):
            pair = single_pair(D, Z, beta)
            assert all(b == tseq(D.d(v) - D.div(v)) for v, b in enumerate(pair.beta_v))
            assert relative_diagram_multiplicity(D, pair) == diagram_multiplicity(D)
            absolute = {(C.chosen_internal, C.chosen_end_count): C for C in enumerate_choices(D)}
            relative = {
                (C.chosen_internal, tuple(c[1] for c in C.chosen_beta_counts)): C
                for C in enumerate_relative_choices(D, pair)
            }
            assert absolute.keys() == relative.keys()
            for key, C in absolute.items():
                R = relative[key]
                assert relative_choice_multiplicity(D, pair, R) == choice_multiplicity(D, C)
                assert count_relative_markings(D, pair, R) == count_markings(D, C)
