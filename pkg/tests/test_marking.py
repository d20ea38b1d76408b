import pytest
from hypothesis import given, settings, strategies as st

from psifloor.choices import enumerate_choices
from psifloor.diagram import PsiFloorDiagram, enumerate_diagrams
from psifloor.fixtures import example_choice, example_diagram
from psifloor.marking import (
    AddedVertex,
    CyclicPosetError,
    MarkingPoset,
    brute_force_linear_extensions,
    build_marking_poset,
    count_linear_extensions,
    count_markings,
    iter_linear_extensions,
    make_poset,
    sibling_quotient,
)
from oracles import absolute_types


def test_example_poset_shape():
    P = build_marking_poset(example_diagram(), example_choice())
    kinds = sorted((x.kind, x.attach) for x in P.added)
    # one free end at v1, two at v3, subdivisions of the unchosen edges 1-2 and 2-3
    assert kinds == [("end", 1), ("end", 3), ("end", 3), ("subdivision", (1, 2)), ("subdivision", (2, 3))]
    assert P.size == 9


def test_example_marking_count():
    P = build_marking_poset(example_diagram(), example_choice())
    assert count_linear_extensions(P) == 14
    assert count_markings(example_diagram(), example_choice()) == 7
    assert len(list(iter_linear_extensions(P))) == 7


def test_fully_chosen_has_no_added_vertices():
    D = PsiFloorDiagram(((1, 1), (1, 2)), ((0, 1, 1),))
    choices = [C for C in enumerate_choices(D) if C.chosen_internal[0]]
    assert choices
    for C in choices:
        P = build_marking_poset(D, C)
        if not P.added:
            assert count_markings(D, C) == 1


def test_single_vertex():
    P = make_poset(1, [])
    assert count_linear_extensions(P) == 1


def test_cycle_detected():
    P = MarkingPoset(2, (), ((1, 0),))
    with pytest.raises(CyclicPosetError):
        count_linear_extensions(P)


def test_sibling_quotient_requires_divisibility():
    P = make_poset(1, [AddedVertex("end", 0)] * 3)
    assert count_linear_extensions(P) == 6
    assert sibling_quotient(P, 6) == 1
    with pytest.raises(AssertionError):
        sibling_quotient(P, 4)


def test_subdivisions_are_not_siblings():
    added = [AddedVertex("subdivision", (0, 1), 1)] * 2
    P = make_poset(2, added)
    assert all(len(g) == 1 for g in P.sibling_groups)
    assert count_linear_extensions(P) == 2


@st.composite
def random_posets(draw):
    n = draw(st.integers(1, 8))
    n_base = draw(st.integers(1, n))
    pairs = [(x, y) for x in range(n) for y in range(x + 1, n)]
    rel = draw(st.lists(st.sampled_from(pairs), max_size=8, unique=True)) if pairs else []
    # shuffle labels so relations do not always go from small to large ids
    perm = draw(st.permutations(range(n)))
    rel = tuple((perm[x], perm[y]) for x, y in rel)
    added = tuple(AddedVertex("end", 0) for _ in range(n - n_base))
    return MarkingPoset(n_base, added, rel)


@settings(max_examples=500, deadline=None)
@given(random_posets())
def test_dp_matches_brute_force(P):
    expected = brute_force_linear_extensions(P)
    if expected == 0:
        # only a cyclic relation set has no extension at all
        with pytest.raises(CyclicPosetError):
            count_linear_extensions(P)
        return
    assert count_linear_extensions(P) == expected
    assert len(list(iter_linear_extensions(P, canonical=False))) == expected


@st.composite
def random_marking_posets(draw):
    n_base = draw(st.integers(1, 4))
    added = []
    for _ in range(draw(st.integers(0, 4))):
        if n_base > 1 and draw(st.booleans()):
            u = draw(st.integers(0, n_base - 2))
            w = draw(st.integers(u + 1, n_base - 1))
            added.append(AddedVertex("subdivision", (u, w), draw(st.integers(1, 2))))
        else:
            added.append(AddedVertex("end", draw(st.integers(0, n_base - 1))))
    return make_poset(n_base, added)


@settings(max_examples=300, deadline=None)
@given(random_marking_posets())
def test_canonical_extensions_count_classes(P):
    labeled = count_linear_extensions(P)
    assert labeled == brute_force_linear_extensions(P)
    classes = list(iter_linear_extensions(P))
    assert len(classes) == sibling_quotient(P, labeled)
    assert len(set(classes)) == len(classes)


@pytest.mark.parametrize("d", [1, 2, 3])
def test_marking_counts_are_positive_integers(d):
    for k in absolute_types(d):
        for D in enumerate_diagrams(d, k):
            for C in enumerate_choices(D):
                nu = count_markings(D, C)
                assert isinstance(nu, int) and nu >= 1
