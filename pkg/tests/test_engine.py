import json
from fractions import Fraction

import pytest

from psifloor.arith import kseq, tseq
from psifloor.engine import (
    CacheFormatError,
    CacheIntegrityError,
    admissible_keys,
    cache_load,
    cache_save,
    compute,
    crosscheck,
    default_psi_order,
    n_floor_absolute,
    n_floor_relative,
    trace_tilde,
)
from psifloor.recursion import DimensionError, invariant_N, make_key, memo_snapshot

pytestmark = pytest.mark.usefixtures("fresh_state")


@pytest.mark.parametrize(
    "d, k, value",
    [(1, (2,), 1), (4, (1, 0, 0, 0, 2), Fraction(3, 4)), (3, (8,), 12)],
)
def test_absolute_values(d, k, value):
    assert n_floor_absolute(d, kseq(*k)) == value


def test_absolute_rejects_dimension():
    with pytest.raises(DimensionError):
        n_floor_absolute(2, kseq(4))


@pytest.mark.parametrize(
    "args, value",
    [
        ((1, (1,), (1,), ()), 1),
        ((1, (2,), (), (1,)), 1),
        ((2, (4,), (), (0, 1)), 2),
        ((3, (7,), (), (1, 1)), 36),
    ],
)
def test_relative_values(args, value):
    assert n_floor_relative(*args) == value


def test_relative_rejects_dimension():
    with pytest.raises(DimensionError):
        n_floor_relative(1, (1,), (1,), (1,))


@pytest.mark.parametrize("d", [1, 2, 3])
def test_specialization(d):
    for k in (key.k for key in admissible_keys(d) if not key.alpha and key.beta == tseq(d)):
        assert n_floor_absolute(d, k) == n_floor_relative(d, k)


@pytest.mark.parametrize("d", [1, 2])
def test_path_equality_small(d):
    for key in admissible_keys(d):
        assert crosscheck(key).passed


@pytest.mark.parametrize(
    "key, value",
    [
        (make_key(1, (2,)), 1),
        (make_key(4, (1, 0, 0, 0, 2)), Fraction(3, 4)),
        (make_key(3, (8,)), 12),
    ],
)
def test_crosscheck_examples(key, value):
    report = crosscheck(key)
    assert report.passed and report.floor == report.recursion == value
    assert report.diagram_count > 0
    data = report.to_json()
    assert data["pass"] is True and data["floor"] == str(value)


def test_admissible_key_counts():
    assert [sum(1 for _ in admissible_keys(d)) for d in (1, 2, 3, 4)] == [3, 23, 117, 519]
    for key in admissible_keys(3):
        key.check()


def test_compute_methods_agree():
    key = make_key(3, (3, 1, 1))
    results = {m: compute(key, m) for m in ("enumeration", "recursion", "both")}
    assert len({r.value_N for r in results.values()}) == 1
    assert results["enumeration"].diagram_count > 0
    assert results["recursion"].diagram_count is None
    for r in results.values():
        assert r.value_tilde == r.value_N * Fraction(key.beta.factorial_product * key.k.factorial_product, 120)
    with pytest.raises(ValueError):
        compute(key, "guess")


def test_compute_result_json():
    r = compute(make_key(4, (1, 0, 0, 0, 2)))
    data = r.to_json()
    assert data["N"] == "3/4" and data["tilde"] == "6" and data["method"] == "recursion"
    assert data["k"] == [1, 0, 0, 0, 2]


def test_parallel_matches_serial():
    key = make_key(3, (4, 0, 1), (), (1, 1))
    serial = compute(key, "enumeration", parallelism=1)
    parallel = compute(key, "enumeration", parallelism=2)
    assert serial.value_N == parallel.value_N
    assert serial.diagram_count == parallel.diagram_count
    assert n_floor_absolute(3, kseq(8), parallelism=3) == 12


def test_reproducible_serialization():
    key = make_key(3, (2, 0, 2))
    first = json.dumps(compute(key, "both").to_json() | {"elapsed": None})
    second = json.dumps(compute(key, "both").to_json() | {"elapsed": None})
    assert first == second


def test_trace_default_order():
    assert default_psi_order(kseq(1, 0, 0, 0, 2)) == (4, 4, 0)


def test_trace_contributions():
    total, parts = trace_tilde(4, kseq(1, 0, 0, 0, 2))
    assert total == Fraction(1, 4)
    assert sorted(p.value for p in parts) == [Fraction(1, 24), Fraction(1, 12), Fraction(1, 8)]
    assert all(p.to_json()["contribution"] in {"1/24", "1/12", "1/8"} for p in parts)


@pytest.mark.parametrize("order", [(4, 4, 0), (4, 0, 4), (0, 4, 4)])
def test_trace_total_does_not_depend_on_order(order):
    total, _ = trace_tilde(4, kseq(1, 0, 0, 0, 2), order)
    assert total == Fraction(1, 4)


def test_trace_total_matches_n_for_other_types():
    from math import factorial

    k = kseq(3, 1, 1)
    total, _ = trace_tilde(3, k)
    assert total == Fraction(k.factorial_product, factorial(k.size)) * n_floor_absolute(3, k)


def test_trace_rejects_wrong_order():
    with pytest.raises(ValueError):
        trace_tilde(4, kseq(1, 0, 0, 0, 2), (4, 0, 0))


def test_cache_roundtrip(tmp_path):
    path = tmp_path / "cache.json"
    compute(make_key(3, (8,)))
    compute(make_key(2, (4,), (), (0, 1)), "enumeration")
    before = memo_snapshot()
    n = cache_save(path)
    data = json.loads(path.read_text())
    assert data["version"] == 1 and len(data["entries"]) == n
    methods = {(e["d"], tuple(e["k"]), tuple(e["alpha"]), tuple(e["beta"])): e["method"] for e in data["entries"]}
    assert methods[(2, (4,), (), (0, 1))] in ("enumeration", "both")
    assert methods[(3, (8,), (), (3,))] == "recursion"

    from psifloor.engine import clear_results
    from psifloor.recursion import clear_memo

    clear_memo()
    clear_results()
    assert cache_load(path) == n
    after = memo_snapshot()
    assert {k: v for k, v in after.items() if k in before} == before
    assert invariant_N(make_key(3, (8,))) == 12


def test_cache_conflict(tmp_path):
    path = tmp_path / "cache.json"
    compute(make_key(3, (8,)))
    cache_save(path)
    data = json.loads(path.read_text())
    for e in data["entries"]:
        if e["d"] == 3 and e["k"] == [8]:
            e["N"], e["tilde"] = "13", "78"
    path.write_text(json.dumps(data))
    with pytest.raises(CacheIntegrityError):
        cache_load(path)


def test_cache_inconsistent_tilde(tmp_path):
    path = tmp_path / "cache.json"
    entry = {"d": 1, "k": [2], "alpha": [], "beta": [1], "N": "1", "tilde": "2", "method": "recursion"}
    path.write_text(json.dumps({"version": 1, "entries": [entry]}))
    with pytest.raises(CacheIntegrityError):
        cache_load(path)


def test_cache_empty_and_missing(tmp_path):
    empty = tmp_path / "empty.json"
    empty.write_text("")
    assert cache_load(empty) == 0
    assert cache_load(tmp_path / "missing.json") == 0
    assert memo_snapshot() == {}


@pytest.mark.parametrize(
    "text",
    [
        "{not json",
        "[]",
        '{"version": 2, "entries": []}',
        '{"version": 1}',
        '{"version": 1, "entries": [{"d": 1}]}',
        '{"version": 1, "entries": [{"d": 1, "k": [2], "alpha": [], "beta": [1], "N": "1/0"}]}',
        '{"version": 1, "entries": [{"d": 2, "k": [4], "alpha": [], "beta": [2], "N": "1"}]}',
    ],
)
def test_cache_malformed(tmp_path, text):
    path = tmp_path / "bad.json"
    path.write_text(text)
    with pytest.raises(CacheFormatError):
        cache_load(path)


def test_enumeration_entries_do_not_seed_the_memo(tmp_path):
    path = tmp_path / "cache.json"
    entry = {"d": 1, "k": [2], "alpha": [], "beta": [1], "N": "1", "tilde": "1", "method": "enumeration"}
    path.write_text(json.dumps({"version": 1, "entries": [entry]}))
    assert cache_load(path) == 1
    assert memo_snapshot() == {}
