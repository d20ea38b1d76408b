"""Top-level computations: floor-diagram sums, recursion wiring, cross-checks and caching."""

from __future__ import annotations

import json
import os
import threading
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator

from .arith import IntSeq, bounded_subsequences, format_rational, parse_rational
from .choices import EdgeChoice, choice_multiplicity, enumerate_choices
from .diagram import (
    PsiFloorDiagram,
    UnmarkableDiagramError,
    diagram_multiplicity,
    enumerate_diagrams,
    enumerate_diagrams_unchecked,
    relative_type,
)
from .marking import build_marking_poset, count_markings, iter_linear_extensions
from .recursion import (
    DimensionError,
    InvariantKey,
    convert,
    invariant_N,
    make_key,
    memo_merge,
    memo_snapshot,
)
from .relative import (
    count_relative_markings,
    enumerate_compatible_pairs,
    enumerate_relative_choices,
    relative_choice_multiplicity,
    relative_diagram_multiplicity,
)

__all__ = [
    "ComputationResult",
    "CrosscheckReport",
    "MarkingContribution",
    "CacheFormatError",
    "CacheIntegrityError",
    "n_floor_absolute",
    "n_floor_relative",
    "compute",
    "crosscheck",
    "trace_tilde",
    "cache_save",
    "cache_load",
    "clear_results",
    "admissible_keys",
]

CACHE_VERSION = 1


class CacheFormatError(ValueError):
    pass


class CacheIntegrityError(ValueError):
    pass


@dataclass(frozen=True)
class ComputationResult:
    key: InvariantKey
    value_N: Fraction
    value_tilde: Fraction
    method: str  # "enumeration", "recursion" or "both"
    diagram_count: int | None = None
    elapsed: float = 0.0

    def to_json(self) -> dict:
        return {
            "d": self.key.d,
            "k": list(self.key.k.entries),
            "alpha": list(self.key.alpha.entries),
            "beta": list(self.key.beta.entries),
            "N": format_rational(self.value_N),
            "tilde": format_rational(self.value_tilde),
            "method": self.method,
            "diagram_count": self.diagram_count,
            "elapsed": round(self.elapsed, 6),
        }


@dataclass(frozen=True)
class CrosscheckReport:
    key: InvariantKey
    floor: Fraction
    recursion: Fraction
    diagram_count: int

    @property
    def passed(self) -> bool:
        return self.floor == self.recursion

    def to_json(self) -> dict:
        return {
            "d": self.key.d,
            "k": list(self.key.k.entries),
            "alpha": list(self.key.alpha.entries),
            "beta": list(self.key.beta.entries),
            "floor": format_rational(self.floor),
            "recursion": format_rational(self.recursion),
            "pass": self.passed,
        }


# floor-diagram sums


def _absolute_term(D: PsiFloorDiagram) -> Fraction:
    mu = diagram_multiplicity(D)
    return mu * sum(
        (choice_multiplicity(D, C) * count_markings(D, C) for C in enumerate_choices(D)),
        Fraction(0),
    )


def _relative_term(args: tuple[PsiFloorDiagram, IntSeq, IntSeq]) -> Fraction:
    D, alpha, beta = args
    total = Fraction(0)
    for pair in enumerate_compatible_pairs(D, alpha, beta):
        inner = Fraction(0)
        for C in enumerate_relative_choices(D, pair):
            inner += relative_choice_multiplicity(D, pair, C) * count_relative_markings(D, pair, C)
        total += relative_diagram_multiplicity(D, pair) * inner
    return total


def _sum_terms(func, items: Iterable, parallelism: int) -> tuple[Fraction, int]:
    items = list(items)
    if parallelism > 1 and len(items) > 1:
        chunk = max(1, len(items) // (4 * parallelism))
        with ProcessPoolExecutor(max_workers=parallelism) as pool:
            parts = list(pool.map(func, items, chunksize=chunk))
    else:
        parts = [func(x) for x in items]
    return sum(parts, Fraction(0)), len(items)


def _absolute_sum(d: int, k: IntSeq, parallelism: int = 1) -> tuple[Fraction, int]:
    try:
        diagrams = enumerate_diagrams(d, k)
    except ValueError as exc:
        raise DimensionError(str(exc)) from None
    return _sum_terms(_absolute_term, diagrams, parallelism)


def n_floor_absolute(d: int, k: IntSeq, parallelism: int = 1) -> Fraction:
    """Weighted count of absolute Psi-floor diagrams of degree ``d`` and type ``k``."""
    return _absolute_sum(d, k, parallelism)[0]


def _relative_diagrams(key: InvariantKey) -> Iterator[PsiFloorDiagram]:
    for D in enumerate_diagrams_unchecked(key.d, key.k, relative=True):
        try:
            if relative_type(D, key.beta) != key.k:
                continue
        except UnmarkableDiagramError:
            continue
        yield D


def _relative_sum(key: InvariantKey, parallelism: int = 1) -> tuple[Fraction, int]:
    key.check()
    items = ((D, key.alpha, key.beta) for D in _relative_diagrams(key))
    return _sum_terms(_relative_term, items, parallelism)


def n_floor_relative(d: int, k, alpha=(), beta=None, parallelism: int = 1) -> Fraction:
    """Weighted count of relative Psi-floor diagrams with compatible pairs and choices."""
    return _relative_sum(make_key(d, k, alpha, beta), parallelism)[0]


def _types(total: int) -> Iterator[IntSeq]:
    """Every base-0 sequence k with ``Ik + |k| = total``."""

    def rec(i, rem, acc):
        if rem == 0:
            yield IntSeq(tuple(acc), 0)
            return
        if i + 1 > rem:
            return
        for x in range(rem // (i + 1) + 1):
            yield from rec(i + 1, rem - (i + 1) * x, acc + [x])

    yield from rec(0, total, [])


def admissible_keys(d: int) -> Iterator[InvariantKey]:
    """All keys of degree ``d``: every (alpha, beta) with ``I(alpha+beta) = d`` and matching k."""
    for w in range(d + 1):
        for alpha in bounded_subsequences(IntSeq((w,) * w, 1), w):
            for beta in bounded_subsequences(IntSeq((d - w,) * (d - w), 1), d - w):
                for k in _types(2 * d - 1 + beta.size):
                    yield InvariantKey(d, k, alpha, beta)


# results store shared with the cache


_RESULTS: dict[InvariantKey, tuple[Fraction, set[str]]] = {}
_RESULTS_LOCK = threading.Lock()


def _record(key: InvariantKey, value: Fraction, method: str) -> None:
    with _RESULTS_LOCK:
        if key in _RESULTS:
            old, methods = _RESULTS[key]
            if old != value:
                raise CacheIntegrityError(f"conflicting values for {key}: {old} vs {value}")
            methods.add(method)
        else:
            _RESULTS[key] = (value, {method})


def clear_results() -> None:
    with _RESULTS_LOCK:
        _RESULTS.clear()


def compute(key: InvariantKey, method: str = "recursion", parallelism: int = 1) -> ComputationResult:
    """Evaluate ``key`` by enumeration, recursion, or both (which must agree)."""
    key.check()
    if method not in ("enumeration", "recursion", "both"):
        raise ValueError(f"unknown method {method!r}")
    start = time.perf_counter()
    count = None
    if method in ("enumeration", "both"):
        value, count = _relative_sum(key, parallelism)
        _record(key, value, "enumeration")
    if method in ("recursion", "both"):
        rec = invariant_N(key)
        if method == "both" and rec != value:
            raise CacheIntegrityError(f"floor count {value} differs from recursion {rec} for {key}")
        value = rec
        _record(key, value, "recursion")
    elapsed = time.perf_counter() - start
    tilde = convert(value, key.k, key.beta)
    return ComputationResult(key, value, tilde, method, count, elapsed)


def crosscheck(key: InvariantKey, parallelism: int = 1) -> CrosscheckReport:
    floor, count = _relative_sum(key, parallelism)
    rec = invariant_N(key)
    return CrosscheckReport(key, floor, rec, count)


# trace mode


@dataclass(frozen=True)
class MarkingContribution:
    diagram: PsiFloorDiagram
    choice: EdgeChoice
    order: tuple[int, ...]
    value: Fraction

    def to_json(self) -> dict:
        return {
            "diagram": self.diagram.to_json(),
            "choice": self.choice.to_trace(),
            "order": list(self.order),
            "contribution": format_rational(self.value),
        }


def default_psi_order(k: IntSeq) -> tuple[int, ...]:
    """Psi-powers in non-increasing order, read along the diagram."""
    return tuple(sorted((a for a, c in k.items() for _ in range(c)), reverse=True))


def trace_tilde(
    d: int, k: IntSeq, psi_order: tuple[int, ...] | None = None
) -> tuple[Fraction, list[MarkingContribution]]:
    """Per-marking contributions to the marked count for one fixed order of Psi-powers.

    Every equivalence class of markings is visited once; it contributes
    ``mu(D) mu(C)`` when the Psi-powers of its vertices, read along the linear
    order (added vertices have Psi-power 0), equal ``psi_order``. The
    contributions sum to ``k!/|k|! N``.
    """
    if psi_order is None:
        psi_order = default_psi_order(k)
    psi_order = tuple(psi_order)
    if sorted(psi_order) != sorted(default_psi_order(k)):
        raise ValueError(f"order {psi_order} is not a rearrangement of the Psi-powers of {k}")
    out = []
    for D in enumerate_diagrams(d, k):
        mu = diagram_multiplicity(D)
        for C in enumerate_choices(D):
            P = build_marking_poset(D, C)
            mult = mu * choice_multiplicity(D, C)
            for ext in iter_linear_extensions(P):
                powers = tuple(D.a(x) if x < D.n else 0 for x in ext)
                if powers == psi_order:
                    out.append(MarkingContribution(D, C, ext, mult))
    total = sum((c.value for c in out), Fraction(0))
    return total, out


# persistence


def _key_to_json(key: InvariantKey) -> dict:
    return {
        "d": key.d,
        "k": list(key.k.entries),
        "alpha": list(key.alpha.entries),
        "beta": list(key.beta.entries),
    }


def cache_save(path: str | os.PathLike) -> int:
    """Write memoized recursion values and computed results; returns the entry count."""
    merged: dict[InvariantKey, tuple[Fraction, set[str]]] = {}
    for key, value in memo_snapshot().items():
        merged[key] = (value, {"recursion"})
    with _RESULTS_LOCK:
        for key, (value, methods) in _RESULTS.items():
            if key in merged and merged[key][0] != value:
                raise CacheIntegrityError(f"conflicting values for {key}")
            merged.setdefault(key, (value, set()))[1].update(methods)
    entries = []
    for key in sorted(merged, key=lambda x: (x.d, x.k.entries, x.alpha.entries, x.beta.entries)):
        value, methods = merged[key]
        method = "both" if len(methods) > 1 else next(iter(methods))
        entry = _key_to_json(key)
        entry["N"] = format_rational(value)
        entry["tilde"] = format_rational(convert(value, key.k, key.beta))
        entry["method"] = method
        entries.append(entry)
    tmp = f"{os.fspath(path)}.tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        json.dump({"version": CACHE_VERSION, "entries": entries}, fh, indent=1)
    os.replace(tmp, path)
    return len(entries)


def cache_load(path: str | os.PathLike) -> int:
    """Merge a cache file into memory; returns the number of entries read.

    A missing or empty file is a no-op. A value that disagrees with one
    already known raises ``CacheIntegrityError``.
    """
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except FileNotFoundError:
        return 0
    if not text.strip():
        return 0
    try:
        data = json.loads(text)
        if data.get("version") != CACHE_VERSION:
            raise CacheFormatError(f"unsupported cache version {data.get('version')!r}")
        parsed = []
        for entry in data["entries"]:
            key = InvariantKey(
                int(entry["d"]),
                IntSeq(tuple(entry["k"]), 0),
                IntSeq(tuple(entry["alpha"]), 1),
                IntSeq(tuple(entry["beta"]), 1),
            )
            key.check()
            value = parse_rational(entry["N"])
            if "tilde" in entry and parse_rational(entry["tilde"]) != convert(value, key.k, key.beta):
                raise CacheIntegrityError(f"N and tilde disagree for {key}")
            parsed.append((key, value, entry.get("method", "recursion")))
    except CacheIntegrityError:
        raise
    except (KeyError, TypeError, AttributeError, ValueError) as exc:
        # ValueError covers bad JSON, bad rationals and keys failing the dimension check
        raise CacheFormatError(f"malformed cache file {os.fspath(path)}: {exc}") from None
    known = memo_snapshot()
    for key, value, _ in parsed:
        if key in known and known[key] != value:
            raise CacheIntegrityError(f"cache value {value} for {key} conflicts with {known[key]}")
        with _RESULTS_LOCK:
            if key in _RESULTS and _RESULTS[key][0] != value:
                raise CacheIntegrityError(
                    f"cache value {value} for {key} conflicts with {_RESULTS[key][0]}"
                )
    for key, value, method in parsed:
        if method in ("recursion", "both"):
            memo_merge({key: value})
        for m in ("enumeration", "recursion") if method == "both" else (method,):
            _record(key, value, m)
    return len(parsed)

