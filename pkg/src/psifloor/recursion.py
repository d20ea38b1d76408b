"""Caporaso-Harris recursion for relative descendant invariants of the plane.

``invariant_N`` evaluates N_{d,k}(alpha, beta) and ``invariant_tilde`` the
marked variant; both are memoized on the canonical key. Every recursive call
strictly lowers ``|k|``, which bounds the depth.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from fractions import Fraction
from math import factorial, prod
from typing import Iterator

from .arith import IntSeq, linear_ext_multinomial, multinomial

__all__ = [
    "DimensionError",
    "InvariantKey",
    "Component",
    "CHTerm",
    "make_key",
    "p1_invariant",
    "enumerate_ch_terms",
    "invariant_N",
    "invariant_tilde",
    "convert",
    "memo_snapshot",
    "memo_merge",
    "clear_memo",
]


class DimensionError(ValueError):
    """A key violates ``I(alpha+beta) = d`` or the dimension condition."""


@dataclass(frozen=True)
class InvariantKey:
    d: int
    k: IntSeq
    alpha: IntSeq
    beta: IntSeq

    def check(self) -> None:
        if self.k.base != 0 or self.alpha.base != 1 or self.beta.base != 1:
            raise DimensionError("k must be base 0, alpha and beta base 1")
        if self.d < 1:
            raise DimensionError(f"degree must be at least 1, got {self.d}")
        if (self.alpha + self.beta).weight != self.d:
            raise DimensionError(
                f"I(alpha+beta) = {(self.alpha + self.beta).weight} != d = {self.d}"
            )
        lhs = (self.alpha + self.beta).weight + self.k.weight
        rhs = 3 * self.d - 1 + self.beta.size - self.k.size
        if lhs != rhs:
            raise DimensionError(
                f"I(alpha+beta+k) = {lhs} != 3d-1+|beta|-|k| = {rhs}"
            )

    def __str__(self) -> str:
        return f"N_{{{self.d},{self.k}}}({self.alpha},{self.beta})"


def make_key(d: int, k, alpha=(), beta=None) -> InvariantKey:
    """Build and check a key; ``beta`` defaults to ``(d)``, the absolute case."""
    k = k if isinstance(k, IntSeq) else IntSeq(tuple(k), 0)
    alpha = alpha if isinstance(alpha, IntSeq) else IntSeq(tuple(alpha), 1)
    if beta is None:
        beta = IntSeq((d,), 1)
    beta = beta if isinstance(beta, IntSeq) else IntSeq(tuple(beta), 1)
    key = InvariantKey(d, k, alpha, beta)
    key.check()
    return key


@dataclass(frozen=True)
class Component:
    alpha: IntSeq
    beta: IntSeq
    k: IntSeq
    d: int
    m: int
    fixed: bool  # glued through a fixed point (the first t' components)

    def subkey(self) -> InvariantKey:
        e = IntSeq.unit(self.m, 1)
        if self.fixed:
            return InvariantKey(self.d, self.k, self.alpha + e, self.beta)
        return InvariantKey(self.d, self.k, self.alpha, self.beta + e)


@dataclass(frozen=True)
class CHTerm:
    a: int
    components: tuple[Component, ...]
    alpha_rest: IntSeq
    beta_rest: IntSeq
    d_rest: int

    @property
    def t(self) -> int:
        return len(self.components)

    @property
    def t_prime(self) -> int:
        return sum(1 for c in self.components if c.fixed)


def p1_invariant(d_prime: int, c: int) -> Fraction:
    """One-point descendant of P^1 with ``c`` hyperplane insertions: d^c / d!^2."""
    if d_prime < 0 or c < 0:
        raise ValueError("p1_invariant needs non-negative arguments")
    f = factorial(d_prime)
    return Fraction(d_prime**c, f * f)


def _candidates(key: InvariantKey, k_rest: IntSeq) -> tuple[list, list]:
    fixed, free = [], []
    alphas = list(_subseqs(key.alpha))
    betas = list(_subseqs(key.beta))
    for ki in _subseqs(k_rest):
        if ki.size == 0:
            continue
        for ai in alphas:
            for bi in betas:
                load = (ai + bi).weight
                for is_fixed, num in (
                    (True, ki.weight + ki.size + 1 - bi.size),
                    (False, ki.weight + ki.size - bi.size),
                ):
                    if num <= 0 or num % 2:
                        continue
                    di = num // 2
                    mi = di - load
                    if mi <= 0 or di > key.d:
                        continue
                    comp = Component(ai, bi, ki, di, mi, is_fixed)
                    (fixed if is_fixed else free).append(comp)
    return fixed, free


def _subseqs(bound: IntSeq) -> Iterator[IntSeq]:
    from .arith import bounded_subsequences

    return bounded_subsequences(bound)


def enumerate_ch_terms(key: InvariantKey, a: int) -> Iterator[CHTerm]:
    """Ordered splittings of ``key`` with the point of Psi-power ``a`` moved to the line.

    Components glued through a fixed point come first. Every term is checked
    against the P^1 dimension condition ``a = 2d' - 2 + |beta'| + t'``.
    """
    if key.k[a] == 0:
        raise ValueError(f"k_{a} = 0; no point with Psi-power {a} to specialize")
    k_rest = key.k - IntSeq.unit(a, 0)
    fixed, free = _candidates(key, k_rest)
    comps: list[Component] = []

    def emit(alpha_left, beta_left, d_left):
        term = CHTerm(a, tuple(comps), alpha_left, beta_left, d_left)
        if a != 2 * d_left - 2 + beta_left.size + term.t_prime:
            raise AssertionError(f"P^1 dimension condition fails for {term}")
        return term

    def fits(c, k_left, alpha_left, beta_left, d_left):
        return c.d <= d_left and c.k <= k_left and c.alpha <= alpha_left and c.beta <= beta_left

    def rec(pool_fixed, k_left, alpha_left, beta_left, d_left):
        if k_left.size == 0:
            yield emit(alpha_left, beta_left, d_left)
            return
        pools = (fixed, free) if pool_fixed else (free,)
        for pool in pools:
            for c in pool:
                if not fits(c, k_left, alpha_left, beta_left, d_left):
                    continue
                comps.append(c)
                yield from rec(
                    pool_fixed and c.fixed,
                    k_left - c.k,
                    alpha_left - c.alpha,
                    beta_left - c.beta,
                    d_left - c.d,
                )
                comps.pop()

    yield from rec(True, k_rest, key.alpha, key.beta, key.d)


class _Memo:
    """Dict guarded by a lock for inserts; reads are plain lookups."""

    def __init__(self):
        self.table: dict = {}
        self.lock = threading.Lock()

    def get(self, key):
        return self.table.get(key)

    def put(self, key, value):
        with self.lock:
            old = self.table.setdefault(key, value)
        if old != value:
            raise AssertionError(f"memo conflict for {key}: {old} vs {value}")


_N_MEMO = _Memo()
_TILDE_MEMO = _Memo()


def _term_shape(key: InvariantKey, term: CHTerm) -> Fraction | None:
    """Factors shared by both recursions, or None when the P^1 factor vanishes."""
    t, tp = term.t, term.t_prime
    exponent = term.alpha_rest.size + t - tp
    if term.d_rest == 0 and exponent > 0:
        return None
    coef = Fraction(prod(c.m for c in term.components), factorial(tp) * factorial(t - tp))
    coef *= p1_invariant(term.d_rest, exponent)
    coef *= multinomial(key.alpha, [c.alpha for c in term.components])
    return coef


def _check_child(parent: InvariantKey, child: InvariantKey) -> None:
    child.check()
    if child.k.size >= parent.k.size:
        raise AssertionError(f"recursion does not shrink |k|: {parent} -> {child}")


def _N(key: InvariantKey, memo: _Memo | None) -> Fraction:
    if memo is not None:
        hit = memo.get(key)
        if hit is not None:
            return hit
    total = Fraction(0)
    for a, _ in key.k.items():
        for term in enumerate_ch_terms(key, a):
            coef = _term_shape(key, term)
            if coef is None:
                continue
            coef /= term.beta_rest.factorial_product
            coef *= linear_ext_multinomial(
                key.k.size - 1, [c.k.size for c in term.components]
            )
            for c in term.components:
                child = c.subkey()
                _check_child(key, child)
                if not c.fixed:
                    coef *= c.beta[c.m] + 1
                coef *= _N(child, memo)
                if not coef:
                    break
            total += coef
    if memo is not None:
        memo.put(key, total)
    return total


def _default_a(key: InvariantKey) -> int:
    return next(a for a, _ in key.k.items())


def _tilde(key: InvariantKey, a: int, memo: _Memo | None) -> Fraction:
    if memo is not None:
        hit = memo.get((key, a))
        if hit is not None:
            return hit
    total = Fraction(0)
    k_rest = key.k - IntSeq.unit(a, 0)
    for term in enumerate_ch_terms(key, a):
        coef = _term_shape(key, term)
        if coef is None:
            continue
        coef *= multinomial(key.beta, [c.beta for c in term.components])
        coef *= multinomial(k_rest, [c.k for c in term.components])
        for c in term.components:
            child = c.subkey()
            _check_child(key, child)
            coef *= _tilde(child, _default_a(child), memo)
            if not coef:
                break
        total += coef
    if memo is not None:
        memo.put((key, a), total)
    return total


def invariant_N(key: InvariantKey, memo: bool = True) -> Fraction:
    """N_{d,k}(alpha, beta), summing the recursion over every ``a`` with ``k_a > 0``."""
    key.check()
    return _N(key, _N_MEMO if memo else None)


def invariant_tilde(key: InvariantKey, a: int | None = None, memo: bool = True) -> Fraction:
    """The marked invariant, specializing a point of Psi-power ``a`` (any valid one)."""
    key.check()
    if a is None:
        a = _default_a(key)
    if key.k[a] == 0:
        raise ValueError(f"k_{a} = 0; cannot specialize a point with Psi-power {a}")
    return _tilde(key, a, _TILDE_MEMO if memo else None)


def convert(value: Fraction, k: IntSeq, beta: IntSeq, direction: str = "to_tilde") -> Fraction:
    """Switch between N and the marked invariant: tilde = beta! k! / |k|! * N."""
    factor = Fraction(beta.factorial_product * k.factorial_product, factorial(k.size))
    if direction == "to_tilde":
        return value * factor
    if direction == "to_N":
        return value / factor
    raise ValueError(f"unknown direction {direction!r}")


def memo_snapshot() -> dict[InvariantKey, Fraction]:
    with _N_MEMO.lock:
        return dict(_N_MEMO.table)


def memo_merge(entries: dict[InvariantKey, Fraction]) -> None:
    """Insert known values; a conflicting value raises ``AssertionError``."""
    for key, value in entries.items():
        _N_MEMO.put(key, value)


def clear_memo() -> None:
    with _N_MEMO.lock:
        _N_MEMO.table.clear()
    with _TILDE_MEMO.lock:
        _TILDE_MEMO.table.clear()
