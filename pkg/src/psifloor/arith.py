"""Exact arithmetic: finitely supported integer sequences and combinatorial primitives.

Sequences carry an explicit indexing base. Psi-power types ``k`` start at
index 0, tangency sequences ``alpha``/``beta`` start at index 1. Mixing the
two in arithmetic raises ``ValueError``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import factorial, prod
from typing import Iterable, Iterator, Sequence

__all__ = [
    "IntSeq",
    "kseq",
    "tseq",
    "seq_norm",
    "multinomial",
    "stirling2",
    "linear_ext_multinomial",
    "format_rational",
    "parse_rational",
    "bounded_subsequences",
]


@dataclass(frozen=True)
class IntSeq:
    """Finitely supported sequence of non-negative integers.

    ``entries[j]`` is the value at index ``base + j``. Trailing zeros are
    trimmed on construction, so equal sequences compare and hash equal.
    """

    entries: tuple[int, ...] = ()
    base: int = 0

    def __post_init__(self):
        if self.base not in (0, 1):
            raise ValueError(f"indexing base must be 0 or 1, got {self.base}")
        entries = tuple(int(x) for x in self.entries)
        if any(x < 0 for x in entries):
            raise ValueError(f"negative entry in sequence {entries}")
        n = len(entries)
        while n and entries[n - 1] == 0:
            n -= 1
        object.__setattr__(self, "entries", entries[:n])

    @classmethod
    def unit(cls, index: int, base: int = 0) -> "IntSeq":
        if index < base:
            raise ValueError(f"index {index} below base {base}")
        return cls((0,) * (index - base) + (1,), base)

    @classmethod
    def zero(cls, base: int = 0) -> "IntSeq":
        return cls((), base)

    @property
    def top(self) -> int:
        """Largest index with a possibly non-zero entry (``base - 1`` if empty)."""
        return self.base + len(self.entries) - 1

    def __getitem__(self, index: int) -> int:
        j = index - self.base
        if j < 0:
            raise IndexError(f"index {index} below base {self.base}")
        return self.entries[j] if j < len(self.entries) else 0

    def items(self) -> Iterator[tuple[int, int]]:
        """Yield ``(index, value)`` for the non-zero entries."""
        for j, x in enumerate(self.entries):
            if x:
                yield self.base + j, x

    def _check(self, other: "IntSeq") -> None:
        if not isinstance(other, IntSeq):
            raise TypeError(f"expected IntSeq, got {type(other).__name__}")
        if other.base != self.base:
            raise ValueError(
                f"cannot combine base-{self.base} and base-{other.base} sequences"
            )

    def __add__(self, other: "IntSeq") -> "IntSeq":
        self._check(other)
        n = max(len(self.entries), len(other.entries))
        a = self.entries + (0,) * (n - len(self.entries))
        b = other.entries + (0,) * (n - len(other.entries))
        return IntSeq(tuple(x + y for x, y in zip(a, b)), self.base)

    def __sub__(self, other: "IntSeq") -> "IntSeq":
        self._check(other)
        if not other <= self:
            raise ValueError(f"{other} is not <= {self}; difference undefined")
        n = len(self.entries)
        b = other.entries + (0,) * (n - len(other.entries))
        return IntSeq(tuple(x - y for x, y in zip(self.entries, b)), self.base)

    def __le__(self, other: "IntSeq") -> bool:
        self._check(other)
        if len(self.entries) > len(other.entries):
            return False
        return all(x <= y for x, y in zip(self.entries, other.entries))

    def __ge__(self, other: "IntSeq") -> bool:
        return other <= self

    def __bool__(self) -> bool:
        return bool(self.entries)

    # sequence calculus

    @property
    def size(self) -> int:
        """``|s|``: sum of the entries."""
        return sum(self.entries)

    @property
    def weight(self) -> int:
        """``I s``: sum of index times entry."""
        return sum((self.base + j) * x for j, x in enumerate(self.entries))

    @property
    def power_product(self) -> int:
        """``I^s``: product of index**entry, with 0**0 == 1."""
        return prod((self.base + j) ** x for j, x in enumerate(self.entries))

    @property
    def factorial_product(self) -> int:
        """``s!``: product of the factorials of the entries."""
        return prod(factorial(x) for x in self.entries)

    def to_text(self) -> str:
        return ",".join(str(x) for x in self.entries)

    @classmethod
    def parse(cls, text: str, base: int = 0) -> "IntSeq":
        text = text.strip()
        if text in ("", "()"):
            return cls((), base)
        text = text.strip("()[]")
        try:
            values = tuple(int(part) for part in text.split(","))
        except ValueError:
            raise ValueError(f"cannot parse sequence {text!r}") from None
        return cls(values, base)

    def __repr__(self) -> str:
        return f"IntSeq(({self.to_text()}), base={self.base})"

    def __str__(self) -> str:
        return f"({self.to_text()})"


def kseq(*entries: int) -> IntSeq:
    """Base-0 sequence, used for Psi-power types."""
    return IntSeq(entries, 0)


def tseq(*entries: int) -> IntSeq:
    """Base-1 sequence, used for tangency profiles alpha and beta."""
    return IntSeq(entries, 1)


def seq_norm(k: IntSeq) -> tuple[int, int, int, int]:
    """Return ``(|k|, Ik, I^k, k!)``."""
    return k.size, k.weight, k.power_product, k.factorial_product


def multinomial(whole: IntSeq, parts: Sequence[IntSeq]) -> int:
    """Entrywise multinomial ``whole! / (parts[0]! ... parts[-1]! remainder!)``.

    The remainder is ``whole - sum(parts)``; it must be non-negative.
    """
    total = IntSeq((), whole.base)
    for part in parts:
        total = total + part
    if not total <= whole:
        raise ValueError(f"parts sum {total} exceeds {whole}")
    remainder = whole - total
    denom = remainder.factorial_product
    for part in parts:
        denom *= part.factorial_product
    num = whole.factorial_product
    assert num % denom == 0
    return num // denom


@lru_cache(maxsize=None)
def stirling2(e: int, g: int) -> int:
    """Stirling number of the second kind S(e, g)."""
    if e < 0 or g < 0:
        raise ValueError("stirling2 requires non-negative arguments")
    if e == 0 or g == 0:
        return int(e == g)
    if g > e:
        return 0
    return g * stirling2(e - 1, g) + stirling2(e - 1, g - 1)


def linear_ext_multinomial(total: int, block_sizes: Sequence[int]) -> int:
    """Number of interleavings of chains of the given sizes: ``total! / prod(b!)``."""
    if any(b < 0 for b in block_sizes) or sum(block_sizes) != total:
        raise ValueError(f"block sizes {list(block_sizes)} do not sum to {total}")
    return factorial(total) // prod(factorial(b) for b in block_sizes)


def format_rational(x: Fraction | int) -> str:
    x = Fraction(x)
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


def parse_rational(text: str) -> Fraction:
    num, sep, den = text.strip().partition("/")
    try:
        if sep:
            if int(den) <= 0:
                raise ValueError
            return Fraction(int(num), int(den))
        return Fraction(int(num))
    except ValueError:
        raise ValueError(f"malformed rational {text!r}") from None


def bounded_subsequences(bound: IntSeq, weight: int | None = None) -> Iterator[IntSeq]:
    """Yield every ``s <= bound`` (optionally with ``I s == weight``), lexicographically."""
    base = bound.base
    entries = bound.entries
    n = len(entries)

    def rec(j: int, remaining: int | None, acc: list[int]) -> Iterable[IntSeq]:
        if j == n:
            if remaining is None or remaining == 0:
                yield IntSeq(tuple(acc), base)
            return
        index = base + j
        hi = entries[j]
        if remaining is not None and index > 0:
            hi = min(hi, remaining // index)
        for x in range(hi + 1):
            acc.append(x)
            rest = None if remaining is None else remaining - index * x
            yield from rec(j + 1, rest, acc)
            acc.pop()

    yield from rec(0, weight, [])
