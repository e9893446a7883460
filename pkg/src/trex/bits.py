"""Bit strings, explicit finite distributions, variational distance and
min-entropy.

Bit order convention, used throughout the package: index 0 of a bit string
is the least significant bit of its integer rendering.  Text renderings put
index 0 leftmost, so ``BitString.from_str("10110").value == 13``.  Byte
serialisation is LSB-first within each byte (bit ``i`` lives in byte
``i // 8`` at position ``i % 8``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Iterator, Mapping, Union

Prob = Union[Fraction, float]

SUM_TOLERANCE = 1e-12


@dataclass(frozen=True, slots=True)
class BitString:
    """Immutable fixed-length bit string packed into an int.

    Parameters
    ----------
    value : int
        Integer rendering; bit ``i`` of the string is ``(value >> i) & 1``.
    length : int
        Number of bits.
    """

    value: int
    length: int

    def __post_init__(self) -> None:
        if self.length < 0:
            raise ValueError(f"negative length {self.length}")
        if self.value < 0 or self.value >> self.length:
            raise ValueError(f"value {self.value} does not fit in {self.length} bits")

    @classmethod
    def from_bits(cls, bits: Iterable[int]) -> BitString:
        value = 0
        length = 0
        for i, b in enumerate(bits):
            if b not in (0, 1):
                raise ValueError(f"bit {i} is {b!r}, expected 0 or 1")
            value |= b << i
            length = i + 1
        return cls(value, length)

    @classmethod
    def from_str(cls, text: str) -> BitString:
        """Parse ``"0110"``-style text, index 0 leftmost."""
        return cls.from_bits(int(c) for c in text.strip())

    @classmethod
    def zeros(cls, length: int) -> BitString:
        return cls(0, length)

    @classmethod
    def ones(cls, length: int) -> BitString:
        return cls((1 << length) - 1, length)

    @classmethod
    def random(cls, length: int, rng) -> BitString:
        """Uniform string drawn from a ``numpy.random.Generator``."""
        if length == 0:
            return cls(0, 0)
        raw = rng.bytes((length + 7) // 8)
        return cls(int.from_bytes(raw, "little") & ((1 << length) - 1), length)

    @classmethod
    def from_bytes(cls, data: bytes, length: int | None = None) -> BitString:
        if length is None:
            length = 8 * len(data)
        if length > 8 * len(data):
            raise ValueError(f"{len(data)} bytes cannot hold {length} bits")
        return cls(int.from_bytes(data, "little") & ((1 << length) - 1), length)

    def to_bytes(self) -> bytes:
        return self.value.to_bytes((self.length + 7) // 8, "little")

    @property
    def bits(self) -> tuple[int, ...]:
        return tuple((self.value >> i) & 1 for i in range(self.length))

    def weight(self) -> int:
        return bin(self.value).count("1")

    def concat(self, other: BitString) -> BitString:
        """``self`` followed by ``other`` (``other`` takes the high indices)."""
        return BitString(self.value | (other.value << self.length), self.length + other.length)

    def __len__(self) -> int:
        return self.length

    def __getitem__(self, i: int) -> int:
        if i < 0:
            i += self.length
        if not 0 <= i < self.length:
            raise IndexError(f"bit index {i} out of range for length {self.length}")
        return (self.value >> i) & 1

    def __iter__(self) -> Iterator[int]:
        return iter(self.bits)

    def __xor__(self, other: BitString) -> BitString:
        _check_same_length(self, other)
        return BitString(self.value ^ other.value, self.length)

    def __str__(self) -> str:
        return "".join(str(b) for b in self.bits)


def _check_same_length(a: BitString, b: BitString) -> None:
    if a.length != b.length:
        raise ValueError(f"length mismatch: {a.length} vs {b.length}")


def inner_product_mod2(a: BitString, b: BitString) -> int:
    """Return ``sum(a_i * b_i) mod 2``."""
    _check_same_length(a, b)
    return bin(a.value & b.value).count("1") & 1


class FiniteDist:
    """Distribution over equal-length bit strings with explicit weights.

    Weights are kept as given: ``Fraction`` weights stay exact, floats are
    checked to sum to one within ``SUM_TOLERANCE``.
    """

    __slots__ = ("_probs", "length")

    def __init__(self, probs: Mapping[BitString, Prob]):
        if not probs:
            raise ValueError("empty distribution")
        lengths = {a.length for a in probs}
        if len(lengths) != 1:
            raise ValueError(f"outcomes of different lengths: {sorted(lengths)}")
        total = sum(probs.values())
        for a, p in probs.items():
            if p < 0 or p > 1:
                raise ValueError(f"probability {p} of {a} outside [0, 1]")
        if isinstance(total, Fraction) or isinstance(total, int):
            if total != 1:
                raise ValueError(f"probabilities sum to {total}")
        elif abs(total - 1) > SUM_TOLERANCE:
            raise ValueError(f"probabilities sum to {total}")
        self._probs = {a: p for a, p in probs.items() if p != 0}
        (self.length,) = lengths

    @classmethod
    def uniform(cls, outcomes: Iterable[BitString]) -> FiniteDist:
        outcomes = list(outcomes)
        if len(set(outcomes)) != len(outcomes):
            raise ValueError("duplicate outcomes")
        w = Fraction(1, len(outcomes))
        return cls({a: w for a in outcomes})

    @classmethod
    def from_counts(cls, counts: Mapping[BitString, int]) -> FiniteDist:
        total = sum(counts.values())
        return cls({a: Fraction(c, total) for a, c in counts.items()})

    @classmethod
    def point(cls, outcome: BitString) -> FiniteDist:
        return cls({outcome: Fraction(1)})

    def __call__(self, outcome: BitString) -> Prob:
        return self._probs.get(outcome, 0)

    def support(self) -> list[BitString]:
        return list(self._probs)

    def items(self):
        return self._probs.items()

    def mass(self, subset: Iterable[BitString]) -> Prob:
        return sum((self(a) for a in subset), Fraction(0))

    def __repr__(self) -> str:
        return f"FiniteDist(length={self.length}, support={len(self._probs)})"


@dataclass(frozen=True)
class FlatSource:
    """Uniform distribution over a nonempty set of ``n``-bit strings."""

    support: frozenset[BitString]

    def __post_init__(self) -> None:
        if not self.support:
            raise ValueError("flat source needs a nonempty support")
        if len({a.length for a in self.support}) != 1:
            raise ValueError("support strings have different lengths")

    @classmethod
    def of(cls, strings: Iterable[BitString]) -> FlatSource:
        return cls(frozenset(strings))

    @classmethod
    def from_ints(cls, values: Iterable[int], n: int) -> FlatSource:
        return cls(frozenset(BitString(int(v), n) for v in values))

    @property
    def n(self) -> int:
        return next(iter(self.support)).length

    def __len__(self) -> int:
        return len(self.support)

    def values(self) -> list[int]:
        return sorted(a.value for a in self.support)

    def min_entropy(self) -> float:
        return math.log2(len(self.support))

    def to_dist(self) -> FiniteDist:
        return FiniteDist.uniform(self.support)


def stat_distance(d1: FiniteDist, d2: FiniteDist) -> Prob:
    """Variational distance ``(1/2) * sum_a |d1(a) - d2(a)|``."""
    if d1.length != d2.length:
        raise ValueError(f"outcome length mismatch: {d1.length} vs {d2.length}")
    keys = set(d1.support()) | set(d2.support())
    return sum((abs(d1(a) - d2(a)) for a in keys), Fraction(0)) / 2


def subset_distance(d1: FiniteDist, d2: FiniteDist) -> Prob:
    """``max_S d1(S) - d2(S)`` by enumerating every subset of the joint
    support.  Exponential; used as an independent check of
    :func:`stat_distance` on small supports."""
    keys = sorted(set(d1.support()) | set(d2.support()), key=lambda a: a.value)
    if len(keys) > 20:
        raise ValueError(f"joint support of {len(keys)} is too large to enumerate")
    best: Prob = Fraction(0)
    for size in range(len(keys) + 1):
        for subset in combinations(keys, size):
            best = max(best, d1.mass(subset) - d2.mass(subset))
    return best


def _log2(p: Prob) -> float:
    if isinstance(p, Fraction):
        return math.log2(p.numerator) - math.log2(p.denominator)
    return math.log2(p)


def min_entropy(d: FiniteDist) -> float:
    """``-log2(max_a d(a))``."""
    top = max(p for _, p in d.items())
    return -_log2(top) + 0.0


def flat_decompose_check(d: FiniteDist, k: float) -> bool:
    """True iff ``d`` has min-entropy at least ``k``.

    Such a ``d`` is a convex combination of flat sources with min-entropy at
    least ``k``, and distance to uniform is convex, so extractor checks only
    need to range over flat sources (see :mod:`trex.verify`).
    """
    return min_entropy(d) >= k
