"""Arithmetic in GF(2^s), 1 <= s <= 16.

Elements are ints in ``[0, 2^s)``; bit ``i`` is the coefficient of
``x^i``.  Each degree uses the lexicographically smallest irreducible
polynomial of that degree (smallest integer encoding), so codewords are
reproducible across implementations.  The table is printed by
``trex field-table``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

MAX_DEGREE = 16


def poly_degree(p: int) -> int:
    return p.bit_length() - 1


def poly_mod(a: int, m: int) -> int:
    dm = poly_degree(m)
    while a and poly_degree(a) >= dm:
        a ^= m << (poly_degree(a) - dm)
    return a


def is_irreducible(p: int) -> bool:
    """Exhaustive trial division by every polynomial of degree 1..deg/2."""
    deg = poly_degree(p)
    if deg < 1:
        return False
    for divisor in range(2, 1 << (deg // 2 + 1)):
        if poly_mod(p, divisor) == 0:
            return False
    return True


@lru_cache(maxsize=None)
def default_modulus(s: int) -> int:
    if not 1 <= s <= MAX_DEGREE:
        raise ValueError(f"extension degree {s} outside [1, {MAX_DEGREE}]")
    for p in range(1 << s, 1 << (s + 1)):
        if is_irreducible(p):
            return p
    raise AssertionError("unreachable: irreducibles exist in every degree")


def modulus_table(max_s: int = MAX_DEGREE) -> list[tuple[int, int]]:
    return [(s, default_modulus(s)) for s in range(1, max_s + 1)]


def clmul_reduce(a: int, b: int, modulus: int, s: int) -> int:
    """Shift-and-XOR multiplication with interleaved reduction."""
    top = 1 << s
    result = 0
    while b:
        if b & 1:
            result ^= a
        b >>= 1
        a <<= 1
        if a & top:
            a ^= modulus
    return result


class FieldCtx:
    """The field GF(2^s) for a fixed irreducible modulus.

    Multiplication goes through log/antilog tables built once per context;
    :meth:`mul_slow` keeps the plain shift-and-XOR definition.
    """

    def __init__(self, s: int, modulus: int | None = None):
        if not 1 <= s <= MAX_DEGREE:
            raise ValueError(f"extension degree {s} outside [1, {MAX_DEGREE}]")
        if modulus is None:
            modulus = default_modulus(s)
        if poly_degree(modulus) != s:
            raise ValueError(f"modulus {modulus:#b} does not have degree {s}")
        if not is_irreducible(modulus):
            raise ValueError(f"modulus {modulus:#b} is reducible")
        self.s = s
        self.modulus = modulus
        self.order = 1 << s
        self._build_tables()

    def _build_tables(self) -> None:
        q = self.order
        for g in range(2 if q > 2 else 1, q):
            exp = np.zeros(2 * q, dtype=np.int64)
            x = 1
            for i in range(q - 1):
                exp[i] = x
                x = clmul_reduce(x, g, self.modulus, self.s)
                if x == 1 and i < q - 2:
                    break
            else:
                break
        else:
            raise AssertionError("no generator found")
        exp[q - 1 : 2 * (q - 1)] = exp[: q - 1]
        log = np.zeros(q, dtype=np.int64)
        log[exp[: q - 1]] = np.arange(q - 1)
        self.generator = g
        self.exp = exp
        self.log = log
        self._exp_list = exp.tolist()
        self._log_list = log.tolist()

    def __repr__(self) -> str:
        return f"FieldCtx(s={self.s}, modulus={self.modulus:#b})"

    def __eq__(self, other: object) -> bool:
        return isinstance(other, FieldCtx) and (self.s, self.modulus) == (other.s, other.modulus)

    def __hash__(self) -> int:
        return hash((self.s, self.modulus))

    def __call__(self, value: int) -> FieldElement:
        return FieldElement(self, value)

    def mul(self, a: int, b: int) -> int:
        if a == 0 or b == 0:
            return 0
        return self._exp_list[self._log_list[a] + self._log_list[b]]

    def mul_slow(self, a: int, b: int) -> int:
        return clmul_reduce(a, b, self.modulus, self.s)

    def inv(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("0 has no inverse")
        return self._exp_list[(self.order - 1 - self._log_list[a]) % (self.order - 1)]

    def pow(self, a: int, e: int) -> int:
        if e == 0:
            return 1
        if a == 0:
            return 0
        return self._exp_list[(self._log_list[a] * e) % (self.order - 1)]

    def mul_array(self, a: np.ndarray, b) -> np.ndarray:
        """Elementwise product of int arrays (broadcasting)."""
        a = np.asarray(a, dtype=np.int64)
        b = np.asarray(b, dtype=np.int64)
        out = self.exp[self.log[a] + self.log[b]]
        return np.where((a == 0) | (b == 0), 0, out)

    def lagrange_weights(self, xs: Sequence[int], at: int) -> list[int]:
        """Weights ``w_a`` with ``p(at) = sum_a w_a * p(xs[a])`` for every
        polynomial ``p`` of degree below ``len(xs)``."""
        if len(set(xs)) != len(xs):
            raise ValueError("duplicate interpolation nodes")
        weights = []
        for a, xa in enumerate(xs):
            num = 1
            den = 1
            for b, xb in enumerate(xs):
                if b != a:
                    num = self.mul(num, at ^ xb)
                    den = self.mul(den, xa ^ xb)
            weights.append(self.mul(num, self.inv(den)))
        return weights


@lru_cache(maxsize=None)
def field(s: int) -> FieldCtx:
    """Shared context for GF(2^s) with the default modulus."""
    return FieldCtx(s)


@dataclass(frozen=True, slots=True)
class FieldElement:
    ctx: FieldCtx
    value: int

    def __post_init__(self) -> None:
        if not 0 <= self.value < self.ctx.order:
            raise ValueError(f"{self.value} is not an element of GF(2^{self.ctx.s})")

    def _check(self, other: FieldElement) -> None:
        if self.ctx != other.ctx:
            raise ValueError(f"field mismatch: {self.ctx} vs {other.ctx}")

    def __add__(self, other: FieldElement) -> FieldElement:
        self._check(other)
        return FieldElement(self.ctx, self.value ^ other.value)

    __sub__ = __add__

    def __mul__(self, other: FieldElement) -> FieldElement:
        self._check(other)
        return FieldElement(self.ctx, self.ctx.mul(self.value, other.value))

    def __truediv__(self, other: FieldElement) -> FieldElement:
        return self * other.inverse()

    def __pow__(self, e: int) -> FieldElement:
        if e < 0:
            return self.inverse() ** (-e)
        return FieldElement(self.ctx, self.ctx.pow(self.value, e))

    def inverse(self) -> FieldElement:
        return FieldElement(self.ctx, self.ctx.inv(self.value))

    def __bool__(self) -> bool:
        return self.value != 0

    def __repr__(self) -> str:
        return f"GF(2^{self.ctx.s})({self.value:#0{self.ctx.s + 2}b})"


def fe_add(a: FieldElement, b: FieldElement) -> FieldElement:
    return a + b


def fe_mul(a: FieldElement, b: FieldElement) -> FieldElement:
    return a * b


def fe_inv(a: FieldElement) -> FieldElement:
    return a.inverse()


def lagrange_interp_eval(
    points: Sequence[tuple[FieldElement, FieldElement]], at: FieldElement
) -> FieldElement:
    """Value at ``at`` of the unique polynomial of degree ``< len(points)``
    through ``points``."""
    if not points:
        raise ValueError("need at least one point")
    ctx = at.ctx
    for x, y in points:
        at._check(x)
        at._check(y)
    xs = [x.value for x, _ in points]
    weights = ctx.lagrange_weights(xs, at.value)
    acc = 0
    for w, (_, y) in zip(weights, points):
        acc ^= ctx.mul(w, y.value)
    return FieldElement(ctx, acc)
