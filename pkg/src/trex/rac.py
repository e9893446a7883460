"""Classical random-access-code experiments.

* majority amplification of a ``1/2 + delta`` decoder;
* the one-1-per-block family encoded by hash values (short encodings that
  still answer every bit with good probability);
* the high-weight family, where the empty encoding wins on average over
  positions but not in the worst case.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from trex.bits import BitString

HASH_RANGE = 10


def amplification_rounds(delta: float, eps: float) -> int:
    """``ceil(2 ln(1/eps) / delta^2)`` copies for error ``eps``."""
    if delta <= 0:
        raise ValueError("delta must be positive")
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0, 1)")
    return max(1, math.ceil(2 * math.log(1 / eps) / (delta * delta)))


def majority_success(T: int, p: float) -> float:
    """Exact probability that a majority of ``T`` independent answers,
    each right with probability ``p``, is right (ties broken by a coin)."""
    total = 0.0
    log_p = math.log(p) if p > 0 else -math.inf
    log_q = math.log1p(-p) if p < 1 else -math.inf
    for j in range(T + 1):
        if 2 * j < T:
            continue
        if p in (0.0, 1.0):
            term = 1.0 if (p == 1.0 and j == T) or (p == 0.0 and j == 0) else 0.0
        else:
            log_c = math.lgamma(T + 1) - math.lgamma(j + 1) - math.lgamma(T - j + 1)
            term = math.exp(log_c + j * log_p + (T - j) * log_q)
        total += term / 2 if 2 * j == T else term
    return min(1.0, total)


@dataclass(frozen=True)
class AmplifyResult:
    T: int
    measured_success: float
    exact_success: float
    slack: float
    trials: int

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def amplify(
    delta: float,
    eps: float,
    trials: int,
    rng: np.random.Generator,
    rounds: int | None = None,
) -> AmplifyResult:
    """Simulate majority voting over ``T`` independent ``1/2 + delta``
    answers.  ``rounds`` overrides the formula for ``T``."""
    T = rounds if rounds is not None else amplification_rounds(delta, eps)
    p = min(1.0, 0.5 + delta)
    right = rng.binomial(T, p, size=trials)
    ties = 2 * right == T
    coins = rng.integers(0, 2, size=trials)
    wins = (2 * right > T) | (ties & (coins == 1))
    slack = math.sqrt(math.log(2 / 0.01) / (2 * trials))
    return AmplifyResult(
        T=T,
        measured_success=float(wins.mean()),
        exact_success=majority_success(T, p),
        slack=slack,
        trials=trials,
    )


# --------------------------------------------------------------------------
# hash-value encoding of the one-1-per-block family


def next_prime(x: int) -> int:
    c = max(2, x)
    while any(c % d == 0 for d in range(2, math.isqrt(c) + 1)):
        c += 1
    return c


@dataclass(frozen=True)
class PairwiseHash:
    """``h(x) = ((a x + b) mod q) mod range`` with ``a, b`` uniform in
    ``[0, q)``."""

    a: int
    b: int
    q: int
    range: int

    def __call__(self, x: int) -> int:
        return ((self.a * x + self.b) % self.q) % self.range

    @classmethod
    def draw(cls, domain: int, range_: int, rng: np.random.Generator) -> PairwiseHash:
        q = next_prime(max(domain, range_))
        return cls(int(rng.integers(q)), int(rng.integers(q)), q, range_)

    @property
    def seed_bits(self) -> int:
        return 2 * math.ceil(math.log2(self.q))


@dataclass(frozen=True)
class RegevEncoding:
    h: PairwiseHash
    values: tuple[int, ...]
    n: int

    @property
    def block(self) -> int:
        return math.isqrt(self.n)

    @property
    def bit_length(self) -> int:
        return self.h.seed_bits + len(self.values) * math.ceil(math.log2(self.h.range))


def _block_side(n: int) -> int:
    side = math.isqrt(n)
    if side * side != n:
        raise ValueError(f"n={n} is not a perfect square")
    return side


def one_per_block(n: int, rng: np.random.Generator) -> BitString:
    side = _block_side(n)
    value = 0
    for j in range(side):
        value |= 1 << (j * side + int(rng.integers(side)))
    return BitString(value, n)


def regev_encode(
    f: BitString,
    n: int,
    hash_range: int = HASH_RANGE,
    rng: np.random.Generator | None = None,
    h: PairwiseHash | None = None,
) -> RegevEncoding:
    """Encode ``f`` (exactly one 1 in each block of ``sqrt(n)`` bits) by a
    hash function and the hash of each block's 1-position."""
    side = _block_side(n)
    if f.length != n:
        raise ValueError(f"string has {f.length} bits, expected {n}")
    ones = []
    for j in range(side):
        block = [i for i in range(side) if f[j * side + i]]
        if len(block) != 1:
            raise ValueError(f"block {j} has {len(block)} ones, expected exactly 1")
        ones.append(block[0])
    if h is None:
        rng = rng if rng is not None else np.random.default_rng()
        h = PairwiseHash.draw(side, hash_range, rng)
    return RegevEncoding(h=h, values=tuple(h(i) for i in ones), n=n)


def regev_decode(enc: RegevEncoding, query: int) -> int:
    """1 iff the queried position hashes like its block's stored 1."""
    if not 0 <= query < enc.n:
        raise IndexError(f"position {query} outside [0, {enc.n})")
    j, within = divmod(query, enc.block)
    return int(enc.h(within) == enc.values[j])


@dataclass(frozen=True)
class RegevResult:
    n: int
    queries: int
    success: float
    zero_position_error: float
    encoding_bits: int
    hash_range: int

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def regev_experiment(
    n: int, queries: int, rng: np.random.Generator, hash_range: int = HASH_RANGE
) -> RegevResult:
    """Fresh string, hash and uniform position for every query."""
    right = 0
    zero_queries = 0
    zero_errors = 0
    bits = 0
    for _ in range(queries):
        f = one_per_block(n, rng)
        enc = regev_encode(f, n, hash_range, rng)
        bits = enc.bit_length
        i = int(rng.integers(n))
        answer = regev_decode(enc, i)
        right += answer == f[i]
        if f[i] == 0:
            zero_queries += 1
            zero_errors += answer != 0
    return RegevResult(
        n=n,
        queries=queries,
        success=right / queries,
        zero_position_error=zero_errors / max(1, zero_queries),
        encoding_bits=bits,
        hash_range=hash_range,
    )


# --------------------------------------------------------------------------
# average case vs worst case


@dataclass(frozen=True)
class AvgCaseResult:
    n: int
    weight: int
    average_success: Fraction
    measured_success: float
    worst_case_success: Fraction
    trials: int

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "weight": self.weight,
            "average_success": str(self.average_success),
            "average_success_float": float(self.average_success),
            "measured_success": self.measured_success,
            "worst_case_success": str(self.worst_case_success),
            "trials": self.trials,
        }


def constant_one_success(f: BitString) -> tuple[Fraction, Fraction]:
    """(average over positions, worst position) success of the decoder that
    ignores its zero-length encoding and answers 1."""
    avg = Fraction(f.weight(), f.length)
    worst = Fraction(0) if f.weight() < f.length else Fraction(1)
    return avg, worst


def avgcase_counterexample(n: int, trials: int, rng: np.random.Generator) -> AvgCaseResult:
    """Weight ``ceil(2n/3)`` string against the constant-1 decoder."""
    if n < 3:
        raise ValueError("n must be at least 3")
    weight = math.ceil(2 * n / 3)
    positions = rng.permutation(n)[:weight]
    f = BitString(sum(1 << int(i) for i in positions), n)
    avg, worst = constant_one_success(f)
    queries = rng.integers(0, n, size=trials)
    measured = float(np.mean([f[int(i)] == 1 for i in queries])) if trials else float(avg)
    return AvgCaseResult(n, weight, avg, measured, worst, trials)
