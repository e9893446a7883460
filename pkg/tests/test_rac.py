import math
from fractions import Fraction

import pytest

from trex.bits import BitString
from trex.rac import (
    PairwiseHash,
    amplification_rounds,
    amplify,
    avgcase_counterexample,
    constant_one_success,
    majority_success,
    next_prime,
    one_per_block,
    regev_decode,
    regev_encode,
    regev_experiment,
)


def binomial_majority(T, p):
    """Exact rational tail with the tie split evenly."""
    p = Fraction(p).limit_denominator(10**6)
    total = Fraction(0)
    for j in range(T + 1):
        term = math.comb(T, j) * p**j * (1 - p) ** (T - j)
        if 2 * j > T:
            total += term
        elif 2 * j == T:
            total += term / 2
    return total


@pytest.mark.parametrize("T,p", [(1, 0.6), (2, 0.6), (7, 0.55), (30, 0.6), (461, 0.6)])
def test_majority_success_matches_rational_tail(T, p):
    assert majority_success(T, p) == pytest.approx(float(binomial_majority(T, p)), abs=1e-12)


def test_amplification_rounds():
    assert amplification_rounds(0.1, 0.01) == math.ceil(2 * math.log(100) / 0.01)
    with pytest.raises(ValueError):
        amplification_rounds(0.0, 0.1)
    with pytest.raises(ValueError):
        amplification_rounds(0.1, 1.0)


def test_amplify_examples(rng):
    perfect = amplify(0.5, 0.1, 500, rng)
    assert perfect.measured_success == 1.0 and perfect.exact_success == 1.0
    res = amplify(0.1, 0.01, 20_000, rng)
    assert res.T == amplification_rounds(0.1, 0.01)
    assert float(binomial_majority(res.T, 0.6)) >= 0.99
    assert abs(res.measured_success - res.exact_success) <= res.slack
    single = amplify(0.1, 0.5, 20_000, rng, rounds=1)
    assert abs(single.measured_success - 0.6) <= single.slack


def test_next_prime_and_hash():
    assert [next_prime(v) for v in (1, 2, 8, 10, 14)] == [2, 2, 11, 11, 17]
    h = PairwiseHash(3, 4, 11, 10)
    assert [h(x) for x in range(4)] == [4, 7, 0, 2]


def test_pairwise_independence_of_family():
    # over all (a, b), the pair (h(x1), h(x2)) before the final mod is uniform on q^2
    q = 11
    counts = {}
    for a in range(q):
        for b in range(q):
            key = ((a * 2 + b) % q, (a * 5 + b) % q)
            counts[key] = counts.get(key, 0) + 1
    assert len(counts) == q * q and set(counts.values()) == {1}


def test_regev_examples(rng):
    f = BitString.from_str("1001")  # blocks "10" and "01"
    enc = regev_encode(f, 4, rng=rng)
    assert len(enc.values) == 2
    for i in range(4):
        if f[i]:
            assert regev_decode(enc, i) == 1
    first = BitString(sum(1 << (j * 8) for j in range(8)), 64)
    enc = regev_encode(first, 64, rng=rng)
    assert all(regev_decode(enc, j * 8) == 1 for j in range(8))


def test_regev_collision_answers_one():
    # sqrt(n) = 16 > range = 10: some 0-position collides with the stored 1
    f = BitString(sum(1 << (j * 16) for j in range(16)), 256)
    h = PairwiseHash(1, 0, 17, 10)
    enc = regev_encode(f, 256, h=h)
    assert regev_decode(enc, 10) == 1 and f[10] == 0


def test_regev_rejects_malformed():
    with pytest.raises(ValueError):
        regev_encode(BitString.from_str("1100"), 4)
    with pytest.raises(ValueError):
        regev_encode(BitString.zeros(5), 5)
    enc = regev_encode(BitString.from_str("1010"), 4, h=PairwiseHash(1, 0, 2, 10))
    with pytest.raises(IndexError):
        regev_decode(enc, 4)


def test_regev_rates(rng):
    res = regev_experiment(64, 10_000, rng)
    assert res.success >= 2 / 3
    # false positives on 0-positions come only from hash collisions
    assert res.zero_position_error < 0.2


def test_regev_length_grows_like_sqrt_n(rng):
    lengths = [regev_encode(one_per_block(n, rng), n, rng=rng).bit_length
               for n in (16, 64, 256, 1024)]
    side = [4, 8, 16, 32]
    per_block = [(L - 2 * math.ceil(math.log2(next_prime(max(s, 10))))) / s
                 for L, s in zip(lengths, side)]
    assert per_block == [math.ceil(math.log2(10))] * 4


def test_avgcase(rng):
    assert constant_one_success(BitString.ones(9)) == (1, 1)
    f = BitString.from_str("110110")
    assert constant_one_success(f) == (Fraction(2, 3), 0)
    res = avgcase_counterexample(30, 5000, rng)
    assert res.weight == 20
    assert res.average_success == Fraction(2, 3)
    assert res.worst_case_success == 0
    res = avgcase_counterexample(31, 0, rng)
    assert res.average_success == Fraction(21, 31) >= Fraction(2, 3)
    with pytest.raises(ValueError):
        avgcase_counterexample(2, 10, rng)
