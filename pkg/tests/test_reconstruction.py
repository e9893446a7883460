import math

import numpy as np
import pytest

from trex.bits import BitString
from trex.code import CodeParams, codeword_array, hadamard_rows
from trex.reconstruction import (
    Distinguisher,
    Hadamard,
    ProbOracle,
    ReconstructionBudget,
    ReconstructionFailure,
    avg_case_reconstruct,
    brute_list_decode,
    estimate_advantage,
    exact_match_distinguisher,
    gl_decode,
    gl_parameters,
    hoeffding_halfwidth,
    seed_only_distinguisher,
    worst_case_reconstruct,
)
from trex.trevisan import extract, toy_params

TOY = toy_params()
SMALL = toy_params(4, m=1, eps=0.5, d=1)


def had_word(x, s):
    return hadamard_rows(np.array([x]), s)[0]


class TestOracles:
    def test_counters_and_range(self, rng):
        O = ProbOracle.from_word(np.array([0, 1, 1, 0]), 0.0, rng)
        assert [O(j) for j in range(4)] == [0, 1, 1, 0]
        assert O.queries == 4
        with pytest.raises(IndexError):
            O(4)
        T = seed_only_distinguisher()
        T(BitString(1, 3), BitString(0, 1))
        T(BitString(0, 3), BitString(0, 1))
        assert T.queries == 2

    def test_noise_rate(self, rng):
        word = np.zeros(64, dtype=np.uint8)
        O = ProbOracle.from_word(word, 0.2, rng)
        flips = sum(O(j % 64) for j in range(20_000))
        assert abs(flips / 20_000 - 0.2) < hoeffding_halfwidth(20_000)


class TestAdvantage:
    def test_exact_match_exact_mode(self):
        f = BitString(0x1234, 16)
        est = estimate_advantage(exact_match_distinguisher(f, TOY), f, TOY, exact=True)
        # Pr[accept real] = 1, Pr[accept uniform] = 2^-m
        assert est.exact and est.value == 0.75 and est.low == est.high

    def test_monte_carlo_interval_covers_exact(self, rng):
        f = BitString(0x0F0F, 16)
        est = estimate_advantage(exact_match_distinguisher(f, TOY), f, TOY, 4000, rng)
        assert est.low <= 0.75 <= est.high

    def test_seed_only_has_no_advantage(self, rng):
        f = BitString(7, 16)
        T = seed_only_distinguisher()
        assert estimate_advantage(T, f, TOY, exact=True).value == 0
        est = estimate_advantage(T, f, TOY, 2000, rng)
        assert est.low <= 0.0 <= est.high + 1e-12

    def test_trials_must_be_positive(self):
        with pytest.raises(ValueError):
            estimate_advantage(seed_only_distinguisher(), BitString(0, 16), TOY, 0)


class TestAverageCase:
    def test_exact_match_meets_target_with_one_query_per_position(self, rng):
        f = BitString.random(16, rng)
        T = exact_match_distinguisher(f, TOY)
        res = avg_case_reconstruct(T, f, TOY, rng=rng)
        assert res.success >= 0.5 + TOY.eps / (2 * TOY.m) - res.slack
        assert res.distinguisher_queries == res.attempts * res.positions_evaluated
        before = T.queries
        word = codeword_array(f, TOY.code)
        answers = [res.predictor(j) for j in range(TOY.code.nbar)]
        assert T.queries - before == TOY.code.nbar
        measured = np.mean(np.array(answers) == word)
        assert measured == pytest.approx(res.success)
        assert res.advice.bits >= 1

    def test_ignoring_z_fails(self, rng):
        with pytest.raises(ReconstructionFailure) as exc:
            avg_case_reconstruct(seed_only_distinguisher(), BitString(5, 16), TOY, 16, rng)
        assert exc.value.report["best_success"] < exc.value.report["target"]

    def test_success_never_below_half(self, rng):
        # a noisy distinguisher: exact match answered through a 0.3 flip
        f = BitString.random(16, rng)
        noisy = Distinguisher(
            lambda y, z, g: int(extract(f, y, TOY) == z) ^ int(g.random() < 0.3),
            rng,
            deterministic=False,
        )
        try:
            res = avg_case_reconstruct(noisy, f, TOY, 8, rng)
        except ReconstructionFailure:
            return
        assert res.success >= 0.5 - res.slack


class TestGoldreichLevin:
    S = 8

    def test_parameters(self):
        k, reps = gl_parameters(8, 0.25, 0.99)
        assert 2**k - 1 >= 8 / 0.0625 and reps == 4

    def test_exact_codeword(self, rng):
        hits = 0
        for _ in range(100):
            x = int(rng.integers(1 << self.S))
            O = ProbOracle.from_word(had_word(x, self.S), 0.0, rng)
            found = gl_decode(O, 0.25, 0.99, rng)
            hits += x in found
            assert len(found) <= 4 / 0.25**2
        assert hits >= 99

    def test_uniform_oracle(self, rng):
        seen = {}
        for _ in range(40):
            found = gl_decode(ProbOracle.uniform(1 << self.S, rng), 0.25, 0.99, rng)
            assert len(found) <= 64
            for x in found:
                seen[x] = seen.get(x, 0) + 1
        assert max(seen.values(), default=0) < 20

    def test_rejects_bad_delta(self, rng):
        with pytest.raises(ValueError):
            gl_decode(ProbOracle.uniform(16, rng), 0.0)


class TestBruteListDecode:
    def test_hadamard_examples(self):
        code = Hadamard(3)
        x = 5
        w = had_word(x, 3).copy()
        w[2] ^= 1
        assert brute_list_decode(w, code, 0.75) == [BitString(x, 3)]
        assert brute_list_decode(np.zeros(8, dtype=np.uint8), code, 0.6) == [BitString(0, 3)]
        assert len(brute_list_decode(np.zeros(8, dtype=np.uint8), code, 0.0)) == 8

    def test_matches_naive_agreement(self, rng):
        code = CodeParams(n=4, delta=0.25, s=3, d=1, h=4, c_field=0.0)
        words = [codeword_array(BitString(v, 4), code) for v in range(16)]
        for _ in range(10):
            w = rng.integers(0, 2, size=code.nbar).astype(np.uint8)
            for p in (0.5, 0.55, 0.6):
                want = [v for v in range(16) if np.mean(words[v] == w) >= p]
                assert [b.value for b in brute_list_decode(w, code, p)] == want

    def test_contains_true_message(self, rng):
        code = CodeParams(n=4, delta=0.25, s=3, d=1, h=4, c_field=0.0)
        for v in range(16):
            got = brute_list_decode(codeword_array(BitString(v, 4), code), code, 1.0)
            assert BitString(v, 4) in got

    def test_oracle_input_and_limits(self, rng):
        code = Hadamard(4)
        O = ProbOracle.from_word(had_word(9, 4), 0.1, rng)
        assert BitString(9, 4) in brute_list_decode(O, code, 0.7, samples_per_position=50)
        with pytest.raises(ValueError):
            brute_list_decode(np.zeros(2**21, dtype=np.uint8), Hadamard(21), 0.5)


class TestWorstCase:
    def test_recovers_with_exact_match(self, rng):
        for _ in range(3):
            f = BitString.random(16, rng)
            rep = worst_case_reconstruct(exact_match_distinguisher(f, TOY), f, TOY, rng=rng)
            assert rep.success and rep.recovered == f
            assert rep.advice_bits >= math.log2(max(1, rep.list_size))
            assert rep.total_queries <= rep.queries_per_decode * rep.positions_decoded

    def test_small_instance(self, rng):
        f = BitString(0b0110, 4)
        rep = worst_case_reconstruct(exact_match_distinguisher(f, SMALL), f, SMALL, rng=rng)
        assert rep.success

    def test_ignoring_z_fails(self, rng):
        f = BitString(77, 16)
        rep = worst_case_reconstruct(seed_only_distinguisher(), f, TOY,
                                     ReconstructionBudget(search=8), rng)
        assert not rep.success and rep.recovered is None and rep.reason
