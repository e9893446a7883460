"""Executable reconstruction game for the NW/Trevisan generator.

A distinguisher that tells extractor output from uniform is turned into a
next-bit predictor for the codeword (one distinguisher query per codeword
position, plus a short advice string found by search).  The predictor is
then treated as a probabilistic oracle and decoded: Goldreich-Levin on each
Hadamard block, exhaustive enumeration standing in for the outer
Reed-Muller decoder.  Everything is desk scale; the harness knows the
source ``f`` and uses it to locate advice and to pick the list index.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from trex.bits import BitString
from trex.code import CodeParams, all_message_values, hadamard_rows, parity_table
from trex.trevisan import ExtractorParams, _cached_codeword, extract

CONFIDENCE = 0.99


def hoeffding_halfwidth(samples: int, confidence: float = CONFIDENCE) -> float:
    """Two-sided Hoeffding radius for the mean of ``samples`` [0,1] draws."""
    if samples <= 0:
        return 1.0
    return math.sqrt(math.log(2 / (1 - confidence)) / (2 * samples))


class _Counter:
    def __init__(self) -> None:
        self._lock = threading.Lock()
        self.value = 0

    def bump(self) -> None:
        with self._lock:
            self.value += 1


class Distinguisher:
    """Randomised test ``(y, z) -> {0,1}`` with a query counter.

    ``fn(y, z, rng)`` receives a generator it may draw fresh coins from.
    Set ``deterministic`` when ``fn`` ignores ``rng``; exact sweeps then
    need no sampling slack.
    """

    def __init__(
        self,
        fn: Callable[[BitString, BitString, np.random.Generator], int],
        rng: np.random.Generator | None = None,
        deterministic: bool = False,
        name: str = "distinguisher",
    ):
        self._fn = fn
        self._rng = rng if rng is not None else np.random.default_rng()
        self._counter = _Counter()
        self.deterministic = deterministic
        self.name = name

    @property
    def queries(self) -> int:
        return self._counter.value

    def __call__(self, y: BitString, z: BitString) -> int:
        self._counter.bump()
        return int(self._fn(y, z, self._rng)) & 1


class ProbOracle:
    """Randomised answer source ``j -> {0,1}`` over ``[0, size)``."""

    def __init__(
        self,
        fn: Callable[[int, np.random.Generator], int],
        size: int,
        rng: np.random.Generator | None = None,
        deterministic: bool = False,
    ):
        self._fn = fn
        self.size = size
        self._rng = rng if rng is not None else np.random.default_rng()
        self._counter = _Counter()
        self.deterministic = deterministic

    @classmethod
    def from_word(cls, word, flip_prob: float = 0.0, rng=None) -> ProbOracle:
        """Oracle answering ``word[j]``, flipped independently with
        probability ``flip_prob`` on every query."""
        arr = np.asarray(word.bits if isinstance(word, BitString) else word, dtype=np.uint8)
        if flip_prob == 0:
            return cls(lambda j, _rng: int(arr[j]), arr.size, rng, deterministic=True)
        return cls(
            lambda j, g: int(arr[j]) ^ int(g.random() < flip_prob), arr.size, rng
        )

    @classmethod
    def uniform(cls, size: int, rng=None) -> ProbOracle:
        return cls(lambda j, g: int(g.integers(2)), size, rng)

    @property
    def queries(self) -> int:
        return self._counter.value

    def __call__(self, j: int) -> int:
        if not 0 <= j < self.size:
            raise IndexError(f"oracle position {j} outside [0, {self.size})")
        self._counter.bump()
        return int(self._fn(j, self._rng)) & 1


def exact_match_distinguisher(
    f: BitString, p: ExtractorParams, rng: np.random.Generator | None = None
) -> Distinguisher:
    """Accepts exactly when ``z`` is the extractor output on ``y``."""
    return Distinguisher(
        lambda y, z, _rng: int(extract(f, y, p) == z),
        rng,
        deterministic=True,
        name="exact-match",
    )


def seed_only_distinguisher(rng: np.random.Generator | None = None) -> Distinguisher:
    """Ignores ``z``: answers the first seed bit."""
    return Distinguisher(lambda y, z, _rng: y[0], rng, deterministic=True, name="seed-only")


# --------------------------------------------------------------------------
# advantage estimation


@dataclass(frozen=True)
class AdvantageEstimate:
    value: float
    low: float
    high: float
    p_real: float
    p_uniform: float
    trials: int
    exact: bool

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def estimate_advantage(
    T: Distinguisher,
    f: BitString,
    p: ExtractorParams,
    trials: int = 1000,
    rng: np.random.Generator | None = None,
    exact: bool = False,
) -> AdvantageEstimate:
    """``|Pr[T(y, E(f,y)) = 1] - Pr[T(y, u) = 1]|`` with a 99% Hoeffding
    interval.  ``exact`` enumerates every seed and every ``u``; it is exact
    for deterministic ``T``."""
    if trials < 1:
        raise ValueError("need at least one trial")
    if exact:
        if (1 << (p.t + p.m)) > 1 << 22:
            raise ValueError(f"exact mode needs 2^{p.t + p.m} queries")
        real = 0
        unif = 0
        for yv in range(1 << p.t):
            y = BitString(yv, p.t)
            real += T(y, extract(f, y, p))
            for u in range(1 << p.m):
                unif += T(y, BitString(u, p.m))
        pr = real / (1 << p.t)
        pu = unif / (1 << (p.t + p.m))
        adv = abs(pr - pu)
        return AdvantageEstimate(adv, adv, adv, pr, pu, 1 << p.t, True)
    rng = rng if rng is not None else np.random.default_rng()
    real = 0
    unif = 0
    for _ in range(trials):
        y = BitString.random(p.t, rng)
        real += T(y, extract(f, y, p))
        y2 = BitString.random(p.t, rng)
        unif += T(y2, BitString.random(p.m, rng))
    pr = real / trials
    pu = unif / trials
    adv = abs(pr - pu)
    # Union bound over the two empirical means.
    slack = 2 * hoeffding_halfwidth(trials, 1 - (1 - CONFIDENCE) / 2)
    return AdvantageEstimate(
        adv, max(0.0, adv - slack), min(1.0, adv + slack), pr, pu, trials, False
    )


# --------------------------------------------------------------------------
# average-case reconstruction


@dataclass(frozen=True)
class Advice:
    """Everything the next-bit predictor needs besides the distinguisher.

    ``tables[j]`` holds output bit ``j < hybrid`` for every assignment of the
    seed bits in ``S_j`` that fall inside ``S_hybrid``; ``tail`` holds the
    guess for bit ``hybrid`` (bit 0) and the random fill for later bits.
    """

    hybrid: int
    fixed_seed: BitString
    tail: BitString
    tables: tuple[tuple[int, ...], ...]
    flip: int
    m: int
    l: int
    list_index_bits: int = 0

    @property
    def bits(self) -> int:
        """Advice length: hybrid index, seed bits outside the hybrid set,
        tail bits, restricted tables, the flip bit and any list index."""
        hybrid_bits = math.ceil(math.log2(self.m)) if self.m > 1 else 0
        return (
            hybrid_bits
            + (self.fixed_seed.length - self.l)
            + self.tail.length
            + sum(len(t) for t in self.tables)
            + 1
            + self.list_index_bits
        )

    def to_dict(self) -> dict:
        return {
            "hybrid": self.hybrid,
            "fixed_seed": self.fixed_seed.value,
            "tail": str(self.tail),
            "table_sizes": [len(t) for t in self.tables],
            "flip": self.flip,
            "bits": self.bits,
        }


class ReconstructionFailure(Exception):
    def __init__(self, message: str, report: dict):
        super().__init__(message)
        self.report = report


@dataclass
class AverageCaseResult:
    advice: Advice
    predictor: ProbOracle
    success: float
    target: float
    slack: float
    attempts: int
    distinguisher_queries: int
    positions_evaluated: int


def _build_predictor(
    T: Distinguisher,
    p: ExtractorParams,
    codeword: np.ndarray,
    hybrid: int,
    fixed: int,
    tail: int,
    flip: int,
) -> tuple[Advice, ProbOracle]:
    design = p.design
    S = sorted(design.sets[hybrid])
    l = design.l
    in_set = set(S)
    set_mask = 0
    for e in S:
        set_mask |= 1 << e
    base = fixed & ~set_mask
    positions = np.arange(1 << l, dtype=np.int64)
    seeds = np.full(positions.shape, base, dtype=np.int64)
    for a, e in enumerate(S):
        seeds |= ((positions >> a) & 1) << e

    tables = []
    z_prefix = np.zeros(positions.shape, dtype=np.int64)
    for j in range(hybrid):
        Sj = sorted(design.sets[j])
        shared = [S.index(e) for e in Sj if e in in_set]
        key = np.zeros(positions.shape, dtype=np.int64)
        for q, a in enumerate(shared):
            key |= ((positions >> a) & 1) << q
        sliced = np.zeros(positions.shape, dtype=np.int64)
        for a, e in enumerate(Sj):
            sliced |= ((seeds >> e) & 1) << a
        bits = codeword[sliced].astype(np.int64)
        table = np.zeros(1 << len(shared), dtype=np.int64)
        table[key] = bits
        tables.append(tuple(int(v) for v in table))
        z_prefix |= table[key] << j

    guess = tail & 1
    z_rest = tail << hybrid
    seeds_list = seeds.tolist()
    z_list = (z_prefix | z_rest).tolist()
    t, m = p.t, p.m

    def predict(x: int, _rng) -> int:
        answer = T(BitString(seeds_list[x], t), BitString(z_list[x], m))
        return (guess if answer else guess ^ 1) ^ flip

    advice = Advice(
        hybrid=hybrid,
        fixed_seed=BitString(base, p.t),
        tail=BitString(tail, p.m - hybrid),
        tables=tuple(tables),
        flip=flip,
        m=p.m,
        l=l,
    )
    return advice, ProbOracle(predict, 1 << l, deterministic=T.deterministic)


def avg_case_reconstruct(
    T: Distinguisher,
    f: BitString,
    p: ExtractorParams,
    search_budget: int = 64,
    rng: np.random.Generator | None = None,
    sweep_limit: int = 1 << 14,
    samples: int = 4096,
) -> AverageCaseResult:
    """Search for advice whose predictor beats ``1/2 + eps/(2m)``.

    Best of ``search_budget`` candidates (stopping early only on a perfect
    predictor).  Candidates cycle through the hybrid index; each draws a
    fresh fixing of
    the seed outside the hybrid set and fresh tail bits.  Success is
    measured over every codeword position when ``nbar <= sweep_limit``,
    otherwise over ``samples`` uniform positions.  Randomised
    distinguishers, and sampled sweeps, are granted a 99% Hoeffding slack.
    """
    if p.t > 62:
        raise ValueError(f"seed length {p.t} too long for desk-scale reconstruction")
    rng = rng if rng is not None else np.random.default_rng()
    codeword = _cached_codeword(f, p.code)
    nbar = p.code.nbar
    if nbar <= sweep_limit:
        positions = np.arange(nbar)
    else:
        positions = rng.integers(0, nbar, size=samples)
    exact_sweep = nbar <= sweep_limit and T.deterministic
    slack = 0.0 if exact_sweep else hoeffding_halfwidth(len(positions))
    goal = 0.5 + p.eps / (2 * p.m)
    target = goal - slack
    truth = codeword[positions]
    start_queries = T.queries
    best = None
    attempts = 0
    for attempt in range(search_budget):
        attempts = attempt + 1
        hybrid = attempt % p.m
        fixed = int(BitString.random(p.t, rng).value)
        tail = int(BitString.random(p.m - hybrid, rng).value)
        advice, predictor = _build_predictor(T, p, codeword, hybrid, fixed, tail, 0)
        answers = np.fromiter((predictor(int(x)) for x in positions), dtype=np.uint8,
                              count=len(positions))
        success = float(np.mean(answers == truth))
        flip = 0
        if success < 0.5:
            flip, success = 1, 1.0 - success
        if best is None or success > best[0]:
            best = (success, hybrid, fixed, tail, flip)
        if success == 1.0:
            break
    used = T.queries - start_queries
    success, hybrid, fixed, tail, flip = best
    if success < target:
        raise ReconstructionFailure(
            "no advice reached the predictor target",
            {
                "best_success": success,
                "target": target,
                "slack": slack,
                "attempts": attempts,
                "distinguisher_queries": used,
            },
        )
    advice, predictor = _build_predictor(T, p, codeword, hybrid, fixed, tail, flip)
    return AverageCaseResult(
        advice=advice,
        predictor=predictor,
        success=success,
        target=target,
        slack=slack,
        attempts=attempts,
        distinguisher_queries=used,
        positions_evaluated=len(positions),
    )


# --------------------------------------------------------------------------
# Goldreich-Levin


@dataclass(frozen=True)
class Hadamard:
    """The Hadamard code of ``s``-bit messages, length ``2^s``."""

    s: int

    @property
    def n(self) -> int:
        return self.s

    @property
    def nbar(self) -> int:
        return 1 << self.s


def gl_parameters(s: int, delta: float, conf: float, max_k: int = 12) -> tuple[int, int]:
    """Number of seed vectors ``k`` and independent repetitions.

    ``2^k - 1 >= s / delta^2`` pairwise-independent samples push each
    majority vote's Chebyshev error below ``1/(4s)``, so one repetition
    fails with probability at most 1/4.
    """
    k = max(1, math.ceil(math.log2(s / (delta * delta) + 1)))
    k = min(k, max_k)
    reps = max(1, math.ceil(math.log(1 / (1 - conf)) / math.log(4)))
    return k, reps


def gl_decode(
    O: ProbOracle,
    delta: float,
    conf: float = CONFIDENCE,
    rng: np.random.Generator | None = None,
) -> list[int]:
    """Goldreich-Levin list decoding of a Hadamard codeword behind a
    probabilistic oracle.

    Returns the ``s``-bit candidates (as ints) whose estimated agreement with
    ``O`` clears ``1/2 + delta/2``, best first, at most ``4/delta^2`` of them.
    """
    if not 0 < delta <= 0.5:
        raise ValueError(f"delta={delta} outside (0, 1/2]")
    s = O.size.bit_length() - 1
    if O.size != 1 << s:
        raise ValueError("oracle size must be a power of two")
    rng = rng if rng is not None else np.random.default_rng()
    k, reps = gl_parameters(s, delta, conf)
    n_sub = (1 << k) - 1
    guesses = np.arange(1 << k)
    subsets = np.arange(1, 1 << k)
    par = parity_table(k)
    # guess_bits[g, J] = <x, r_J> implied by guess g
    guess_bits = par[guesses[:, None] & subsets[None, :]].astype(np.int64)
    candidates: set[int] = set()
    for _ in range(reps):
        seeds = rng.integers(0, 1 << s, size=k) if s > 0 else np.zeros(k, dtype=np.int64)
        points = np.zeros(1 << k, dtype=np.int64)
        for J in range(1, 1 << k):
            low = (J & -J).bit_length() - 1
            points[J] = points[J & (J - 1)] ^ seeds[low]
        points = points[1:]
        answers = np.array(
            [[O(int(r) ^ (1 << i)) for r in points] for i in range(s)], dtype=np.int64
        ).reshape(s, n_sub)
        # Disagreements between guess bit and answer, per guess and coordinate.
        ones = guess_bits.sum(axis=1)[:, None] + answers.sum(axis=1)[None, :] - 2 * (
            guess_bits @ answers.T
        )
        decoded = (ones * 2 > n_sub).astype(np.int64)
        weights = 1 << np.arange(s, dtype=np.int64)
        candidates.update(int(v) for v in decoded @ weights)

    if not candidates:
        return []
    cand = np.array(sorted(candidates), dtype=np.int64)
    n_est = math.ceil(8 * math.log(2 * len(cand) / (1 - conf)) / (delta * delta))
    probe = rng.integers(0, 1 << s, size=n_est)
    replies = np.array([O(int(r)) for r in probe], dtype=np.int64)
    expected = parity_table(s)[cand[:, None] & probe[None, :]]
    agreement = (expected == replies[None, :]).mean(axis=1)
    keep = np.flatnonzero(agreement >= 0.5 + delta / 2)
    order = keep[np.argsort(-agreement[keep], kind="stable")]
    cap = int(math.floor(4 / (delta * delta)))
    return [int(cand[i]) for i in order[:cap]]


# --------------------------------------------------------------------------
# exhaustive list decoding


def _sampled_counts(word_or_oracle, nbar: int, samples_per_position: int) -> tuple[np.ndarray, int]:
    if isinstance(word_or_oracle, ProbOracle):
        if word_or_oracle.size != nbar:
            raise ValueError(f"oracle covers {word_or_oracle.size} positions, code has {nbar}")
        ones = np.zeros(nbar, dtype=np.int64)
        for j in range(nbar):
            for _ in range(samples_per_position):
                ones[j] += word_or_oracle(j)
        return ones, samples_per_position
    bits = word_or_oracle.bits if isinstance(word_or_oracle, BitString) else word_or_oracle
    arr = np.asarray(bits, dtype=np.int64)
    if arr.size != nbar:
        raise ValueError(f"word has {arr.size} bits, code has {nbar}")
    return arr, 1


def brute_list_decode(
    word_or_oracle,
    code: CodeParams | Hadamard,
    p: float,
    samples_per_position: int = 1,
    max_messages: int = 1 << 20,
) -> list[BitString]:
    """Every message whose codeword agrees with the word (or the sampled
    oracle) on at least a ``p`` fraction of positions, by enumeration."""
    n = code.n
    if (1 << n) > max_messages:
        raise ValueError(f"message space 2^{n} exceeds the enumeration limit {max_messages}")
    ones, S = _sampled_counts(word_or_oracle, code.nbar, samples_per_position)
    total = S * code.nbar
    if isinstance(code, Hadamard):
        words = hadamard_rows(np.arange(1 << code.s), code.s).astype(np.int64)
        agree = words @ ones + (1 - words) @ (S - ones)
    else:
        q = code.field_size
        blocks = ones.reshape(code.n_points, q)
        had = hadamard_rows(np.arange(q), code.s).astype(np.int64)
        # per_point[P, v]: agreement of block P with the Hadamard word of v
        per_point = blocks @ had.T + (S - blocks) @ (1 - had).T
        table = all_message_values(code)
        cols = np.arange(code.n_points)
        agree = np.empty(table.shape[0], dtype=np.int64)
        step = 4096
        for lo in range(0, table.shape[0], step):
            chunk = table[lo : lo + step].astype(np.int64)
            agree[lo : lo + step] = per_point[cols[None, :], chunk].sum(axis=1)
    hits = np.flatnonzero(agree >= p * total - 1e-9)
    return [BitString(int(v), n) for v in hits]


# --------------------------------------------------------------------------
# worst-case reconstruction


@dataclass
class ReconstructionBudget:
    search: int = 64
    gl_conf: float = CONFIDENCE
    points: int | None = None
    sweep_limit: int = 1 << 14


@dataclass
class WorstCaseReport:
    success: bool
    recovered: BitString | None
    reason: str = ""
    predictor_success: float = 0.0
    advice_bits: int = 0
    list_size: int = 0
    inner_delta: float = 0.0
    outer_threshold: float = 0.0
    queries_per_decode: int = 0
    positions_decoded: int = 0
    total_queries: int = 0
    avg_case_queries: int = 0
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = {k: v for k, v in self.__dict__.items() if k != "recovered"}
        out["recovered"] = None if self.recovered is None else str(self.recovered)
        return out


def worst_case_reconstruct(
    T: Distinguisher,
    f: BitString,
    p: ExtractorParams,
    budgets: ReconstructionBudget | None = None,
    rng: np.random.Generator | None = None,
) -> WorstCaseReport:
    """Compose the average-case predictor with local list decoding.

    Each decoded Reed-Muller point gets its own Goldreich-Levin run against
    the predictor restricted to that point's Hadamard block.  Enumeration
    over messages then keeps those whose extension lands in the recovered
    lists on enough points, and the harness names the list index of ``f``.
    """
    budgets = budgets or ReconstructionBudget()
    rng = rng if rng is not None else np.random.default_rng()
    code = p.code
    try:
        avg = avg_case_reconstruct(T, f, p, budgets.search, rng, budgets.sweep_limit)
    except ReconstructionFailure as exc:
        return WorstCaseReport(False, None, reason=str(exc), details=exc.report)

    alpha = avg.success - avg.slack
    delta = max(code.delta, alpha - 0.5)
    inner_delta = min(0.5, delta / 2)
    # Averaging: at least this fraction of blocks keeps agreement
    # >= 1/2 + inner_delta when the overall agreement is alpha.
    good_blocks = (alpha - 0.5 - inner_delta) / (0.5 - inner_delta)
    threshold = max(0.0, 0.9 * good_blocks)

    q = code.field_size
    if budgets.points is None or budgets.points >= code.n_points:
        points = np.arange(code.n_points)
    else:
        points = np.sort(rng.choice(code.n_points, size=budgets.points, replace=False))
    predictor = avg.predictor
    start = predictor.queries
    per_decode = []
    lists = np.zeros((len(points), q), dtype=bool)
    for row, P in enumerate(points):
        base = int(P) * q
        inner = ProbOracle(lambda r, _g, base=base: predictor(base + r), q)
        found = gl_decode(inner, inner_delta, budgets.gl_conf, rng)
        lists[row, found] = True
        per_decode.append(inner.queries)
    total = predictor.queries - start

    table = all_message_values(code)
    cols = points
    hits = np.zeros(table.shape[0], dtype=np.int64)
    step = 4096
    for lo in range(0, table.shape[0], step):
        chunk = table[lo : lo + step][:, cols].astype(np.int64)
        hits[lo : lo + step] = lists[np.arange(len(points))[None, :], chunk].sum(axis=1)
    need = threshold * len(points)
    survivors = np.flatnonzero(hits >= need - 1e-9)
    list_size = int(survivors.size)
    idx_bits = math.ceil(math.log2(list_size)) if list_size > 1 else 0
    advice = avg.advice
    report = WorstCaseReport(
        success=False,
        recovered=None,
        predictor_success=avg.success,
        list_size=list_size,
        inner_delta=inner_delta,
        outer_threshold=threshold,
        queries_per_decode=max(per_decode) if per_decode else 0,
        positions_decoded=len(points),
        total_queries=total,
        avg_case_queries=avg.distinguisher_queries,
        details={
            "advice": advice.to_dict(),
            "true_hits": int(hits[f.value]),
            "max_hits": int(hits.max()) if hits.size else 0,
        },
    )
    report.advice_bits = advice.bits + idx_bits
    if f.value in set(survivors.tolist()):
        report.success = True
        report.recovered = f
    else:
        report.reason = "source not in the decoded list"
    return report
