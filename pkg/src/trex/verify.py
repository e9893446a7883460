"""Desk-scale ground truth for extractors.

Every extractor is turned into a full output table ``E[y, x]`` and all
distances are computed from integer histograms, so results are exact
rationals.  For a flat source of size ``K`` over ``T`` seeds and ``m``
output bits::

    SD((Y, E(X, Y)), (Y, U_m)) = sum_{y,z} |cnt(y, z) * 2^m - K| / (2 T K 2^m)

With classical storage ``c: X -> [2^b]`` the same formula is summed over
cells ``v`` with ``K`` replaced by the cell size ``K_v`` in the reference
term and ``cnt`` restricted to the cell.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Sequence

import numpy as np

from trex.bits import BitString, FlatSource
from trex.code import codeword_array
from trex.designs import slice_value
from trex.trevisan import ExtractorParams

# Largest output table 2^t * 2^n built in memory.
TABLE_LIMIT = 1 << 24
DEFAULT_SOURCE_BUDGET = 100_000
DEFAULT_LABELING_BUDGET = 1 << 16
SAMPLED_SOURCES = 2000
BATCH = 256


@dataclass(frozen=True)
class Extractor:
    """An extractor ``{0,1}^n x {0,1}^t -> {0,1}^m`` given as a function of
    two ints, plus its lazily built table."""

    name: str
    n: int
    t: int
    m: int
    fn: Callable[[int, int], int]

    def __call__(self, x: BitString, y: BitString) -> BitString:
        return BitString(self.fn(x.value, y.value), self.m)

    def table(self) -> np.ndarray:
        """``E[y, x]`` as an int64 array of shape ``(2^t, 2^n)``."""
        return _table(self)

    @classmethod
    def from_function(cls, fn: Callable[[int, int], int], n: int, t: int, m: int,
                      name: str = "custom") -> Extractor:
        return cls(name, n, t, m, fn)

    @classmethod
    def hash(cls, n: int, m: int) -> Extractor:
        """Toeplitz hashing with seed length ``n + m - 1``."""
        mask = (1 << n) - 1

        def fn(x: int, y: int) -> int:
            out = 0
            for i in range(m):
                out |= (bin((y >> i) & mask & x).count("1") & 1) << i
            return out

        return cls("hash", n, n + m - 1, m, fn)

    @classmethod
    def bitselect(cls, n: int) -> Extractor:
        """One output bit ``x_{y mod n}`` with ``ceil(log2 n)`` seed bits."""
        t = max(1, math.ceil(math.log2(n)))
        return cls("bitselect", n, t, 1, lambda x, y: (x >> (y % n)) & 1)

    @classmethod
    def constant(cls, n: int, t: int, m: int = 1, value: int = 0) -> Extractor:
        return cls("constant", n, t, m, lambda x, y: value)

    @classmethod
    def trevisan(cls, p: ExtractorParams) -> Extractor:
        from trex.trevisan import extract

        def fn(x: int, y: int) -> int:
            return extract(BitString(x, p.n), BitString(y, p.t), p).value

        ext = cls("trevisan", p.n, p.t, p.m, fn)
        object.__setattr__(ext, "_params", p)
        return ext


def _table(e: Extractor) -> np.ndarray:
    cached = e.__dict__.get("_table")
    if cached is not None:
        return cached
    size = (1 << e.t) * (1 << e.n)
    if size > TABLE_LIMIT:
        raise ValueError(
            f"output table needs 2^{e.t} seeds x 2^{e.n} inputs = {size} entries, "
            f"limit {TABLE_LIMIT}"
        )
    ys = np.arange(1 << e.t, dtype=np.int64)
    xs = np.arange(1 << e.n, dtype=np.int64)
    if e.name == "hash":
        mask = (1 << e.n) - 1
        out = np.zeros((ys.size, xs.size), dtype=np.int64)
        for i in range(e.m):
            rows = ((ys >> i) & mask)[:, None] & xs[None, :]
            out |= (np.bitwise_count(rows).astype(np.int64) & 1) << i
    elif e.name == "bitselect":
        out = (xs[None, :] >> (ys[:, None] % e.n)) & 1
    elif e.name == "trevisan" and hasattr(e, "_params"):
        out = _trevisan_table(e._params)  # type: ignore[attr-defined]
    else:
        out = np.array([[e.fn(int(x), int(y)) for x in xs] for y in ys], dtype=np.int64)
    out.flags.writeable = False
    object.__setattr__(e, "_table", out)
    return out


def _trevisan_table(p: ExtractorParams) -> np.ndarray:
    ys = range(1 << p.t)
    # slices[i][y]: codeword position read by output bit i under seed y.
    slices = np.array([[slice_value(y, s) for y in ys] for s in p.design.sets], dtype=np.int64)
    out = np.zeros((1 << p.t, 1 << p.n), dtype=np.int64)
    for x in range(1 << p.n):
        word = codeword_array(BitString(x, p.n), p.code).astype(np.int64)
        col = np.zeros(1 << p.t, dtype=np.int64)
        for i in range(p.m):
            col |= word[slices[i]] << i
        out[:, x] = col
    return out


# --------------------------------------------------------------------------
# exact distances


def _numerators(table: np.ndarray, m: int, supports: np.ndarray) -> np.ndarray:
    """``sum_{y,z} |cnt * 2^m - K|`` for each row of ``supports`` (shape
    ``(B, K)``, element values), as exact int64."""
    T = table.shape[0]
    B, K = supports.shape
    cells = T << m
    vals = table[:, supports]  # (T, B, K)
    codes = (np.arange(T, dtype=np.int64)[:, None, None] << m) + vals
    codes = codes + (np.arange(B, dtype=np.int64) * cells)[None, :, None]
    cnt = np.bincount(codes.ravel(), minlength=B * cells).reshape(B, cells)
    return np.abs((cnt << m) - K).sum(axis=1)


def _as_fraction(num: int, K: int, T: int, m: int) -> Fraction:
    return Fraction(int(num), 2 * T * K << m)


def _support_array(X: FlatSource | Iterable[int]) -> np.ndarray:
    vals = X.values() if isinstance(X, FlatSource) else list(X)
    return np.array(sorted(int(v) for v in vals), dtype=np.int64)


def extractor_distance_exact(
    E: Extractor, X: FlatSource, budget: int = TABLE_LIMIT
) -> Fraction:
    """Exact ``SD((Y, E(X, Y)), (Y, U_m))`` for a flat source ``X``."""
    support = _support_array(X)
    need = support.size * (1 << E.t) * (1 << E.m)
    if need > budget:
        raise ValueError(
            f"|X|={support.size} x 2^t={1 << E.t} x 2^m={1 << E.m} = {need} exceeds budget {budget}"
        )
    num = _numerators(E.table(), E.m, support[None, :])[0]
    return _as_fraction(num, support.size, 1 << E.t, E.m)


def distances(E: Extractor, supports: np.ndarray) -> list[Fraction]:
    """Exact distances for a batch of equal-size supports."""
    table = E.table()
    T = table.shape[0]
    K = supports.shape[1]
    out: list[Fraction] = []
    for start in range(0, supports.shape[0], BATCH):
        nums = _numerators(table, E.m, supports[start : start + BATCH])
        out.extend(_as_fraction(v, K, T, E.m) for v in nums)
    return out


@dataclass(frozen=True)
class WorstSource:
    source: FlatSource
    distance: Fraction
    mode: str
    evaluated: int

    def to_dict(self) -> dict:
        return {
            "source": sorted(self.source.values()),
            "distance": str(self.distance),
            "distance_float": float(self.distance),
            "mode": self.mode,
            "evaluated": self.evaluated,
        }


def source_size(k: float) -> int:
    return math.ceil(2**k - 1e-12)


def structured_sources(n: int, size: int, rng: np.random.Generator) -> list[tuple[int, ...]]:
    """Fixed-prefix blocks, Hamming balls, intervals and affine subspaces of
    the requested size."""
    N = 1 << n
    out: set[tuple[int, ...]] = set()
    # Intervals and fixed high bits (prefixes), both ends of the cube.
    for start in range(0, N - size + 1, max(1, size)):
        out.add(tuple(range(start, start + size)))
    out.add(tuple(range(N - size, N)))
    # Same for the low bits fixed: a strided set.
    if size & (size - 1) == 0:
        stride = N // size
        for off in range(stride):
            out.add(tuple(range(off, N, stride)))
    # Hamming balls around a few centres, truncated by distance then value.
    weights = np.bitwise_count(np.arange(N, dtype=np.int64))
    for centre in {0, N - 1, *(int(c) for c in rng.integers(0, N, size=4))}:
        dist = weights[np.arange(N) ^ centre]
        order = np.lexsort((np.arange(N), dist))
        out.add(tuple(sorted(int(v) for v in order[:size])))
    # Affine subspaces: random spans of log2(size) vectors shifted by a coset.
    if size & (size - 1) == 0 and size > 1:
        dim = size.bit_length() - 1
        for _ in range(32):
            basis: list[int] = []
            span = {0}
            while len(basis) < dim:
                v = int(rng.integers(1, N))
                if v not in span:
                    basis.append(v)
                    span |= {s ^ v for s in span}
            shift = int(rng.integers(0, N))
            out.add(tuple(sorted(s ^ shift for s in span)))
    return sorted(out)


def worst_flat_source(
    E: Extractor,
    n: int,
    k: float,
    mode: str = "exhaustive",
    budget: int = DEFAULT_SOURCE_BUDGET,
    rng: np.random.Generator | None = None,
    samples: int = SAMPLED_SOURCES,
) -> WorstSource:
    """Flat source of size ``ceil(2^k)`` maximising the extractor distance.

    Exhaustive mode requires ``C(2^n, size) <= budget``; sampled mode draws
    ``samples`` uniform supports plus :func:`structured_sources`.
    """
    if n != E.n:
        raise ValueError(f"extractor takes {E.n}-bit inputs, asked for n={n}")
    if not 0 <= k <= n:
        raise ValueError(f"k={k} outside [0, n={n}]")
    N = 1 << n
    size = source_size(k)
    if mode == "exhaustive":
        total = math.comb(N, size)
        if total > budget:
            raise ValueError(f"C(2^{n}, {size}) = {total} sources exceed budget {budget}")
        candidates: Iterable[tuple[int, ...]] = itertools.combinations(range(N), size)
    elif mode == "sampled":
        rng = rng if rng is not None else np.random.default_rng(0)
        drawn = [tuple(sorted(int(v) for v in rng.choice(N, size=size, replace=False)))
                 for _ in range(samples)]
        candidates = structured_sources(n, size, rng) + drawn
    else:
        raise ValueError(f"unknown mode {mode!r}")
    best: tuple[Fraction, tuple[int, ...]] | None = None
    evaluated = 0
    chunk: list[tuple[int, ...]] = []

    def flush() -> None:
        nonlocal best, evaluated
        if not chunk:
            return
        ds = distances(E, np.array(chunk, dtype=np.int64))
        for dist, supp in zip(ds, chunk):
            if best is None or dist > best[0]:
                best = (dist, supp)
        evaluated += len(chunk)
        chunk.clear()

    for supp in candidates:
        chunk.append(supp)
        if len(chunk) >= 16 * BATCH:
            flush()
    flush()
    assert best is not None
    return WorstSource(FlatSource.from_ints(best[1], n), best[0], mode, evaluated)


def all_subset_maxima(E: Extractor) -> dict[int, Fraction]:
    """``size -> max distance`` over every flat source of that size."""
    N = 1 << E.n
    if N > 20:
        raise ValueError("all-subset sweep limited to n <= 4")
    out: dict[int, Fraction] = {}
    for size in range(1, N + 1):
        supports = np.array(list(itertools.combinations(range(N), size)), dtype=np.int64)
        out[size] = max(distances(E, supports))
    return out


# --------------------------------------------------------------------------
# classical bounded storage


@dataclass(frozen=True)
class StorageResult:
    advantage: Fraction
    labeling: tuple[int, ...]
    mode: str
    evaluated: int

    def to_dict(self) -> dict:
        return {
            "advantage": str(self.advantage),
            "advantage_float": float(self.advantage),
            "labeling": list(self.labeling),
            "mode": self.mode,
            "evaluated": self.evaluated,
        }


def _storage_numerators(onehot: np.ndarray, labels: np.ndarray, cells: int, m: int) -> np.ndarray:
    """``sum_v sum_{y,z} |cnt_v * 2^m - K_v|`` per labeling.  ``onehot`` is
    ``(K, T 2^m)`` and ``labels`` ``(L, K)`` with values in ``[0, cells)``."""
    total = np.zeros(labels.shape[0], dtype=np.int64)
    for v in range(cells):
        ind = (labels == v).astype(np.int64)
        cnt = ind @ onehot
        kv = ind.sum(axis=1)
        total += np.abs((cnt << m) - kv[:, None]).sum(axis=1)
    return total


def classical_storage_advantage(
    E: Extractor,
    X: FlatSource,
    b: int,
    budget: int = DEFAULT_LABELING_BUDGET,
    rng: np.random.Generator | None = None,
    samples: int = 4096,
) -> StorageResult:
    """Best distinguishing advantage for an adversary storing ``b`` bits
    ``c(x)`` and then seeing ``(y, z)``.

    All ``(2^b)^|X|`` storage functions are enumerated when that fits
    ``budget``; otherwise uniform labelings are sampled together with
    labelings given by output bits of ``E`` at fixed seeds and by input bits.
    """
    if b < 0:
        raise ValueError("b must be non-negative")
    support = _support_array(X)
    K = support.size
    table = E.table()
    T = table.shape[0]
    width = T << E.m
    onehot = np.zeros((K, width), dtype=np.int64)
    codes = (np.arange(T)[None, :] << E.m) + table[:, support].T
    np.put_along_axis(onehot, codes, 1, axis=1)
    cells = 1 << b
    if cells >= K:
        # Enough room to store x itself; the identity labeling dominates.
        labels = np.arange(K, dtype=np.int64)[None, :]
        mode = "exhaustive"
        gen: Iterable[np.ndarray] = [labels]
        count = 1
    elif cells ** K <= budget:
        mode = "exhaustive"
        count = cells**K
        gen = _labeling_batches(K, cells)
    else:
        mode = "sampled"
        rng = rng if rng is not None else np.random.default_rng(0)
        gen = [_structured_labelings(table, support, E, cells, rng, samples)]
        count = 0
    best_num = -1
    best_lab: tuple[int, ...] = ()
    evaluated = 0
    for labels in gen:
        nums = _storage_numerators(onehot, labels, cells, E.m)
        i = int(np.argmax(nums))
        if nums[i] > best_num:
            best_num = int(nums[i])
            best_lab = tuple(int(v) for v in labels[i])
        evaluated += labels.shape[0]
    if mode == "exhaustive":
        assert evaluated == count
    return StorageResult(_as_fraction(best_num, K, T, E.m), best_lab, mode, evaluated)


def _labeling_batches(K: int, cells: int, batch: int = 4096) -> Iterable[np.ndarray]:
    total = cells**K
    powers = cells ** np.arange(K, dtype=np.int64)
    for start in range(0, total, batch):
        idx = np.arange(start, min(total, start + batch), dtype=np.int64)
        yield (idx[:, None] // powers[None, :]) % cells


def _structured_labelings(
    table: np.ndarray, support: np.ndarray, E: Extractor, cells: int,
    rng: np.random.Generator, samples: int,
) -> np.ndarray:
    K = support.size
    rows = [rng.integers(0, cells, size=K) for _ in range(samples)]
    for y in range(min(table.shape[0], 256)):
        rows.append(table[y, support] % cells)
    for shift in range(E.n):
        rows.append((support >> shift) % cells)
    return np.array(rows, dtype=np.int64)


# --------------------------------------------------------------------------
# the storage lemma, checked on an epsilon grid


@dataclass(frozen=True)
class LemmaCase:
    extractor: str
    k: int
    b: int
    eps: Fraction
    premise_distance: Fraction
    advantage: Fraction
    holds: bool

    def to_dict(self) -> dict:
        return {
            "extractor": self.extractor,
            "k": self.k,
            "b": self.b,
            "eps": str(self.eps),
            "premise_distance": str(self.premise_distance),
            "advantage": str(self.advantage),
            "holds": self.holds,
        }


def premise_distance(maxima: dict[int, Fraction], k: int, b: int, eps: Fraction) -> Fraction:
    """Worst distance over flat sources of min-entropy at least
    ``k - b - log2(1/eps)``, i.e. of size at least ``eps * 2^(k-b)``."""
    threshold = max(1, math.ceil(eps * Fraction(2) ** (k - b)))
    return max(d for size, d in maxima.items() if size >= threshold)


def lemma_check(
    E: Extractor,
    b_values: Sequence[int] = (0, 1),
    grid: int = 256,
    source_budget: int = DEFAULT_SOURCE_BUDGET,
    labeling_budget: int = DEFAULT_LABELING_BUDGET,
) -> list[LemmaCase]:
    """For each ``k`` and ``b`` and every ``eps`` in the grid (multiples of
    ``1/grid`` plus every exact worst-case distance), record whether the
    premise holds and, if so, whether the measured ``b``-bit advantage over
    all flat sources of size ``2^k`` stays within ``2 eps``."""
    n = E.n
    maxima = all_subset_maxima(E)
    eps_values = sorted(
        {Fraction(j, grid) for j in range(1, grid)} | {d for d in maxima.values() if 0 < d < 1}
    )
    cases: list[LemmaCase] = []
    for b in b_values:
        for k in range(b, n + 1):
            size = 1 << k
            adv = Fraction(0)
            for supp in itertools.combinations(range(1 << n), size):
                res = classical_storage_advantage(
                    E, supp, b, labeling_budget
                )
                if res.mode != "exhaustive":
                    raise ValueError("storage enumeration exceeded its budget")
                adv = max(adv, res.advantage)
            for eps in eps_values:
                prem = premise_distance(maxima, k, b, eps)
                if prem > eps:
                    continue
                cases.append(LemmaCase(E.name, k, b, eps, prem, adv, adv <= 2 * eps))
    return cases


@dataclass(frozen=True)
class HashCase:
    n: int
    k: int
    m: int
    mode: str
    evaluated: int
    distance: Fraction
    bound: float
    holds: bool

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "k": self.k,
            "m": self.m,
            "mode": self.mode,
            "evaluated": self.evaluated,
            "distance": str(self.distance),
            "bound": self.bound,
            "holds": self.holds,
        }


def hash_bound_holds(distance: Fraction, m: int, k: int) -> bool:
    """Exact test of ``distance <= 2^((m - k)/2) / 2``, squared to stay
    rational: ``4 d^2 <= 2^(m - k)``."""
    return 4 * distance * distance <= Fraction(2) ** (m - k)


def leftover_hash_sweep(
    max_n: int = 6,
    budget: int = DEFAULT_SOURCE_BUDGET,
    rng: np.random.Generator | None = None,
    samples: int = SAMPLED_SOURCES,
) -> list[HashCase]:
    """Toeplitz hashing at every ``1 <= m <= k <= n <= max_n``: worst flat
    source of size ``2^k``, exhaustive where ``C(2^n, 2^k) <= budget``."""
    rng = rng if rng is not None else np.random.default_rng(0)
    cases = []
    for n in range(1, max_n + 1):
        for m in range(1, n + 1):
            E = Extractor.hash(n, m)
            for k in range(m, n + 1):
                mode = "exhaustive" if math.comb(1 << n, 1 << k) <= budget else "sampled"
                w = worst_flat_source(E, n, k, mode, budget, rng, samples)
                cases.append(
                    HashCase(n, k, m, mode, w.evaluated, w.distance,
                             0.5 * 2 ** ((m - k) / 2), hash_bound_holds(w.distance, m, k))
                )
    return cases
