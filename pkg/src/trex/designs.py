"""Nisan-Wigderson combinatorial designs.

A design is a family of ``m`` subsets of ``[0, t)``, each of size ``l``,
with pairwise intersections of size at most ``r``.  The construction here
is block greedy: the universe is ``l`` blocks of ``B`` consecutive indices,
every set takes exactly one index per block, and ``B`` grows from its
counting lower bound until all ``m`` sets fit.  Each new set is found by a
depth-first search that prefers the lowest indices and prunes as soon as
an intersection exceeds ``r``; when the search exhausts its node budget a
seeded randomised greedy with restarts takes over.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from trex.bits import BitString

# Published bound on t / ceil(l^2 / r).  The largest ratio measured over the
# test grids is 2.0 (tests/test_designs.py); the block-greedy existence
# argument gives e^2 whenever m < e^r.
C_DESIGN = 4.0

DFS_NODE_BUDGET = 600
RANDOM_TRIES = 40


@dataclass(frozen=True)
class DesignFamily:
    t: int
    l: int
    r: int
    sets: tuple[tuple[int, ...], ...]

    @property
    def m(self) -> int:
        return len(self.sets)

    def to_dict(self) -> dict:
        return {"t": self.t, "l": self.l, "r": self.r, "sets": [list(s) for s in self.sets]}

    @classmethod
    def from_dict(cls, data: dict) -> DesignFamily:
        return cls(
            t=int(data["t"]),
            l=int(data["l"]),
            r=int(data["r"]),
            sets=tuple(tuple(int(i) for i in s) for s in data["sets"]),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def default_intersection(m: int) -> int:
    return max(1, math.ceil(math.log2(m))) if m > 1 else 1


def _search_set(
    blocks: int,
    width: int,
    r: int,
    members: list[list[int]],
    incidence: np.ndarray,
    n_prev: int,
    rng: np.random.Generator,
) -> tuple[int, ...] | None:
    """Find one index per block meeting every previous set in at most
    ``r`` places.  ``members[e]`` lists the previous sets containing ``e``."""
    counts = [0] * n_prev
    chosen: list[int] = []
    nodes = 0

    def add(e: int) -> bool:
        ok = True
        for j in members[e]:
            counts[j] += 1
            if counts[j] > r:
                ok = False
        return ok

    def remove(e: int) -> None:
        for j in members[e]:
            counts[j] -= 1

    def dfs(block: int) -> bool:
        nonlocal nodes
        if block == blocks:
            return True
        base = block * width
        for e in range(base, base + width):
            nodes += 1
            if nodes > DFS_NODE_BUDGET:
                return False
            if add(e):
                chosen.append(e)
                if dfs(block + 1):
                    return True
                chosen.pop()
            remove(e)
        return False

    if dfs(0):
        return tuple(chosen)
    if n_prev == 0:
        return None
    return _random_set(blocks, width, r, incidence[:, :n_prev], rng)


def _random_set(
    blocks: int, width: int, r: int, incidence: np.ndarray, rng: np.random.Generator
) -> tuple[int, ...] | None:
    """Randomised greedy with restarts: walk the blocks in order and pick a
    uniform index among those keeping every intersection within ``r``."""
    inc = incidence.astype(np.int16)
    for _ in range(RANDOM_TRIES):
        counts = np.zeros(inc.shape[1], dtype=np.int16)
        chosen = []
        for block in range(blocks):
            rows = inc[block * width : (block + 1) * width]
            ok = np.flatnonzero((rows + counts).max(axis=1) <= r)
            if ok.size == 0:
                break
            e = block * width + int(ok[rng.integers(ok.size)])
            counts += inc[e]
            chosen.append(e)
        else:
            return tuple(chosen)
    return None


def _try_width(m: int, l: int, r: int, width: int) -> list[tuple[int, ...]] | None:
    # The stream ignores m, so the first m sets at a given width are the same
    # for every target size: success for m + 1 implies success for m, which
    # makes t non-decreasing in m.
    rng = np.random.default_rng([l, r, width])
    members: list[list[int]] = [[] for _ in range(l * width)]
    incidence = np.zeros((l * width, m), dtype=np.int8)
    sets: list[tuple[int, ...]] = []
    for idx in range(m):
        found = _search_set(l, width, r, members, incidence, idx, rng)
        if found is None:
            return None
        for e in found:
            members[e].append(idx)
        incidence[list(found), idx] = 1
        sets.append(found)
    return sets


def _width_lower_bound(m: int, l: int, r: int) -> int:
    """No block design exists below this width: a Singleton-type count
    (``m <= B^(r+1)``) and a pair-counting bound on shared indices."""
    if r >= l or m == 1:
        return 1
    singleton = math.ceil(m ** (1.0 / (r + 1)) - 1e-9)
    pairs = math.ceil(l * m / (r * (m - 1) + l) - 1e-9)
    return max(1, singleton, pairs)


def make_design(m: int, l: int, r: int | None = None) -> DesignFamily:
    """Build a deterministic design of ``m`` sets of size ``l`` with
    pairwise intersections at most ``r`` (default ``ceil(log2 m)``)."""
    if r is None:
        r = default_intersection(m)
    if m < 1 or l < 1:
        raise ValueError(f"need m >= 1 and l >= 1, got m={m}, l={l}")
    if not 1 <= r <= l:
        raise ValueError(f"intersection bound r={r} must lie in [1, l={l}]")
    width = _width_lower_bound(m, l, r)
    while True:
        sets = _try_width(m, l, r, width)
        if sets is not None:
            return DesignFamily(t=l * width, l=l, r=r, sets=tuple(sets))
        width += 1


def verify_design(d: DesignFamily) -> bool:
    """Exhaustive check of set sizes, ranges and pairwise intersections."""
    as_sets = []
    for s in d.sets:
        if len(s) != d.l or len(set(s)) != d.l:
            return False
        if any(not 0 <= i < d.t for i in s):
            return False
        as_sets.append(set(s))
    for i in range(len(as_sets)):
        for j in range(i + 1, len(as_sets)):
            if len(as_sets[i] & as_sets[j]) > d.r:
                return False
    return True


def slice_value(y: int, s: Sequence[int]) -> int:
    """Bits of the int ``y`` at the sorted indices of ``s``, packed with the
    smallest index as bit 0."""
    out = 0
    for pos, idx in enumerate(sorted(s)):
        out |= ((y >> idx) & 1) << pos
    return out


def slice_seed(y: BitString, s: Sequence[int], t: int | None = None) -> BitString:
    """Restrict ``y`` to the indices in ``s``, in ascending index order."""
    if t is not None and y.length != t:
        raise ValueError(f"seed has {y.length} bits, design universe has {t}")
    if s and max(s) >= y.length:
        raise ValueError(f"set index {max(s)} outside seed of length {y.length}")
    return BitString(slice_value(y.value, s), len(s))
