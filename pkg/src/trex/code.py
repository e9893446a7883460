"""Reed-Muller low-degree extension over GF(2^s) concatenated with the
Hadamard code, with per-bit local encoding.

Layout of a codeword position ``j`` in ``[0, nbar)``: the low ``s`` bits are
the Hadamard mask, the remaining ``s*d`` bits the evaluation point, with
coordinate ``c`` stored in bits ``[s*c, s*(c+1))`` of the point index::

    j = point_index * 2**s + mask

Message position ``i`` sits at the cube point whose coordinates are the
base-``h`` digits of ``i`` (least significant digit in coordinate 0), each
digit ``a`` embedded as the field element with value ``a``.  Positions
``n <= i < h**d`` are zero padding.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from trex.bits import BitString
from trex.gf2e import MAX_DEGREE, FieldCtx, FieldElement, field

# Field-size constant in 2^s >= C_FIELD * log2(n)^2 / delta^5.
C_FIELD = 1.0

ENCODE_ALL_LIMIT = 1 << 24


@dataclass(frozen=True)
class CodeParams:
    n: int
    delta: float
    s: int
    d: int
    h: int
    c_field: float = C_FIELD

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError("message length must be positive")
        if self.h ** self.d < self.n:
            raise ValueError(f"cube {self.h}^{self.d} cannot index {self.n} message bits")
        if not 1 <= self.s <= MAX_DEGREE:
            raise ValueError(f"field degree {self.s} outside [1, {MAX_DEGREE}]")
        if (1 << self.s) <= self.degree:
            raise ValueError(f"field of size {1 << self.s} too small for degree {self.degree}")

    @property
    def degree(self) -> int:
        return self.d * (self.h - 1)

    @property
    def field_size(self) -> int:
        return 1 << self.s

    @property
    def n_points(self) -> int:
        return 1 << (self.s * self.d)

    @property
    def index_bits(self) -> int:
        return self.s * (self.d + 1)

    @property
    def nbar(self) -> int:
        return 1 << self.index_bits

    @property
    def ctx(self) -> FieldCtx:
        return field(self.s)

    def to_dict(self) -> dict:
        out = asdict(self)
        out.update(degree=self.degree, nbar=self.nbar)
        return out

    @classmethod
    def from_dict(cls, data: dict) -> CodeParams:
        return cls(
            n=int(data["n"]),
            delta=float(data["delta"]),
            s=int(data["s"]),
            d=int(data["d"]),
            h=int(data["h"]),
            c_field=float(data.get("c_field", C_FIELD)),
        )


def field_size_floor(n: int, delta: float, c_field: float, degree: int) -> float:
    """Smallest admissible field size, exclusive of equality for the two
    degree conditions: interpolation needs ``|F| > degree`` and the Johnson
    radius at agreement ``1/2 + delta`` needs ``|F| > degree / (4 delta^2)``."""
    return max(
        c_field * math.log2(n) ** 2 / delta**5 if n > 1 else 0.0,
        degree + 1,
        math.floor(degree / (4 * delta * delta)) + 1,
    )


def _min_side(n: int, d: int) -> int:
    h = max(1, math.ceil(n ** (1.0 / d) - 1e-9))
    while h**d < n:
        h += 1
    while h > 1 and (h - 1) ** d >= n:
        h -= 1
    return h


def code_params(n: int, delta: float, c_field: float = C_FIELD) -> CodeParams:
    """Smallest code (by codeword length) meeting every size constraint.

    Each ``d`` gets the smallest side ``h`` with ``h^d >= n`` and the
    smallest ``s`` meeting :func:`field_size_floor`; ties on ``nbar`` go to
    the smaller ``d``.
    """
    if n < 1:
        raise ValueError("message length must be positive")
    if not 0 < delta <= 0.5:
        raise ValueError(f"delta={delta} outside (0, 1/2]")
    best: CodeParams | None = None
    max_d = max(1, math.ceil(math.log2(n))) if n > 1 else 1
    for d in range(1, max_d + 1):
        h = _min_side(n, d)
        floor = field_size_floor(n, delta, c_field, d * (h - 1))
        s = max(1, math.ceil(math.log2(floor) - 1e-12))
        if (1 << s) < floor:
            s += 1
        if s > MAX_DEGREE:
            continue
        cand = CodeParams(n=n, delta=delta, s=s, d=d, h=h, c_field=c_field)
        if best is None or cand.nbar < best.nbar:
            best = cand
    if best is None:
        raise ValueError(
            f"no code with field degree <= {MAX_DEGREE} for n={n}, delta={delta}, "
            f"c_field={c_field}"
        )
    return best


def list_size_bound(p: CodeParams) -> float:
    """Johnson bound on the number of codewords agreeing with any word on a
    ``1/2 + delta`` fraction: ``(1 - g) / (4 delta^2 - g)`` with
    ``g = degree / |F|``."""
    g = p.degree / p.field_size
    gap = 4 * p.delta * p.delta - g
    if gap <= 0:
        return math.inf
    return (1 - g) / gap


def distance_bound(p: CodeParams) -> float:
    """Concatenated Schwartz-Zippel bound on the minimum distance."""
    return 0.5 * (1 - p.degree / p.field_size) * p.nbar


def unpack_index(p: CodeParams, j: int) -> tuple[tuple[int, ...], int]:
    """Codeword position -> (point coordinates, Hadamard mask)."""
    if not 0 <= j < p.nbar:
        raise IndexError(f"codeword position {j} outside [0, {p.nbar})")
    mask = j & (p.field_size - 1)
    point_index = j >> p.s
    coords = tuple((point_index >> (p.s * c)) & (p.field_size - 1) for c in range(p.d))
    return coords, mask


def pack_index(p: CodeParams, point: Sequence[int], mask: int) -> int:
    point_index = 0
    for c, v in enumerate(point):
        point_index |= v << (p.s * c)
    return (point_index << p.s) | mask


def message_position(p: CodeParams, i: int) -> tuple[int, ...]:
    """Cube point holding message bit ``i``."""
    return tuple((i // p.h**c) % p.h for c in range(p.d))


def _coords(point) -> list[int]:
    return [x.value if isinstance(x, FieldElement) else int(x) for x in point]


def lde_eval(f: BitString, p: CodeParams, point: Sequence[FieldElement | int]) -> FieldElement:
    """Evaluate the low-degree extension of ``f`` at ``point`` by
    interpolating one coordinate at a time."""
    if f.length != p.n:
        raise ValueError(f"message has {f.length} bits, code expects {p.n}")
    ctx = p.ctx
    coords = _coords(point)
    if len(coords) != p.d:
        raise ValueError(f"point has {len(coords)} coordinates, code has {p.d}")
    nodes = list(range(p.h))
    h = p.h
    # First contraction: the message is 0/1, so it is an XOR of weights.
    w0 = ctx.lagrange_weights(nodes, coords[0])
    size = h ** (p.d - 1)
    vals = [0] * size
    fv = f.value
    for rest in range(size):
        acc = 0
        base = rest * h
        for a in range(h):
            i = base + a
            if i < p.n and (fv >> i) & 1:
                acc ^= w0[a]
        vals[rest] = acc
    for c in range(1, p.d):
        w = ctx.lagrange_weights(nodes, coords[c])
        size //= h
        nxt = [0] * size
        mul = ctx.mul
        for rest in range(size):
            acc = 0
            base = rest * h
            for a in range(h):
                acc ^= mul(w[a], vals[base + a])
            nxt[rest] = acc
        vals = nxt
    return FieldElement(ctx, vals[0])


def encode_bit(f: BitString, p: CodeParams, j: int) -> int:
    """Codeword bit ``j``: Hadamard bit ``mask`` of the LDE value at the
    point packed in ``j``."""
    point, mask = unpack_index(p, j)
    value = lde_eval(f, p, point).value
    return bin(value & mask).count("1") & 1


@lru_cache(maxsize=64)
def lde_basis(p: CodeParams) -> np.ndarray:
    """``B[i, P]``: the extension of the unit message ``e_i`` at point
    index ``P``.  The extension is GF(2)-linear in the message, so the value
    for ``f`` is the XOR of the rows selected by ``f``."""
    ctx = p.ctx
    q = p.field_size
    nodes = list(range(p.h))
    # W[x, a] = L_a(x) for every field element x.
    weights = np.array([ctx.lagrange_weights(nodes, x) for x in range(q)], dtype=np.int64)
    basis = np.zeros((p.n, p.n_points), dtype=np.int64)
    point_ids = np.arange(p.n_points)
    coord = [(point_ids >> (p.s * c)) & (q - 1) for c in range(p.d)]
    for i in range(p.n):
        digits = message_position(p, i)
        acc = weights[coord[0], digits[0]]
        for c in range(1, p.d):
            acc = ctx.mul_array(acc, weights[coord[c], digits[c]])
        basis[i] = acc
    basis.flags.writeable = False
    return basis


def lde_values(f: BitString, p: CodeParams) -> np.ndarray:
    """Extension of ``f`` at every point, indexed by point index."""
    if f.length != p.n:
        raise ValueError(f"message has {f.length} bits, code expects {p.n}")
    basis = lde_basis(p)
    rows = [i for i in range(p.n) if (f.value >> i) & 1]
    if not rows:
        return np.zeros(p.n_points, dtype=np.int64)
    return np.bitwise_xor.reduce(basis[rows], axis=0)


@lru_cache(maxsize=None)
def parity_table(s: int) -> np.ndarray:
    v = np.arange(1 << s)
    par = np.zeros(1 << s, dtype=np.uint8)
    while v.any():
        par ^= (v & 1).astype(np.uint8)
        v = v >> 1
    par.flags.writeable = False
    return par


def hadamard_rows(values: np.ndarray, s: int) -> np.ndarray:
    """Hadamard codewords of an array of s-bit values, one row per value."""
    masks = np.arange(1 << s)
    return parity_table(s)[np.asarray(values)[..., None] & masks]


def codeword_array(f: BitString, p: CodeParams, limit: int = ENCODE_ALL_LIMIT) -> np.ndarray:
    if p.nbar > limit:
        raise ValueError(f"codeword length {p.nbar} exceeds the full-encoding limit {limit}")
    return hadamard_rows(lde_values(f, p), p.s).reshape(-1)


def encode_all(f: BitString, p: CodeParams, limit: int = ENCODE_ALL_LIMIT) -> BitString:
    """Full codeword; refuses codewords longer than ``limit`` bits."""
    bits = codeword_array(f, p, limit)
    packed = np.packbits(bits, bitorder="little").tobytes()
    return BitString.from_bytes(packed, p.nbar)


def all_message_values(p: CodeParams, limit: int = 1 << 26) -> np.ndarray:
    """Extension values of every message at every point, shape
    ``(2^n, n_points)``, row index = message integer."""
    if (1 << p.n) * p.n_points > limit:
        raise ValueError(f"2^{p.n} messages x {p.n_points} points exceeds {limit}")
    basis = lde_basis(p)
    dtype = np.uint8 if p.s <= 8 else np.uint16
    table = np.zeros((1, p.n_points), dtype=dtype)
    for i in range(p.n):
        table = np.concatenate([table, table ^ basis[i].astype(dtype)])
    return table
