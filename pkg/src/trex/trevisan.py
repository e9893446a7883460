"""Trevisan's extractor: the NW generator run on the encoded source,
``TR(f, y) = NW^{C(f)}(y)``, together with the parameter planner and two
classical baselines (Toeplitz hashing and single-bit selection)."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np

from trex.bits import BitString
from trex.code import (
    C_FIELD,
    CodeParams,
    code_params,
    codeword_array,
    encode_bit,
    _min_side,
)
from trex.designs import DesignFamily, default_intersection, make_design, slice_value

C_EXPONENT = 15
# Codewords up to this length are materialised once per source and reused.
CODEWORD_CACHE_LIMIT = 1 << 16


@dataclass(frozen=True)
class ExtractorParams:
    n: int
    k: float
    b: float
    eps: float
    m: int
    design: DesignFamily
    code: CodeParams
    c_exponent: float = C_EXPONENT
    constant_multiplier: float = 1.0

    def __post_init__(self) -> None:
        if self.design.m != self.m:
            raise ValueError(f"design has {self.design.m} sets, expected m={self.m}")
        if self.design.l != self.code.index_bits:
            raise ValueError(
                f"design set size {self.design.l} != log2(nbar) = {self.code.index_bits}"
            )
        if self.code.n != self.n:
            raise ValueError(f"code message length {self.code.n} != n={self.n}")

    @property
    def t(self) -> int:
        return self.design.t

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "k": self.k,
            "b": self.b,
            "eps": self.eps,
            "m": self.m,
            "t": self.t,
            "c_exponent": self.c_exponent,
            "constant_multiplier": self.constant_multiplier,
            "code": self.code.to_dict(),
            "design": self.design.to_dict(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> ExtractorParams:
        return cls(
            n=int(data["n"]),
            k=data["k"],
            b=data["b"],
            eps=float(data["eps"]),
            m=int(data["m"]),
            design=DesignFamily.from_dict(data["design"]),
            code=CodeParams.from_dict(data["code"]),
            c_exponent=data.get("c_exponent", C_EXPONENT),
            constant_multiplier=data.get("constant_multiplier", 1.0),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


@dataclass(frozen=True)
class Infeasible:
    """Planner outcome when the requested sizes yield no extractor."""

    reason: str
    m_formula: float
    inputs: dict

    def to_dict(self) -> dict:
        return {
            "feasible": False,
            "reason": self.reason,
            "m_formula": self.m_formula,
            "inputs": self.inputs,
        }


def output_length_formula(
    n: int, k: float, b: float, eps: float, c_exponent: float, constant_multiplier: float
) -> float:
    """``multiplier * (eps / log2 n) * (k / b)^(1/c)``."""
    return constant_multiplier * (eps / math.log2(n)) * (k / b) ** (1.0 / c_exponent)


def plan_params(
    n: int,
    k: float,
    b: float,
    eps: float,
    c_exponent: float = C_EXPONENT,
    constant_multiplier: float = 1.0,
    c_field: float = C_FIELD,
) -> ExtractorParams | Infeasible:
    """Turn ``(n, k, b, eps)`` into concrete extractor sizes.

    The output length comes from the asymptotic formula with every hidden
    constant exposed as an argument; nothing is assumed about their true
    values.  The code is built for ``delta = eps / (2m)`` and the design has
    one set per output bit, each of size ``log2(nbar)``.
    """
    if not 0 < eps < 1:
        raise ValueError(f"eps={eps} outside (0, 1)")
    if not 0 < b <= k <= n:
        raise ValueError(f"need 0 < b <= k <= n, got b={b}, k={k}, n={n}")
    if n < 2:
        raise ValueError("n must be at least 2")
    if c_exponent <= 0 or constant_multiplier <= 0:
        raise ValueError("c_exponent and constant_multiplier must be positive")
    inputs = {
        "n": n,
        "k": k,
        "b": b,
        "eps": eps,
        "c_exponent": c_exponent,
        "constant_multiplier": constant_multiplier,
        "c_field": c_field,
    }
    m_formula = output_length_formula(n, k, b, eps, c_exponent, constant_multiplier)
    m = math.floor(m_formula)
    if m < 1:
        return Infeasible(
            reason=f"output length formula gives {m_formula:.6g} < 1 bit at this scale",
            m_formula=m_formula,
            inputs=inputs,
        )
    delta = eps / (2 * m)
    try:
        code = code_params(n, delta, c_field)
    except ValueError as exc:
        return Infeasible(reason=str(exc), m_formula=m_formula, inputs=inputs)
    design = make_design(m, code.index_bits, default_intersection(m))
    return ExtractorParams(
        n=n,
        k=k,
        b=b,
        eps=eps,
        m=m,
        design=design,
        code=code,
        c_exponent=c_exponent,
        constant_multiplier=constant_multiplier,
    )


def toy_params(n: int = 16, m: int = 2, eps: float = 0.5, d: int = 2) -> ExtractorParams:
    """Desk-scale instance: the smallest field that interpolation allows,
    ignoring the list-decoding field-size floor."""
    h = _min_side(n, d)
    degree = d * (h - 1)
    s = max(1, (degree).bit_length())
    code = CodeParams(n=n, delta=eps / (2 * m), s=s, d=d, h=h, c_field=0.0)
    design = make_design(m, code.index_bits, default_intersection(m))
    return ExtractorParams(n=n, k=n, b=1, eps=eps, m=m, design=design, code=code)


@lru_cache(maxsize=256)
def _cached_codeword(f: BitString, code: CodeParams) -> np.ndarray:
    word = codeword_array(f, code)
    word.flags.writeable = False
    return word


def codeword_lookup(f: BitString, code: CodeParams, local: bool = False) -> Callable[[int], int]:
    """Position -> codeword bit, cached for short codes unless ``local``."""
    if not local and code.nbar <= CODEWORD_CACHE_LIMIT:
        word = _cached_codeword(f, code)
        return lambda j: int(word[j])
    return lambda j: encode_bit(f, code, j)


def nw_generate(g: Callable[[int], int], y: BitString, design: DesignFamily) -> BitString:
    """NW generator: output bit ``i`` is ``g`` at the seed restricted to
    set ``i``, read as an integer with the smallest index as bit 0."""
    if y.length != design.t:
        raise ValueError(f"seed has {y.length} bits, design needs {design.t}")
    out = 0
    for i, s in enumerate(design.sets):
        out |= (g(slice_value(y.value, s)) & 1) << i
    return BitString(out, design.m)


def extract(f: BitString, y: BitString, p: ExtractorParams, local: bool = False) -> BitString:
    if f.length != p.n:
        raise ValueError(f"source has {f.length} bits, params expect {p.n}")
    if y.length != p.t:
        raise ValueError(f"seed has {y.length} bits, params expect {p.t}")
    return nw_generate(codeword_lookup(f, p.code, local), y, p.design)


def leftover_hash(x: BitString, seed: BitString, m: int) -> BitString:
    """Toeplitz hash over GF(2): ``out_i = sum_j seed_{i+j} x_j mod 2``."""
    n = x.length
    if seed.length != n + m - 1:
        raise ValueError(f"Toeplitz seed needs {n + m - 1} bits, got {seed.length}")
    out = 0
    for i in range(m):
        out |= (bin((seed.value >> i) & x.value).count("1") & 1) << i
    return BitString(out, m)


def bit_select(x: BitString, i: int | BitString) -> int:
    """``x_i``; the seed may be given as a bit string read as an integer."""
    idx = i.value if isinstance(i, BitString) else i
    if not 0 <= idx < x.length:
        raise IndexError(f"index {idx} out of range for length {x.length}")
    return x[idx]
