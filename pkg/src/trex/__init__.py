"""Trevisan's extractor over a locally encodable Reed-Muller/Hadamard code,
with brute-force verifiers, the reconstruction game and random-access-code
experiments."""

from trex.bits import (
    BitString,
    FiniteDist,
    FlatSource,
    flat_decompose_check,
    inner_product_mod2,
    min_entropy,
    stat_distance,
)
from trex.gf2e import FieldCtx, FieldElement, field
from trex.designs import DesignFamily, make_design, slice_seed, verify_design
from trex.code import CodeParams, code_params, encode_all, encode_bit, lde_eval
from trex.trevisan import (
    ExtractorParams,
    Infeasible,
    bit_select,
    extract,
    leftover_hash,
    nw_generate,
    plan_params,
    toy_params,
)

__version__ = "0.1.0"

__all__ = [
    "BitString",
    "CodeParams",
    "DesignFamily",
    "ExtractorParams",
    "FieldCtx",
    "FieldElement",
    "FiniteDist",
    "FlatSource",
    "Infeasible",
    "bit_select",
    "code_params",
    "encode_all",
    "encode_bit",
    "extract",
    "field",
    "flat_decompose_check",
    "inner_product_mod2",
    "lde_eval",
    "leftover_hash",
    "make_design",
    "min_entropy",
    "nw_generate",
    "plan_params",
    "slice_seed",
    "stat_distance",
    "toy_params",
    "verify_design",
]
