"""``trex`` command-line entry point.

Exit codes: 0 success, 1 usage or input error, 2 infeasible parameters,
3 verification or reconstruction failure.  Reports are JSON on stdout with
sorted keys; raw bit payloads are binary files, LSB-first within bytes.
All randomness for one invocation flows from ``--rng-seed``.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from pathlib import Path
from typing import Sequence

import numpy as np

from trex.bits import BitString
from trex.code import C_FIELD, CodeParams, code_params, codeword_array, encode_bit
from trex.designs import make_design, verify_design
from trex.gf2e import MAX_DEGREE, modulus_table
from trex.trevisan import (
    C_EXPONENT,
    ExtractorParams,
    Infeasible,
    extract,
    plan_params,
    toy_params,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INFEASIBLE = 2
EXIT_FAILED = 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse would exit with status 2
        raise UsageError(f"{self.format_usage()}{self.prog}: error: {message}")


def _rng(seed: int, component: int) -> np.random.Generator:
    """Independent stream ``component`` of the invocation's generator."""
    return np.random.default_rng(np.random.SeedSequence(seed).spawn(component + 1)[component])


def _emit(report: dict) -> None:
    sys.stdout.write(json.dumps(report, sort_keys=True, indent=2) + "\n")


def _threads(args) -> int:
    raw = args.threads if args.threads is not None else os.environ.get("TREX_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        raise UsageError(f"thread count {raw!r} is not an integer")
    if n < 1:
        raise UsageError("thread count must be at least 1")
    return n


def _read_bits(path: str, length: int) -> BitString:
    data = Path(path).read_bytes()
    if len(data) * 8 < length:
        raise UsageError(f"{path} holds {len(data) * 8} bits, need {length}")
    return BitString.from_bytes(data[: math.ceil(length / 8)], length)


def _read_seed(text: str, length: int) -> BitString:
    """Hex string or path to a raw file; the first ``length`` bits are used."""
    if os.path.exists(text):
        return _read_bits(text, length)
    try:
        data = bytes.fromhex(text)
    except ValueError:
        raise UsageError(f"seed {text!r} is neither a file nor a hex string")
    if len(data) * 8 < length:
        raise UsageError(f"seed has {len(data) * 8} bits, need {length}")
    return BitString.from_bytes(data[: math.ceil(length / 8)], length)


def _load_json(path: str) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read JSON from {path}: {exc}")


# --------------------------------------------------------------------------
# subcommands


def cmd_plan(args) -> int:
    try:
        res = plan_params(args.n, args.k, args.b, args.eps, args.c, args.mult, args.c_field)
    except ValueError as exc:
        raise UsageError(str(exc))
    if isinstance(res, Infeasible):
        _emit(res.to_dict())
        return EXIT_INFEASIBLE
    report = res.to_dict()
    report["feasible"] = True
    if args.out:
        Path(args.out).write_text(json.dumps(report, sort_keys=True))
    _emit(report)
    return EXIT_OK


def cmd_design(args) -> int:
    try:
        d = make_design(args.m, args.l, args.r)
    except ValueError as exc:
        raise UsageError(str(exc))
    if args.out:
        Path(args.out).write_text(d.to_json())
    _emit(d.to_dict())
    return EXIT_OK


def _code_from_args(args) -> CodeParams:
    try:
        return code_params(args.n, args.delta, args.c_field)
    except ValueError as exc:
        raise UsageError(str(exc))


def cmd_encode(args) -> int:
    p = _code_from_args(args)
    f = _read_bits(args.input, args.n)
    try:
        word = codeword_array(f, p)
    except ValueError as exc:
        raise UsageError(str(exc))
    packed = np.packbits(word, bitorder="little").tobytes()
    if args.out:
        Path(args.out).write_bytes(packed)
    _emit({"params": p.to_dict(), "weight": int(word.sum()), "out": args.out})
    return EXIT_OK


def cmd_encode_bit(args) -> int:
    p = _code_from_args(args)
    f = _read_bits(args.input, args.n)
    try:
        bit = encode_bit(f, p, args.j)
    except IndexError as exc:
        raise UsageError(str(exc))
    _emit({"params": p.to_dict(), "j": args.j, "bit": bit})
    return EXIT_OK


def _load_params(path: str, design_path: str | None = None) -> ExtractorParams:
    data = _load_json(path)
    if data.get("feasible") is False:
        raise UsageError(f"{path} describes infeasible parameters")
    if design_path:
        data = dict(data, design=_load_json(design_path))
    try:
        return ExtractorParams.from_dict(data)
    except (KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"bad parameter file {path}: {exc}")


def cmd_extract(args) -> int:
    p = _load_params(args.params, args.design)
    f = _read_bits(args.input, p.n)
    y = _read_seed(args.seed, p.t)
    z = extract(f, y, p, local=args.local)
    if args.out:
        Path(args.out).write_bytes(z.to_bytes())
    _emit({"m": p.m, "t": p.t, "n": p.n, "output": str(z), "out": args.out})
    return EXIT_OK


def cmd_verify(args) -> int:
    from trex.verify import (
        Extractor,
        classical_storage_advantage,
        hash_bound_holds,
        worst_flat_source,
    )

    if not 0 <= args.k <= args.n:
        raise UsageError(f"need 0 <= k <= n, got k={args.k}, n={args.n}")
    if args.extractor == "hash":
        E = Extractor.hash(args.n, args.m)
    elif args.extractor == "bitselect":
        E = Extractor.bitselect(args.n)
    else:
        try:
            E = Extractor.trevisan(toy_params(args.n, args.m, 0.5, args.d))
        except ValueError as exc:
            raise UsageError(str(exc))
    rng = _rng(args.rng_seed, 0)
    try:
        w = worst_flat_source(E, args.n, args.k, args.mode, args.budget, rng, args.samples)
        storage = None
        if args.b > 0:
            storage = classical_storage_advantage(E, w.source, args.b, rng=_rng(args.rng_seed, 1))
    except ValueError as exc:
        raise UsageError(str(exc))
    report = {
        "extractor": E.name,
        "n": E.n,
        "t": E.t,
        "m": E.m,
        "k": args.k,
        "b": args.b,
        "rng_seed": args.rng_seed,
        **w.to_dict(),
    }
    ok = True
    if storage is not None:
        # Storage adversary is searched on the worst-distance witness only.
        report["storage"] = storage.to_dict()
    if E.name == "hash" and float(args.k).is_integer():
        report["hash_bound"] = 0.5 * 2 ** ((E.m - args.k) / 2)
        ok = hash_bound_holds(w.distance, E.m, int(args.k))
    if args.eps is not None:
        worst = storage.advantage if storage is not None else w.distance
        ok = ok and float(worst) <= args.eps
    report["passed"] = ok
    _emit(report)
    return EXIT_OK if ok else EXIT_FAILED


def cmd_reconstruct(args) -> int:
    from trex.reconstruction import (
        ReconstructionBudget,
        exact_match_distinguisher,
        worst_case_reconstruct,
    )

    p = _load_params(args.params) if args.params else toy_params()
    if p.t > 62:
        raise UsageError(f"seed length {p.t} too long for the reconstruction game")
    rng = _rng(args.rng_seed, 0)
    budgets = ReconstructionBudget(search=args.search)
    runs = []
    for _ in range(args.trials):
        f = BitString.random(p.n, rng)
        T = exact_match_distinguisher(f, p)
        rep = worst_case_reconstruct(T, f, p, budgets, rng)
        runs.append(rep.to_dict())
    successes = sum(r["success"] for r in runs)
    rate = successes / args.trials if args.trials else 0.0
    report = {
        "params": {"n": p.n, "m": p.m, "t": p.t, "eps": p.eps, "nbar": p.code.nbar},
        "rng_seed": args.rng_seed,
        "trials": args.trials,
        "successes": successes,
        "success_rate": rate,
        "runs": runs,
    }
    _emit(report)
    return EXIT_OK if rate >= args.min_success else EXIT_FAILED


def cmd_rac(args) -> int:
    from trex import rac

    rng = _rng(args.rng_seed, 0)
    try:
        if args.experiment == "amplify":
            res = rac.amplify(args.delta, args.eps, args.trials, rng, args.rounds).to_dict()
            ok = res["measured_success"] >= res["exact_success"] - res["slack"]
        elif args.experiment == "regev":
            res = rac.regev_experiment(args.n, args.trials, rng, args.range).to_dict()
            ok = res["success"] >= 2 / 3
        else:
            res = rac.avgcase_counterexample(args.n, args.trials, rng).to_dict()
            ok = res["average_success_float"] >= 2 / 3
    except ValueError as exc:
        raise UsageError(str(exc))
    res.update(experiment=args.experiment, rng_seed=args.rng_seed, passed=ok)
    _emit(res)
    return EXIT_OK if ok else EXIT_FAILED


def cmd_field_table(args) -> int:
    if not 1 <= args.max_s <= MAX_DEGREE:
        raise UsageError(f"max-s must lie in [1, {MAX_DEGREE}]")
    for s, mod in modulus_table(args.max_s):
        sys.stdout.write(f"s={s} modulus={bin(mod)}\n")
    return EXIT_OK


def cmd_bench(args) -> int:
    """Wall-clock timings; the only report that is not reproducible."""
    rng = _rng(args.rng_seed, 0)
    timings = {}
    start = time.perf_counter()
    d = make_design(args.m, args.l)
    timings["design_s"] = time.perf_counter() - start
    timings["design_valid"] = verify_design(d)
    p = toy_params()
    f = BitString.random(p.n, rng)
    start = time.perf_counter()
    for _ in range(args.reps):
        extract(f, BitString.random(p.t, rng), p)
    timings["extract_toy_s"] = (time.perf_counter() - start) / args.reps
    start = time.perf_counter()
    for _ in range(args.reps):
        encode_bit(f, p.code, int(rng.integers(p.code.nbar)))
    timings["encode_bit_toy_s"] = (time.perf_counter() - start) / args.reps
    _emit({"design": {"m": args.m, "l": args.l, "t": d.t}, "reps": args.reps, **timings})
    return EXIT_OK


# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--rng-seed", type=int, default=0)
    common.add_argument("--threads", type=int, default=None,
                        help="worker cap (also TREX_THREADS); runs are single-process")

    parser = _Parser(prog="trex", description="Trevisan extractor toolkit")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("plan", parents=[common], help="extractor parameters")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=float, required=True)
    p.add_argument("--b", type=float, required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--c", type=float, default=C_EXPONENT)
    p.add_argument("--mult", type=float, default=1.0)
    p.add_argument("--c-field", type=float, default=C_FIELD)
    p.add_argument("--out")
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("design", parents=[common], help="NW design as JSON")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--l", type=int, required=True)
    p.add_argument("--r", type=int, default=None)
    p.add_argument("--out")
    p.set_defaults(func=cmd_design)

    for name, func in (("encode", cmd_encode), ("encode-bit", cmd_encode_bit)):
        what = "full codeword" if name == "encode" else "one codeword bit"
        p = sub.add_parser(name, parents=[common], help=f"{what} of a raw input file")
        p.add_argument("--n", type=int, required=True)
        p.add_argument("--delta", type=float, required=True)
        p.add_argument("--c-field", type=float, default=C_FIELD)
        p.add_argument("--in", dest="input", required=True)
        if name == "encode":
            p.add_argument("--out")
        else:
            p.add_argument("--j", type=int, required=True)
        p.set_defaults(func=func)

    p = sub.add_parser("extract", parents=[common], help="run the extractor")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--seed", required=True, help="hex string or raw seed file")
    p.add_argument("--params", required=True, help="JSON from `trex plan`")
    p.add_argument("--design", help="design JSON replacing the one in --params")
    p.add_argument("--local", action="store_true", help="encode bits on demand")
    p.add_argument("--out")
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("verify", parents=[common], help="worst flat source search")
    p.add_argument("--extractor", choices=["trevisan", "hash", "bitselect"], required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=float, required=True)
    p.add_argument("--b", type=int, default=0)
    p.add_argument("--m", type=int, default=1)
    p.add_argument("--d", type=int, default=1, help="cube dimension of the toy code")
    p.add_argument("--mode", choices=["exhaustive", "sampled"], default="exhaustive")
    p.add_argument("--budget", type=int, default=100_000)
    p.add_argument("--samples", type=int, default=2000)
    p.add_argument("--eps", type=float, default=None, help="fail (exit 3) above this")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("reconstruct", parents=[common], help="reconstruction game")
    p.add_argument("--params", help="JSON parameters (default: n=16 toy instance)")
    p.add_argument("--trials", type=int, default=10)
    p.add_argument("--search", type=int, default=64)
    p.add_argument("--min-success", type=float, default=0.9)
    p.set_defaults(func=cmd_reconstruct)

    p = sub.add_parser("rac", parents=[common], help="random-access-code experiments")
    p.add_argument("--experiment", choices=["amplify", "regev", "avgcase"], required=True)
    p.add_argument("--n", type=int, default=64)
    p.add_argument("--trials", type=int, default=10_000)
    p.add_argument("--delta", type=float, default=0.1)
    p.add_argument("--eps", type=float, default=0.01)
    p.add_argument("--rounds", type=int, default=None)
    p.add_argument("--range", type=int, default=10)
    p.set_defaults(func=cmd_rac)

    p = sub.add_parser("field-table", parents=[common], help="default moduli")
    p.add_argument("--max-s", type=int, default=MAX_DEGREE)
    p.set_defaults(func=cmd_field_table)

    p = sub.add_parser("bench", parents=[common], help="timings")
    p.add_argument("--m", type=int, default=64)
    p.add_argument("--l", type=int, default=16)
    p.add_argument("--reps", type=int, default=100)
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        if not argv:
            raise UsageError(parser.format_help())
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError(parser.format_help())
        _threads(args)
        return args.func(args)
    except UsageError as exc:
        sys.stderr.write(str(exc).rstrip() + "\n")
        return EXIT_USAGE
    except OSError as exc:
        sys.stderr.write(f"trex: {exc}\n")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
