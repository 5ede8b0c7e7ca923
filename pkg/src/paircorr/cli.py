"""Command-line front end.

Exit codes: 0 success or positive finding, 1 clean negative finding,
2 input error, 3 precision failure, 4 internal cross-check failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import re
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from . import formats
from .certify import (
    PreconditionError,
    ProofConstants,
    certificate_search,
    dichotomy_test,
    pipeline_certify,
)
from .exactreal import AlphaParseError, PrecisionError, alpha_parse
from .gapgen import (
    SEQ_HEADER,
    CapExceeded,
    QuasiArithmeticSpec,
    UnsatisfiableSpec,
    family,
    quasi_arithmetic_sequence,
    read_sequence,
    read_witness,
    write_sequence,
    write_witness,
)
from .stats import IntegerSequence, additive_energy, difference_spectrum, pair_correlation_curve, pair_correlation_oracle
from .structure import PreconditionError as StructurePreconditionError
from .structure import gap_cover_search

log = logging.getLogger("paircorr")

SPECTRUM_LIMIT = 20_000

EXIT_OK, EXIT_NEGATIVE, EXIT_INPUT, EXIT_PRECISION, EXIT_MISMATCH = 0, 1, 2, 3, 4


class InputError(ValueError):
    pass


class OracleMismatch(AssertionError):
    pass


@dataclass
class RunConfig:
    command: str
    seq_path: str | None = None
    gen: str | None = None
    alpha: str | None = None
    N: int | None = None
    checkpoints: list[int] = field(default_factory=list)
    s_grid: list[Fraction] = field(default_factory=list)
    d: int | None = None
    C: Fraction | None = None
    K: Fraction = Fraction(1)
    tau: Fraction | None = None
    psi: Fraction | None = None
    fmt: str = "json"
    seed: int = 0
    threads: int = 1
    max_precision_bits: int | None = None

    def __post_init__(self):
        if self.seq_path is not None and self.gen is not None:
            raise InputError("give either --seq or --gen, not both")
        if any(b <= a for a, b in zip(self.checkpoints, self.checkpoints[1:])):
            raise InputError("checkpoints must be strictly increasing")

    def constants(self) -> ProofConstants:
        if self.tau is not None or self.psi is not None:
            if self.tau is None or self.psi is None:
                raise InputError("--tau and --psi go together")
            return ProofConstants.custom(self.tau, self.psi)
        if self.d is None or self.C is None:
            raise InputError("constants need --d and --c (or --tau and --psi)")
        return ProofConstants.from_params(self.d, self.C, self.K)


# ---------------------------------------------------------------------------
# Argument helpers
# ---------------------------------------------------------------------------


def _int_list(text: str) -> list[int]:
    text = text.strip().strip("{}[]")
    if not text:
        return []
    try:
        return [int(x) for x in re.split(r"[,\s]+", text) if x]
    except ValueError:
        raise InputError(f"not an integer list: {text!r}") from None


def _fraction(text: str) -> Fraction:
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError):
        raise InputError(f"not a rational number: {text!r}") from None


def _fraction_list(text: str) -> list[Fraction]:
    return [_fraction(x) for x in text.split(",") if x.strip()]


def _quasi_spec(text: str) -> dict[str, str]:
    out = {}
    for part in text.split(","):
        if "=" not in part:
            raise InputError(f"expected key=value in --quasi, got {part!r}")
        key, val = part.split("=", 1)
        out[key.strip()] = val.strip()
    return out


def _load_sequence(cfg: RunConfig, args: argparse.Namespace, need: int | None) -> IntegerSequence:
    if cfg.seq_path is None and cfg.gen is None:
        raise InputError("no sequence given (use --seq or --gen)")
    if cfg.gen is not None:
        n = need if need is not None else cfg.N
        if n is None:
            raise InputError("--gen needs --n or --checkpoints")
        return family(cfg.gen, n, degree=args.degree, base=args.base, range_=args.range, seed=cfg.seed)
    src = cfg.seq_path
    if os.path.exists(src):
        return read_sequence(src)
    if re.fullmatch(r"\s*[{\[]?[\d,\s]*[}\]]?\s*", src):
        return IntegerSequence(tuple(sorted(set(_int_list(src)))), origin="inline")
    raise InputError(f"no such sequence file: {src}")


def _prefix_length(cfg: RunConfig, seq: IntegerSequence) -> int:
    N = cfg.N if cfg.N is not None else len(seq)
    if N < 1 or N > len(seq):
        raise InputError(f"N = {N} outside 1..{len(seq)}")
    return N


def _emit(text: str, out) -> None:
    out.write(text)


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def cmd_gen(cfg: RunConfig, args: argparse.Namespace, out) -> int:
    if args.quasi:
        kv = _quasi_spec(args.quasi)
        try:
            spec = QuasiArithmeticSpec(int(kv.pop("d")), Fraction(kv.pop("C")), Fraction(kv.pop("K", "1")),
                                       tuple(cfg.checkpoints), seed=cfg.seed)
        except KeyError as exc:
            raise InputError(f"--quasi is missing {exc.args[0]}") from None
        if kv:
            raise InputError(f"unknown --quasi keys: {sorted(kv)}")
        if not cfg.checkpoints:
            raise InputError("--quasi needs --checkpoints")
        inst = quasi_arithmetic_sequence(spec)
        seq, witnesses = inst.sequence, inst.witnesses
    else:
        if not args.family or cfg.N is None:
            raise InputError("gen needs --family and --n, or --quasi and --checkpoints")
        seq = family(args.family, cfg.N, degree=args.degree, base=args.base, range_=args.range, seed=cfg.seed)
        witnesses = None
    if args.out:
        write_sequence(args.out, seq)
        log.info("wrote %d terms to %s", len(seq), args.out)
    else:
        buf = io.StringIO()
        buf.write(f"{SEQ_HEADER} origin={seq.origin}\n")
        buf.writelines(f"{t}\n" for t in seq.terms)
        _emit(buf.getvalue(), out)
    if witnesses is not None:
        wpath = args.witness or (args.out + ".witness.json" if args.out else None)
        if wpath is None:
            raise InputError("--quasi without --out needs --witness")
        write_witness(wpath, witnesses)
        log.info("wrote witnesses for %s to %s", sorted(witnesses), wpath)
    return EXIT_OK


def cmd_r2(cfg: RunConfig, args: argparse.Namespace, out) -> int:
    if cfg.alpha is None:
        raise InputError("r2 needs --alpha")
    alpha = alpha_parse(cfg.alpha)
    seq = _load_sequence(cfg, args, cfg.N)
    N = _prefix_length(cfg, seq)
    curve = pair_correlation_curve(seq, alpha, N, cfg.s_grid)
    if args.oracle:
        terms = seq.prefix(N)
        for s, r in curve.samples:
            ref = pair_correlation_oracle(terms, alpha, s)
            if ref != r:
                raise OracleMismatch(f"R2({s}) fast path {r} != oracle {ref}")
    if cfg.fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["s", "r2", "s_exact", "r2_exact"])
        for s, r in curve.samples:
            w.writerow([formats.decimal_string(s), formats.decimal_string(r),
                        formats.exact_string(s), formats.exact_string(r)])
        _emit(buf.getvalue(), out)
    else:
        doc = {"N": N, "alpha": alpha.spec(),
               "samples": [{"s": formats.real_json(s), "r2": formats.real_json(r)} for s, r in curve.samples]}
        _emit(formats.dumps(doc), out)
    return EXIT_OK


def cmd_energy(cfg: RunConfig, args: argparse.Namespace, out) -> int:
    seq = _load_sequence(cfg, args, cfg.N)
    N = _prefix_length(cfg, seq)
    _emit(formats.dumps({"N": N, "energy": additive_energy(seq.prefix(N))}), out)
    return EXIT_OK


def cmd_spectrum(cfg: RunConfig, args: argparse.Namespace, out) -> int:
    if cfg.N is not None and cfg.N > SPECTRUM_LIMIT and not args.force:
        raise InputError(f"N = {cfg.N} > {SPECTRUM_LIMIT}; pass --force")
    seq = _load_sequence(cfg, args, cfg.N)
    N = _prefix_length(cfg, seq)
    if N > SPECTRUM_LIMIT and not args.force:
        raise InputError(f"N = {N} > {SPECTRUM_LIMIT}; pass --force")
    spec = difference_spectrum(seq, N, workers=cfg.threads)
    doc = {"N": N, "sum_of_squares": spec.sum_of_squares(),
           "spectrum": {str(v): spec[v] for v in sorted(spec)}}
    _emit(formats.dumps(doc), out)
    return EXIT_OK


def cmd_certify(cfg: RunConfig, args: argparse.Namespace, out) -> int:
    if cfg.alpha is None:
        raise InputError("certify needs --alpha")
    if args.pipeline and not args.witness:
        raise InputError("--pipeline needs --witness")
    alpha = alpha_parse(cfg.alpha)
    constants = cfg.constants()
    seq = _load_sequence(cfg, args, cfg.N)
    N = _prefix_length(cfg, seq)
    if args.pipeline:
        if not os.path.exists(args.witness):
            raise InputError(f"no such witness file: {args.witness}")
        reps = read_witness(args.witness)
        rep = reps.get(N, reps.get(None))
        if rep is None:
            raise InputError(f"witness file has no entry for N = {N}")
        cert = pipeline_certify(rep, seq, alpha, N, constants)
    else:
        spectrum = difference_spectrum(seq, N, workers=cfg.threads)
        cert = certificate_search(seq, alpha, N, constants, spectrum=spectrum)
    if cert is None:
        _emit("none\n", out)
        return EXIT_NEGATIVE
    _emit(formats.dumps(formats.certificate_json(cert)), out)
    return EXIT_OK


def cmd_verdict(cfg: RunConfig, args: argparse.Namespace, out) -> int:
    if cfg.alpha is None:
        raise InputError("verdict needs --alpha")
    if not cfg.checkpoints:
        raise InputError("verdict needs a non-empty --checkpoints list")
    alpha = alpha_parse(cfg.alpha)
    constants = cfg.constants()
    seq = _load_sequence(cfg, args, cfg.checkpoints[-1])
    verdict = dichotomy_test(seq, alpha, cfg.checkpoints, constants)
    _emit(formats.dumps(formats.verdict_json(verdict)), out)
    return EXIT_OK if verdict.non_poissonian else EXIT_NEGATIVE


def cmd_cover(cfg: RunConfig, args: argparse.Namespace, out) -> int:
    A = _int_list(args.set)
    if not A:
        raise InputError("cover needs a non-empty --set")
    P = gap_cover_search(A, args.d_max, _fraction(args.k_bound))
    if P is None:
        _emit("none\n", out)
        return EXIT_NEGATIVE
    _emit(formats.dumps(P.to_dict()), out)
    return EXIT_OK


COMMANDS = {
    "gen": cmd_gen,
    "r2": cmd_r2,
    "energy": cmd_energy,
    "spectrum": cmd_spectrum,
    "certify": cmd_certify,
    "verdict": cmd_verdict,
    "cover": cmd_cover,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="paircorr", description="Pair correlations and additive structure of a_n alpha mod 1.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, seq=True, alpha=False, constants=False):
        sp.add_argument("--threads", type=int, default=1)
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--max-precision-bits", type=int, default=None,
                        help="cap on precision escalation (overrides PAIRCORR_MAX_PRECISION_BITS)")
        if seq:
            sp.add_argument("--seq", help="sequence file, or an inline list such as {1,2,3}")
            sp.add_argument("--gen", help="generator family: primes, poly, lacunary, random, ap")
            sp.add_argument("--range", type=int, default=None)
            sp.add_argument("--degree", type=int, default=2)
            sp.add_argument("--base", type=int, default=2)
            sp.add_argument("--n", type=int, default=None)
        if alpha:
            sp.add_argument("--alpha", required=False, help="p/q, sqrt:D, phi or DEC@BITS")
        if constants:
            sp.add_argument("--d", type=int)
            sp.add_argument("--c", type=str)
            sp.add_argument("--k", type=str, default="1")
            sp.add_argument("--tau", type=str)
            sp.add_argument("--psi", type=str)

    sp = sub.add_parser("gen", help="write a sequence file")
    common(sp, seq=False)
    sp.add_argument("--family")
    sp.add_argument("--n", type=int)
    sp.add_argument("--range", type=int, default=None)
    sp.add_argument("--degree", type=int, default=2)
    sp.add_argument("--base", type=int, default=2)
    sp.add_argument("--quasi", help="e.g. d=2,C=0.5,K=1")
    sp.add_argument("--checkpoints", default="")
    sp.add_argument("--out")
    sp.add_argument("--witness")

    sp = sub.add_parser("r2", help="pair correlation curve")
    common(sp, alpha=True)
    sp.add_argument("--s", default="")
    sp.add_argument("--oracle", action="store_true", help="recheck every value with the all-pairs oracle")
    sp.add_argument("--format", choices=["csv", "json"], default="csv")

    sp = sub.add_parser("energy", help="additive energy of the first N terms")
    common(sp)

    sp = sub.add_parser("spectrum", help="difference spectrum A_N(v)")
    common(sp)
    sp.add_argument("--force", action="store_true")

    sp = sub.add_parser("certify", help="search for a non-Poissonian certificate")
    common(sp, alpha=True, constants=True)
    sp.add_argument("--pipeline", action="store_true")
    sp.add_argument("--witness")

    sp = sub.add_parser("verdict", help="window dichotomy over checkpoints")
    common(sp, alpha=True, constants=True)
    sp.add_argument("--checkpoints", default="")

    sp = sub.add_parser("cover", help="exhaustive GAP cover of a small set")
    common(sp, seq=False)
    sp.add_argument("--set", required=True)
    sp.add_argument("--d-max", type=int, default=2)
    sp.add_argument("--k-bound", default="1")
    return p


def config_from_args(args: argparse.Namespace) -> RunConfig:
    get = lambda name: getattr(args, name, None)  # noqa: E731
    return RunConfig(
        command=args.command,
        seq_path=get("seq"),
        gen=get("gen"),
        alpha=get("alpha"),
        N=get("n"),
        checkpoints=_int_list(get("checkpoints") or ""),
        s_grid=_fraction_list(get("s") or ""),
        d=get("d"),
        C=_fraction(args.c) if get("c") is not None else None,
        K=_fraction(get("k") or "1"),
        tau=_fraction(args.tau) if get("tau") is not None else None,
        psi=_fraction(args.psi) if get("psi") is not None else None,
        fmt=get("format") or "json",
        seed=args.seed,
        threads=args.threads,
        max_precision_bits=args.max_precision_bits,
    )


def main(argv: Sequence[str] | None = None, out=None) -> int:
    out = out if out is not None else sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    saved = os.environ.get("PAIRCORR_MAX_PRECISION_BITS")
    try:
        cfg = config_from_args(args)
        if cfg.max_precision_bits is not None:
            os.environ["PAIRCORR_MAX_PRECISION_BITS"] = str(cfg.max_precision_bits)
        return COMMANDS[cfg.command](cfg, args, out)
    except PrecisionError as exc:
        print(f"precision failure: {exc}", file=sys.stderr)
        return EXIT_PRECISION
    except OracleMismatch as exc:
        print(f"oracle mismatch: {exc}", file=sys.stderr)
        return EXIT_MISMATCH
    except (InputError, AlphaParseError, PreconditionError, StructurePreconditionError, CapExceeded,
            UnsatisfiableSpec, ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    finally:
        if saved is None:
            os.environ.pop("PAIRCORR_MAX_PRECISION_BITS", None)
        else:
            os.environ["PAIRCORR_MAX_PRECISION_BITS"] = saved


def main_entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    main_entry()
