"""Command-line entry point: ``floorrelu <command> ...``.

Exit codes: 0 success, 1 verification failure, 2 usage or input error.
"""
from __future__ import annotations

import argparse
import sys
from fractions import Fraction
from pathlib import Path
from typing import Optional, Sequence

from . import bounds as B
from .bitextract import build_bit_locator, build_block_extractor, build_point_fitter, oracle_extract
from .certified import as_fraction
from .constructor import build_theorem1, build_theorem2, wrap_domain
from .dyadic import BitString, Dyadic
from .modulus import ModulusSpec
from .network import audit, eval_exact, eval_float
from .registry import from_identifier, lookup, registry
from .serialize import (
    SchemaError,
    certificate_from_json,
    certificate_to_json,
    dumps,
    load_json,
    network_from_json,
    network_to_json,
    report_to_csv,
    report_to_json,
    save_json,
)
from .verification import (
    check_certificate,
    exhaustive_bit_check,
    float_divergence_probe,
    memorization_demo,
    random_points,
)

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _emit(obj) -> None:
    sys.stdout.write(dumps(obj))


def _dyadic_arg(text: str) -> Dyadic:
    try:
        return Dyadic.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _param_arg(text: str) -> tuple[str, str]:
    if "=" not in text:
        raise argparse.ArgumentTypeError(f"expected key=value, got {text!r}")
    k, v = text.split("=", 1)
    return k.strip(), v.strip()


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def _target(args) -> "object":
    params = dict(args.param or [])
    M = args.M.to_fraction() if getattr(args, "M", None) is not None else None
    return lookup(args.target, args.d, M, **params)


# -- commands ----------------------------------------------------------------


def cmd_build(args) -> int:
    f = _target(args)
    if args.M is not None:
        net, cert = wrap_domain(f, args.M, args.N, args.L, args.theorem, args.guard_bits)
    else:
        builder = build_theorem1 if args.theorem == 1 else build_theorem2
        net, cert = builder(f, args.N, args.L, args.guard_bits)
    save_json(args.out, network_to_json(net))
    cj = certificate_to_json(cert)
    if args.cert:
        save_json(args.cert, cj)
    _emit({"width": cert.width, "depth": cert.depth, "nonzero_params": cert.nonzero_params,
           "error_bound": float(cert.error_bound), "network": str(args.out),
           "certificate": str(args.cert) if args.cert else None})
    return EXIT_OK


def _read_points(args, d: int) -> list[tuple[Dyadic, ...]]:
    pts = []
    for text in args.x or []:
        vals = tuple(_dyadic_arg(v) for v in text.split(","))
        if len(vals) != d:
            raise UsageError(f"point {text!r} has {len(vals)} coordinates, network takes {d}")
        pts.append(vals)
    if args.samples:
        pts += random_points(d, args.samples, args.seed)
    if not pts:
        raise UsageError("give --x points or --samples")
    return pts


def cmd_eval(args) -> int:
    net = network_from_json(load_json(args.net))
    rows = []
    for x in _read_points(args, net.input_dim):
        if args.mode == "exact":
            y = [v.to_json() | {"float": float(v)} for v in eval_exact(net, x)]
        else:
            y = eval_float(net, [float(v) for v in x])
        rows.append({"x": [str(v) for v in x], "y": y})
    _emit({"mode": args.mode, "results": rows})
    return EXIT_OK


def cmd_verify(args) -> int:
    net = network_from_json(load_json(args.net))
    cert = certificate_from_json(load_json(args.cert))
    ident = dict(cert.target)
    f = from_identifier(ident)
    rep = audit(net)
    if (rep.width, rep.depth) != (cert.width, cert.depth):
        _emit({"passed": False, "reason": "audited size differs from certificate",
               "audited": rep.as_dict(), "certified": {"width": cert.width, "depth": cert.depth}})
        return EXIT_FAIL
    report = check_certificate(net, f, cert, samples=args.samples, seed=args.seed, grid=args.grid,
                               keep_rows=bool(args.csv))
    out = report_to_json(report)
    if args.report:
        save_json(args.report, out)
    if args.csv:
        Path(args.csv).write_text(report_to_csv(report, net.input_dim))
    _emit(out)
    return EXIT_OK if report.passed else EXIT_FAIL


def cmd_extract(args) -> int:
    if not args.bits:
        if not args.check:
            raise UsageError("--bits is required unless --check sweeps all patterns")
        param = args.J if args.mode == "block" else args.L
        if param is None:
            raise UsageError("block mode needs --J, locator and fitter modes need --L")
        summary = exhaustive_bit_check(args.mode, args.N, param, cap=args.cap,
                                       random_count=args.samples, seed=args.seed)
        _emit({"mode": args.mode, "N": args.N, "param": param, "exhaustive": summary.exhaustive,
               "patterns": summary.patterns, "evaluations": summary.evaluations,
               "failures": [list(f) for f in summary.failures],
               "check": "pass" if summary.passed else "fail"})
        return EXIT_OK if summary.passed else EXIT_FAIL
    bits = BitString.from_str(args.bits)
    N = args.N
    if args.mode == "block":
        if args.J is None or len(bits) != N * args.J:
            raise UsageError("block mode needs --J with exactly N*J bits")
        net = build_block_extractor(N, args.J)
        idx = range(1, N + 1)
        got = {n: eval_exact(net, (bits.value(), Dyadic(n)))[0] for n in idx}
        want = {n: oracle_extract(bits, (n - 1) * args.J + 1, n * args.J).value() for n in idx}
    else:
        if args.L is None or len(bits) != N ** args.L:
            raise UsageError(f"{args.mode} mode needs --L with exactly N^L bits")
        idx = range(1, N ** args.L + 1)
        if args.mode == "locator":
            net = build_bit_locator(N, args.L)
            got = {m: eval_exact(net, (bits.value(), Dyadic(m)))[0] for m in idx}
            want = {m: oracle_extract(bits, m, m).value() for m in idx}
        else:
            net = build_point_fitter(N, args.L, bits)
            got = {m: eval_exact(net, (Dyadic(m),))[0] for m in idx}
            want = {m: Dyadic(bits.bits[m - 1]) for m in idx}
    if args.index is not None:
        if args.index not in got:
            raise UsageError(f"index {args.index} out of range")
        idx = [args.index]
    rep = audit(net)
    out = {"mode": args.mode, "width": rep.width, "depth": rep.depth,
           "values": {str(i): str(got[i]) for i in idx}}
    ok = all(got[i] == want[i] for i in idx)
    if args.check:
        out["check"] = "pass" if ok else "fail"
    _emit(out)
    return EXIT_FAIL if args.check and not ok else EXIT_OK


def _modulus_from_args(args) -> ModulusSpec:
    if args.holder:
        return ModulusSpec.holder(args.holder[0], args.holder[1])
    return lookup(args.target, args.d).modulus


def cmd_bounds(args) -> int:
    if args.kind == "holder":
        if not args.holder:
            raise UsageError("--holder LAM ALPHA is required for kind holder")
        v = B.bound_holder(args.holder[0], args.holder[1], args.d, args.N, args.L, args.guard_bits)
        out = {"bound": v.to_json(), "float": float(v)}
    elif args.kind in ("theorem1", "theorem2"):
        mod = _modulus_from_args(args)
        fn = B.bound_theorem1 if args.kind == "theorem1" else B.bound_theorem2
        size = B.theorem1_size if args.kind == "theorem1" else B.theorem2_size
        v = fn(mod, args.d, args.N, args.L, args.guard_bits)
        w, dep = size(args.d, args.N, args.L)
        out = {"bound": v.to_json(), "float": float(v), "width": w, "depth": dep}
    elif args.kind == "budget":
        if args.W is None:
            raise UsageError("--W is required for kind budget")
        bb = B.bound_parameter_budget(_modulus_from_args(args), args.d, args.W, args.guard_bits)
        out = {"bound": bb.bound.to_json(), "float": float(bb.bound), "width": bb.width, "depth": bb.depth}
    elif args.kind == "corollary1":
        v = B.bound_corollary1(_modulus_from_args(args), args.d, args.N, args.L, args.guard_bits)
        N, L = B.corollary1_sizes(args.d, args.N, args.L)
        out = {"bound": v.to_json(), "float": float(v), "N": N, "L": L}
    else:
        rv = B.modulus_examples(args.kind, args.d, args.N, args.L, float(args.alpha))
        out = {"float": rv.value, "asymptotic": rv.asymptotic, "note": rv.note}
    _emit({"kind": args.kind} | out)
    return EXIT_OK


def cmd_demo(args) -> int:
    rep = memorization_demo(args.N, args.L, args.seed)
    _emit({"N": rep.N, "L": rep.L, "seed": rep.seed, "points": rep.points, "width": rep.width,
           "depth": rep.depth, "constant_frac_bits": rep.constant_frac_bits,
           "all_exact": rep.all_exact})
    return EXIT_OK if rep.all_exact else EXIT_FAIL


def cmd_probe(args) -> int:
    if args.net:
        net = network_from_json(load_json(args.net))
        pts = _read_points(args, net.input_dim)
    else:
        if args.N is None or args.L is None:
            raise UsageError("give --net, or --N and --L for a random point fitter")
        import random

        count = args.N ** args.L
        bits = BitString.from_int(random.Random(args.seed).getrandbits(count), count)
        net = build_point_fitter(args.N, args.L, bits)
        pts = [(Dyadic(m),) for m in range(1, count + 1)]
    rep = float_divergence_probe(net, pts, Fraction(1, 1 << args.tol_bits))
    _emit({"checked": rep.checked, "tolerance_bits": args.tol_bits, "diverged": len(rep.divergences),
           "divergences": [{"x": [str(v) for v in d.point], "exact": [str(v) for v in d.exact],
                            "float": list(d.approx), "first_layer": d.first_layer}
                           for d in rep.divergences]})
    return EXIT_OK


def cmd_targets(args) -> int:
    _emit([{"name": t.name, "formula": t.description, "modulus": t.modulus_note,
            "params": list(t.params)} for t in registry()])
    return EXIT_OK


# -- parser ------------------------------------------------------------------


def _add_size(p, required=True) -> None:
    p.add_argument("--N", type=_positive, required=required, help="width parameter")
    p.add_argument("--L", type=_positive, required=required, help="depth parameter")


def _add_target(p) -> None:
    p.add_argument("--target", default="mean", help="builtin target name (see 'targets')")
    p.add_argument("--d", type=_positive, default=1, help="input dimension")
    p.add_argument("--param", type=_param_arg, action="append", metavar="KEY=VALUE",
                   help="target parameter, e.g. alpha=1/2 for spike")


def make_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="floorrelu", description="Floor-ReLU approximation toolkit.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build", help="build an approximant and its certificate")
    _add_target(p)
    _add_size(p)
    p.add_argument("--theorem", type=int, choices=(1, 2), default=1,
                   help="1: budget max(d,5N+13) x (64dL+3); 2: max(d,2N^2+5N) x (7dL^2+3)")
    p.add_argument("--M", type=_dyadic_arg, help="build on [-M, M]^d; M a power of two like 1/2^1")
    p.add_argument("--guard-bits", type=_positive, default=64, help="fractional bits for constants")
    p.add_argument("--out", required=True, help="network JSON path")
    p.add_argument("--cert", help="certificate JSON path")
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("eval", help="evaluate a saved network")
    p.add_argument("--net", required=True)
    p.add_argument("--x", action="append", help="comma-separated coordinates, e.g. 1/2^2,0.5")
    p.add_argument("--samples", type=int, default=0, help="also evaluate this many random points")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--mode", choices=("exact", "float"), default="exact")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("verify", help="check a network against its certificate")
    p.add_argument("--net", required=True)
    p.add_argument("--cert", required=True)
    p.add_argument("--grid", type=_positive, help="extra points per axis")
    p.add_argument("--samples", type=int, default=1000, help="seeded random points")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--report", help="report JSON path")
    p.add_argument("--csv", help="per-point CSV path")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("extract", help="run a bit-extraction gadget")
    p.add_argument("--mode", choices=("block", "locator", "fitter"), required=True)
    p.add_argument("--N", type=_positive, required=True)
    p.add_argument("--J", type=_positive, help="block length (block mode)")
    p.add_argument("--L", type=_positive, help="levels (locator and fitter modes)")
    p.add_argument("--bits", help="bit string such as 10010110")
    p.add_argument("--index", type=int, help="report only this index")
    p.add_argument("--check", action="store_true",
                   help="compare against plain slicing; without --bits, sweep all patterns")
    p.add_argument("--cap", type=_positive, default=1 << 16,
                   help="largest pattern count swept exhaustively")
    p.add_argument("--samples", type=_positive, default=1000, help="random patterns above the cap")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("bounds", help="evaluate an error-bound formula")
    p.add_argument("--kind", default="theorem1",
                   choices=("theorem1", "theorem2", "holder", "corollary1", "budget",
                            "log", "log_power", "holder_over_d"))
    _add_target(p)
    p.add_argument("--N", type=_positive, default=2)
    p.add_argument("--L", type=_positive, default=1)
    p.add_argument("--W", type=_positive, help="parameter budget (kind budget)")
    p.add_argument("--holder", nargs=2, type=as_fraction, metavar=("LAM", "ALPHA"),
                   help="use a Holder modulus instead of the target's")
    p.add_argument("--alpha", type=as_fraction, default=Fraction(1), help="alpha for holder_over_d")
    p.add_argument("--guard-bits", type=_positive, default=64)
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("demo", help="memorize N^L random bits with one point fitter")
    _add_size(p)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_demo)

    p = sub.add_parser("probe", help="compare float and exact evaluation")
    p.add_argument("--net", help="network JSON path (default: a random point fitter)")
    _add_size(p, required=False)
    p.add_argument("--x", action="append", help="comma-separated coordinates")
    p.add_argument("--samples", type=int, default=0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol-bits", type=int, default=40, help="tolerance 2^-k")
    p.set_defaults(func=cmd_probe)

    p = sub.add_parser("targets", help="list builtin targets")
    p.set_defaults(func=cmd_targets)
    return ap


def run(argv: Optional[Sequence[str]] = None) -> int:
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (UsageError, SchemaError, ValueError, KeyError, OSError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        sys.stderr.write(f"floorrelu {args.command}: error: {msg}\n")
        return EXIT_USAGE


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
