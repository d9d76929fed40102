"""Command-line front end: ``momentlab <subcommand> ...``.

Exit codes: 0 on success, 1 on usage or input errors, 2 when a
certificate or result fails verification. Output is JSON (or CSV where
tabular) and byte-identical for identical arguments.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import random
import sys
from fractions import Fraction

from .arith import GroupElement, Subgroup, fmt, simplify, to_fraction
from .cantor import EmbeddingCertificate, build_embedding, depth_cap_from_env, verify_embedding
from .errors import MomentlabError
from .measures import Measure, lp_feasible, moments_of, random_vector
from .moments import MomentVector, completely_monotone_prefix, extension_interval, membership
from .pascal import build_table, gicar_trace, verify_hom
from .perturb import PerturbationRequest, PerturbationResult, check_result, extend, perturb

EXIT_OK, EXIT_USAGE, EXIT_VERIFY = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# --------------------------------------------------------------------------
# output


def _value(x):
    if isinstance(x, GroupElement):
        return x.to_json()
    if isinstance(x, Fraction):
        return fmt(x)
    return x


def _dump_json(obj) -> str:
    return json.dumps(obj, indent=2, ensure_ascii=False) + "\n"


def _dump_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([json.dumps(v, sort_keys=True) if isinstance(v, dict) else v for v in row])
    return buf.getvalue()


def _emit(args, obj, header=None, rows=None) -> None:
    if getattr(args, "format", "json") == "csv":
        if header is None:
            raise UsageError("this subcommand has no CSV form")
        text = _dump_csv(header, rows)
    else:
        text = _dump_json(obj)
    path = getattr(args, "out", None)
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# --------------------------------------------------------------------------
# inputs


def _sequence(args, length: int | None = None) -> MomentVector:
    """The vector given by --seq, or the first ``length`` moments of --measure."""
    if getattr(args, "seq", None):
        t = MomentVector.parse(args.seq)
        return t if length is None else t.truncate(min(length - 1, t.N))
    if getattr(args, "measure", None):
        if length is None:
            raise UsageError("--measure needs a length (--N, --depth or --level)")
        return moments_of(Measure.parse(args.measure), length - 1)
    raise UsageError("give --seq or --measure")


def _verdict_json(t: MomentVector) -> dict:
    v = membership(t)
    out = {"moments": t.to_json(), "verdict": v.kind.value}
    if v.certificate is not None:
        out.update(v.certificate.to_json())
    if v.witness is not None:
        w = v.witness
        out["witness"] = {"form": w.form, "index": w.index}
        if w.vector is not None:
            out["witness"]["vector"] = [fmt(x) for x in w.vector]
            out["witness"]["violation"] = fmt(w.violation)
    if t.is_rational:
        out["completely_monotone"] = completely_monotone_prefix(t)
    return out


# --------------------------------------------------------------------------
# subcommands


def cmd_moments_gen(args) -> int:
    mu = Measure.parse(args.measure)
    t = moments_of(mu, args.N)
    obj = {"measure": str(mu), "moments": t.to_json()}
    _emit(args, obj, ["n", "t"], [(n, fmt(x)) for n, x in enumerate(t)])
    return EXIT_OK


def cmd_moments_check(args) -> int:
    t = _sequence(args, None if args.seq else args.N + 1)
    _emit(args, _verdict_json(t))
    return EXIT_OK


def cmd_moments_extend(args) -> int:
    t = _sequence(args, None if args.seq else args.N + 1)
    if args.upto is None:
        ext = extension_interval(t)
        lo, hi = ext.inner()
        _emit(args, {"moments": t.to_json(), "interval": {"lo": fmt(lo), "hi": fmt(hi)}})
        return EXIT_OK
    G = Subgroup.parse(args.group)
    out = extend(t, G, args.upto)
    _emit(args, {"group": str(G), "moments": out.to_json()}, ["n", "t"], [(n, fmt(x)) for n, x in enumerate(out)])
    return EXIT_OK


def cmd_pascal(args) -> int:
    t = _sequence(args, args.depth + 1)
    table = build_table(t.entries, args.depth)
    report = verify_hom(table)
    obj = {
        "moments": t.to_json(),
        "depth": args.depth,
        "table": [[_value(x) for x in row] for row in table.rows],
        "report": {
            "positive": report.positive,
            "strictly_positive": report.strictly_positive,
            "faithful": report.faithful,
        },
    }
    if report.injective_prefix_ranks is not None:
        obj["report"]["injective_prefix_ranks"] = list(report.injective_prefix_ranks)
    rows = [(n, k, _value(x)) for n, k, x in table.entries()]
    if args.trace_level is not None:
        trace = gicar_trace(t, args.trace_level)
        obj["trace"] = {"level": args.trace_level, "values": [fmt(x) for x in trace]}
    _emit(args, obj, ["n", "k", "g"], rows)
    return EXIT_OK


def cmd_trace(args) -> int:
    t = _sequence(args, args.level + 1)
    trace = gicar_trace(t, args.level)
    obj = {"moments": t.to_json(), "level": args.level, "values": [fmt(x) for x in trace]}
    _emit(args, obj, ["k", "tau"], [(k, fmt(x)) for k, x in enumerate(trace)])
    return EXIT_OK


def _request(args, independent: bool) -> PerturbationRequest:
    if args.seq:
        source = MomentVector.parse(args.seq)
    elif args.measure:
        source = Measure.parse(args.measure)
    else:
        raise UsageError("give --seq or --measure")
    eps = [to_fraction(e) for e in args.eps.split(",")]
    eps = eps[0] if len(eps) == 1 else tuple(eps)
    return PerturbationRequest(source, args.m, eps, Subgroup.parse(args.group), args.upto, independent)


def _perturb(args, independent: bool) -> int:
    result = perturb(_request(args, independent))
    obj = result.to_json()
    rows = [(n, _value(x), float(x)) for n, x in enumerate(result.elements)]
    _emit(args, obj, ["n", "t", "approx"], rows)
    return EXIT_OK if all(result.checks.values()) else EXIT_VERIFY


def cmd_perturb(args) -> int:
    return _perturb(args, False)


def cmd_perturb_independent(args) -> int:
    return _perturb(args, True)


def _load_json(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read {path}: {exc}") from None


def _parse_scalar(v):
    return Fraction(v) if isinstance(v, str) else simplify(GroupElement.from_json(v))


def cmd_perturb_verify(args) -> int:
    obj = _load_json(args.path)
    try:
        src = obj["source"]
        source = Measure.parse(src) if isinstance(src, str) else MomentVector([_parse_scalar(v) for v in src])
        eps = tuple(Fraction(e) for e in obj["epsilons"])
        req = PerturbationRequest(source, obj["m"], eps, Subgroup.parse(obj["group"]), obj["N"], obj["independent"])
        seq = MomentVector([_parse_scalar(v) for v in obj["sequence"]])
        stored = obj["certificates"]
    except (KeyError, TypeError, ValueError, ZeroDivisionError) as exc:
        print(f"malformed result: {exc!r}", file=sys.stderr)
        return EXIT_VERIFY
    checks = {"length": len(seq) == req.N + 1}
    if checks["length"]:
        checks.update(check_result(PerturbationResult(req, seq, (), ())))
        fresh = [membership(seq.truncate(n)).certificate for n in range(1, seq.N + 1)]
        checks["certificates"] = len(stored) == len(fresh) and all(
            c is not None and dict(length=n + 2, **c.to_json()) == s
            for n, (c, s) in enumerate(zip(fresh, stored))
        )
    _emit(args, {"path": args.path, "checks": checks, "ok": all(checks.values())})
    return EXIT_OK if all(checks.values()) else EXIT_VERIFY


OUTSIDE_MARGIN = Fraction(1, 256)


def cmd_oracle(args) -> int:
    tol = to_fraction(args.tol)
    if args.random is None:
        t = _sequence(args)
        ok, witness = lp_feasible(t, args.grid, tol)
        obj = {"moments": t.to_json(), "grid": args.grid, "tolerance": fmt(tol), "feasible": ok}
        if witness is not None:
            obj["witness"] = [fmt(w) for w in witness.weights]
        _emit(args, obj)
        return EXIT_OK
    # agreement run over a seeded corpus
    rng = random.Random(args.seed)
    strict = to_fraction(args.outside_tol)
    records, disagreements = [], 0
    for _ in range(args.random):
        t = random_vector(rng, args.max_len)
        v = membership(t)
        rec = {"moments": t.to_json(), "verdict": v.kind.value, "lp": None, "agree": True}
        if v.is_interior:
            rec["lp"] = lp_feasible(t, args.grid, tol)[0]
            rec["agree"] = rec["lp"]
        elif v.is_outside and v.witness.violation > OUTSIDE_MARGIN:
            rec["lp"] = lp_feasible(t, args.grid, strict)[0]
            rec["agree"] = not rec["lp"]
        disagreements += not rec["agree"]
        records.append(rec)
    obj = {"seed": args.seed, "count": args.random, "disagreements": disagreements, "records": records}
    rows = [(",".join(r["moments"]), r["verdict"], r["lp"], r["agree"]) for r in records]
    _emit(args, obj, ["moments", "verdict", "lp", "agree"], rows)
    return EXIT_OK if disagreements == 0 else EXIT_VERIFY


def cmd_cantor_embed(args) -> int:
    cap = args.depth_cap if args.depth_cap is not None else depth_cap_from_env()
    cert = build_embedding(args.levels, cap)
    report = verify_embedding(cert)
    _emit(args, cert.to_json(report.violations))
    return EXIT_OK if report.ok else EXIT_VERIFY


def cmd_cantor_verify(args) -> int:
    obj = _load_json(args.path)
    try:
        cert = EmbeddingCertificate.from_json(obj)
    except (KeyError, TypeError, ValueError, ZeroDivisionError) as exc:
        print(f"malformed certificate: {exc!r}", file=sys.stderr)
        return EXIT_VERIFY
    report = verify_embedding(cert)
    depth_ok = obj.get("depth") == cert.depth
    violations = list(report.violations)
    if not depth_ok:
        violations.append({"kind": "shape", "detail": f"declared depth {obj.get('depth')}, actual {cert.depth}"})
    ok = report.ok and depth_ok
    _emit(args, {"path": args.path, "N": cert.N, "depth": cert.depth, "ok": ok, "violations": violations})
    if not ok:
        for v in violations[:10]:
            print("violation: " + json.dumps(v, sort_keys=True), file=sys.stderr)
    return EXIT_OK if ok else EXIT_VERIFY


# --------------------------------------------------------------------------
# parser


def _add_source(p, length_flag: str | None = None):
    p.add_argument("--seq", help='comma-separated moments, e.g. "1,1/2,1/3"')
    p.add_argument("--measure", help="lebesgue | beta:A,B | delta:X | atomic:W@X,...")
    if length_flag:
        p.add_argument(length_flag, type=int, default=None)


def _add_output(p, csv_ok: bool = True):
    p.add_argument("--out", "--json", dest="out", help="write to this file instead of stdout")
    p.add_argument("--format", choices=["json", "csv"] if csv_ok else ["json"], default="json")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="momentlab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    mom = sub.add_parser("moments", help="moment vectors: generate, check, extend")
    msub = mom.add_subparsers(dest="action", required=True)
    p = msub.add_parser("gen", help="exact moments of a measure")
    p.add_argument("--measure", required=True)
    p.add_argument("--N", type=int, required=True)
    _add_output(p)
    p.set_defaults(func=cmd_moments_gen)
    p = msub.add_parser("check", help="interior / boundary / outside verdict")
    _add_source(p)
    p.add_argument("--N", type=int, default=4)
    _add_output(p, csv_ok=False)
    p.set_defaults(func=cmd_moments_check)
    p = msub.add_parser("extend", help="extension interval, or extend into a group")
    _add_source(p)
    p.add_argument("--N", type=int, default=4)
    p.add_argument("--group", default="Q")
    p.add_argument("--upto", type=int)
    _add_output(p)
    p.set_defaults(func=cmd_moments_extend)

    p = sub.add_parser("pascal", help="Pascal table g(n,k) and homomorphism report")
    _add_source(p)
    p.add_argument("--depth", type=int, default=6)
    p.add_argument("--trace-level", type=int)
    _add_output(p)
    p.set_defaults(func=cmd_pascal)

    p = sub.add_parser("trace", help="trace values on the level-n projections")
    _add_source(p)
    p.add_argument("--level", type=int, required=True)
    _add_output(p)
    p.set_defaults(func=cmd_trace)

    for name, func, text in (
        ("perturb", cmd_perturb, "moment sequence with every term in a dense group"),
        ("perturb-independent", cmd_perturb_independent, "same, with rationally independent terms"),
    ):
        p = sub.add_parser(name, help=text)
        _add_source(p)
        p.add_argument("--m", type=int, required=True)
        p.add_argument("--eps", required=True, help="one tolerance, or m comma-separated ones")
        p.add_argument("--group", required=True, help='"Z[1/2]", "Q", "gen:sqrt2,sqrt3", ...')
        p.add_argument("--upto", type=int, required=True, help="index N of the last term")
        _add_output(p)
        p.set_defaults(func=func)

    p = sub.add_parser("perturb-verify", help="re-check a saved perturbation result")
    p.add_argument("path")
    _add_output(p, csv_ok=False)
    p.set_defaults(func=cmd_perturb_verify)

    p = sub.add_parser("oracle", help="grid LP feasibility, or a seeded agreement run")
    _add_source(p)
    p.add_argument("--grid", type=int, default=256)
    p.add_argument("--tol", default="1/1024")
    p.add_argument("--random", type=int, help="check this many seeded random vectors")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-len", type=int, default=7)
    p.add_argument("--outside-tol", default="1/4096")
    _add_output(p)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("cantor-embed", help="build the Cantor-set embedding certificate")
    p.add_argument("--levels", type=int, required=True)
    p.add_argument("--depth-cap", type=int)
    _add_output(p, csv_ok=False)
    p.set_defaults(func=cmd_cantor_embed)

    p = sub.add_parser("cantor-verify", help="re-check an embedding certificate")
    p.add_argument("path")
    _add_output(p, csv_ok=False)
    p.set_defaults(func=cmd_cantor_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, MomentlabError, ValueError, ZeroDivisionError) as exc:
        print(f"momentlab: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
