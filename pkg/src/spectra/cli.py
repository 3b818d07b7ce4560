"""Command line front end: ``spectra <command> ...``.

Exit status: 0 on success or pass, 1 when a check fails (or validation finds
violations), 2 on usage or input-format errors.
"""

from __future__ import annotations

import argparse
import json
import os
import random
import sys
from concurrent.futures import ThreadPoolExecutor

from . import checks as ck
from .complex import (
    INF,
    ComplexFormatError,
    InvalidComplex,
    RandomParams,
    dual_complex,
    dumps,
    load,
    random_complex,
    validate,
)
from .homology import (
    ClassSelectorError,
    NotACycle,
    change_ring_class,
    class_from_chain,
    homology,
    parse_class_selector,
    parse_level,
)
from .quantum import (
    QuantumError,
    one,
    parse_quantum,
    qadd,
    qdegree,
    qinverse,
    qmul,
    qpairing,
    qtau,
    qvaluation,
)
from .rings import QQ, ZZ, format_rational, is_prime, parse_ring
from .spectral import c, spectral_depth, torsion_depth_all


class UsageError(Exception):
    pass


# -- output ------------------------------------------------------------------


def _render_table(obj, indent="") -> list[str]:
    lines = []
    if isinstance(obj, dict):
        for k, v in obj.items():
            if isinstance(v, (dict, list)) and v:
                lines.append(f"{indent}{k}:")
                lines += _render_table(v, indent + "  ")
            else:
                lines.append(f"{indent}{k} = {_scalar(v)}")
    elif isinstance(obj, list):
        for v in obj:
            if isinstance(v, (dict, list)):
                lines.append(f"{indent}-")
                lines += _render_table(v, indent + "  ")
            else:
                lines.append(f"{indent}- {_scalar(v)}")
    else:
        lines.append(f"{indent}{_scalar(obj)}")
    return lines


def _scalar(v) -> str:
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, (dict, list)):
        return "{}" if isinstance(v, dict) else "[]"
    return str(v)


def render_report(rep: dict) -> str:
    head = f"{rep['check']}: {rep['status']}"
    body = _render_table(rep["values"])
    if rep["witness"]:
        body += ["witness:"] + _render_table(rep["witness"], "  ")
    return "\n".join([head] + body)


def emit(args, text: str):
    if getattr(args, "out", None):
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text if text.endswith("\n") else text + "\n")
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def emit_report(args, rep: dict):
    if args.json:
        emit(args, json.dumps(rep, indent=2, ensure_ascii=False))
    else:
        emit(args, render_report(rep))


# -- argument helpers ------------------------------------------------------


def _load(path):
    try:
        C = load(path)
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror or exc}") from None
    return C


def _load_valid(path):
    C = _load(path)
    problems = validate(C)
    if problems:
        raise UsageError(f"{path}: invalid complex: " + "; ".join(problems))
    return C


def _class(C, ring, expr, degree=None, level=INF, what="--class"):
    if expr is None:
        raise UsageError(f"{what} is required")
    try:
        chain = parse_class_selector(expr)
        return class_from_chain(C, ring, chain, degree=degree, level=level)
    except (ClassSelectorError, NotACycle) as exc:
        raise UsageError(f"{what}: {exc}") from None


def parse_seed_range(text: str) -> list[int]:
    try:
        if ".." in text:
            a, b = text.split("..", 1)
            lo, hi = int(a), int(b)
        else:
            lo = hi = int(text)
    except ValueError:
        raise UsageError(f"--gen-seeds: expected a..b, got {text!r}") from None
    if lo > hi:
        raise UsageError(f"--gen-seeds: empty range {text!r}")
    return list(range(lo, hi + 1))


def thread_count() -> int:
    raw = os.environ.get("SPECTRA_THREADS")
    if raw:
        try:
            n = int(raw)
        except ValueError:
            raise UsageError(f"SPECTRA_THREADS must be a positive integer, got {raw!r}") from None
        if n < 1:
            raise UsageError("SPECTRA_THREADS must be a positive integer")
        return n
    return os.cpu_count() or 1


def _params(args) -> RandomParams:
    try:
        return RandomParams(
            max_degree=args.max_degree,
            gens_per_degree=args.gens_per_degree,
            action_range=args.action_range,
            torsion_bias=args.torsion_bias,
            closed=not args.open,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None


# -- commands ----------------------------------------------------------------


def cmd_validate(args) -> int:
    C = _load(args.file)
    problems = validate(C)
    status = ck.PASS if not problems else ck.FAIL
    rep = ck.report("validate", {"file": args.file}, status, values={"violations": problems})
    if args.json:
        emit_report(args, rep)
    else:
        emit(args, "ok" if not problems else "\n".join(problems))
    return 0 if not problems else 1


def cmd_homology(args) -> int:
    C = _load_valid(args.file)
    ring = args.ring
    level = args.level
    H = homology(C, ring, args.degree, level)
    gens = [
        {"order": d, "cycle": {k: format_rational(v) for k, v in C.chain_dict(args.degree, z).items()}}
        for d, z in zip(H.orders, H.cycles)
    ]
    rep = ck.report(
        "homology",
        {"file": args.file, "ring": ring, "degree": args.degree, "level": level},
        ck.PASS,
        values={"group": _group_name(H, ring), "rank": H.rank, "torsion": H.torsion, "generators": gens},
    )
    emit_report(args, rep)
    return 0


def _group_name(H, ring) -> str:
    if ring.is_rationals:
        return "0" if H.rank == 0 else ("Q" if H.rank == 1 else f"Q^{H.rank}")
    return str(H.group)


def cmd_spectral(args) -> int:
    C = _load_valid(args.file)
    a = _class(C, args.ring, args.cls, args.degree)
    rep = ck.report("spectral", {"file": args.file, "class": a}, ck.PASS, values={"c": c(a)})
    emit_report(args, rep)
    return 0


def cmd_depth(args) -> int:
    C = _load_valid(args.file)
    beta, table = torsion_depth_all(C)
    values = {"beta_tor": beta, "beta_tor_by_degree": {str(k): v for k, v in table.items()}}
    inputs = {"file": args.file}
    if args.cls is not None:
        a = _class(C, ZZ, args.cls, args.degree)
        inputs["class"] = a
        try:
            d = spectral_depth(a)
        except ValueError as exc:
            raise UsageError(f"--class: {exc}") from None
        values.update({"beta_spec": d.beta, "witness": d.witness, "c_Z": d.c_z, "c_Q": d.c_q})
    emit_report(args, ck.report("depth", inputs, ck.PASS, values=values))
    return 0


def cmd_dual(args) -> int:
    C = _load_valid(args.file)
    emit(args, dumps(dual_complex(C)))
    return 0


def cmd_gamma(args) -> int:
    C = _load_valid(args.file)
    a = _class(C, args.ring, args.cls)
    b = _class(C.dual(), args.ring, args.dual_cls, what="--dual-class")
    if a.is_zero() or b.is_zero():
        raise UsageError("gamma needs nonzero classes")
    ca, cb = c(a), c(b)
    rep = ck.report(
        "gamma",
        {"file": args.file, "class": a, "dual_class": b},
        ck.PASS,
        values={"c": ca, "c_dual": cb, "gamma": ca + cb},
    )
    emit_report(args, rep)
    return 0


def cmd_gen(args) -> int:
    if args.seed is None:
        raise UsageError("gen needs --seed")
    emit(args, dumps(random_complex(args.seed, _params(args))))
    return 0


_SUBCHECKS = ck.CHECK_NAMES + ("all",)


def _names(sub):
    return ck.CHECK_NAMES if sub == "all" else (sub,)


def _check_single_class(args, C) -> list[dict]:
    """Checks driven by explicit ``--class`` / ``--dual-class`` selectors."""
    sub = args.sub
    reps = []
    if sub in ("coeff-mono", "zq", "primes", "refine", "depth-id", "all") and args.cls is not None:
        a = _class(C, ZZ, args.cls, args.degree)
        if sub in ("coeff-mono", "all"):
            targets = [args.ring] if args.ring != ZZ else [QQ] + [parse_ring(f"Z/{m}") for m in ck.MONO_MODULI]
            reps += [ck.check_coeff_monotone(a, r) for r in targets]
        if sub in ("zq", "all"):
            reps.append(ck.check_z_vs_q(a))
        if sub in ("primes", "all"):
            reps.append(ck.check_prime_envelope(a))
        if sub in ("refine", "all"):
            primes = [args.prime] if args.prime else [2, 3]
            for p in primes:
                if not is_prime(p):
                    raise UsageError(f"--prime: {p} is not prime")
            reps += [ck.check_refinement(a, p) for p in primes]
    if sub in ("pd-field", "pd-z", "depth-id", "all") and args.dual_cls is not None:
        Dc = C.dual()
        if sub in ("pd-field", "all"):
            field = args.ring if args.ring != ZZ else QQ
            if not field.is_field:
                raise UsageError(f"--ring: {field} is not a field")
            reps.append(ck.check_field_pd(C, _class(Dc, field, args.dual_cls, what="--dual-class")))
        b = _class(Dc, ZZ, args.dual_cls, what="--dual-class")
        if sub in ("pd-z", "all"):
            reps.append(ck.check_corrected_pd(C, b))
        if sub in ("depth-id", "all") and args.cls is not None:
            reps.append(ck.check_depth_identity(_class(C, ZZ, args.cls, args.degree), b))
    if not reps:
        raise UsageError(f"check {sub}: the given selectors do not apply to this check")
    return reps


def _seed_record(sub, seed, params):
    C = random_complex(seed, params)
    reps = ck.run_checks(C, _names(sub), rng=random.Random(seed))
    return ck.summarize(sub, {"seed": seed}, reps)


def cmd_check(args) -> int:
    sub = args.sub
    if args.gen_seeds is not None or args.seed is not None:
        if args.file:
            raise UsageError("give either a complex file or --seed/--gen-seeds, not both")
        seeds = parse_seed_range(args.gen_seeds) if args.gen_seeds is not None else [args.seed]
        params = _params(args)
        with ThreadPoolExecutor(max_workers=thread_count()) as pool:
            records = list(pool.map(lambda s: _seed_record(sub, s, params), seeds))
    elif args.file:
        C = _load_valid(args.file)
        if args.against:
            if sub not in ("lipschitz", "all"):
                raise UsageError("--against applies to the lipschitz check")
            G = _load_valid(args.against)
            try:
                inter = ck.identity_interleaving(C, G)
            except ck.InvalidInterleaving as exc:
                raise UsageError(f"--against: {exc}") from None
            records = [ck.check_tor_lipschitz(inter)]
        elif args.cls is not None or args.dual_cls is not None:
            records = _check_single_class(args, C)
        else:
            reps = ck.run_checks(C, _names(sub), rng=random.Random(args.seed or 0))
            records = [ck.summarize(sub, {"file": args.file}, reps)]
    else:
        raise UsageError("check needs a complex file or --seed/--gen-seeds")
    if args.json:
        emit(args, json.dumps(records, indent=2, ensure_ascii=False))
    else:
        emit(args, "\n".join(_table_line(r) for r in records))
    return 1 if any(r["status"] == ck.FAIL for r in records) else 0


def _table_line(rep) -> str:
    label = rep["inputs"].get("seed", rep["inputs"].get("file", ""))
    counts = rep["values"].get("counts")
    if counts:
        tail = " ".join(f"{k}={v}" for k, v in counts.items())
        return f"{rep['check']} {label}: {rep['status']} ({tail})"
    return render_report(rep)


_QOPS = ("normal", "add", "mul", "tau", "pair", "degree", "valuation", "inverse")


def cmd_qring(args) -> int:
    ring = args.ring
    try:
        exprs = [parse_quantum(e, args.n, ring) for e in args.exprs]
    except QuantumError as exc:
        raise UsageError(str(exc)) from None
    arity = 2 if args.op in ("add", "mul", "pair") else 1
    if len(exprs) != arity:
        raise UsageError(f"qring {args.op} takes {arity} expression(s)")
    a = exprs[0]
    try:
        if args.op == "normal":
            result = str(a)
        elif args.op == "add":
            result = str(qadd(a, exprs[1]))
        elif args.op == "mul":
            result = str(qmul(a, exprs[1]))
        elif args.op == "tau":
            result = format_rational(qtau(a))
        elif args.op == "pair":
            result = format_rational(qpairing(a, exprs[1]))
        elif args.op == "degree":
            d = qdegree(a)
            result = "inhomogeneous" if d is None else str(d)
        elif args.op == "valuation":
            result = str(qvaluation(a))
        else:
            b = qinverse(a)
            assert qmul(a, b) == one(a.n, ring)
            result = str(b)
    except QuantumError as exc:
        raise UsageError(str(exc)) from None
    rep = ck.report(
        "qring",
        {"n": args.n, "ring": ring, "op": args.op, "exprs": args.exprs},
        ck.PASS,
        values={"result": result},
    )
    if args.json:
        emit_report(args, rep)
    else:
        emit(args, result)
    return 0


# -- parser ------------------------------------------------------------------


def _ring_arg(text):
    try:
        return parse_ring(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _level_arg(text):
    try:
        return parse_level(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spectra",
        description="Exact spectral invariants of action-filtered chain complexes.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, ring=True, json_flag=True):
        if ring:
            p.add_argument("--ring", type=_ring_arg, default=ZZ, help="Z, Q or Z/m (default Z)")
        if json_flag:
            p.add_argument("--json", action="store_true", help="machine-readable output")
        p.add_argument("--out", help="write output to this path instead of stdout")

    def gen_params(p):
        p.add_argument("--max-degree", type=int, default=RandomParams.max_degree)
        p.add_argument("--gens-per-degree", type=int, default=RandomParams.gens_per_degree)
        p.add_argument("--action-range", type=int, default=RandomParams.action_range)
        p.add_argument("--torsion-bias", type=float, default=RandomParams.torsion_bias)
        p.add_argument("--open", action="store_true", help="allow torsion in the full homology")

    p = sub.add_parser("validate", help="check the complex invariants")
    p.add_argument("file")
    common(p, ring=False)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("homology", help="sublevel homology group")
    p.add_argument("file")
    p.add_argument("--degree", type=int, required=True)
    p.add_argument("--level", type=_level_arg, default=INF, help="p/q or inf (default inf)")
    common(p)
    p.set_defaults(func=cmd_homology)

    p = sub.add_parser("spectral", help="spectral invariant of a class")
    p.add_argument("file")
    p.add_argument("--class", dest="cls", required=True, help='cycle such as "x=1,w=-2"')
    p.add_argument("--degree", type=int)
    common(p)
    p.set_defaults(func=cmd_spectral)

    p = sub.add_parser("depth", help="torsion depth, and spectral depth of a class")
    p.add_argument("file")
    p.add_argument("--class", dest="cls")
    p.add_argument("--degree", type=int)
    common(p, ring=False)
    p.set_defaults(func=cmd_depth)

    p = sub.add_parser("dual", help="write the dual complex")
    p.add_argument("file")
    common(p, ring=False, json_flag=False)
    p.set_defaults(func=cmd_dual)

    p = sub.add_parser("gamma", help="spectral norm of a class and a dual class")
    p.add_argument("file")
    p.add_argument("--class", dest="cls", required=True)
    p.add_argument("--dual-class", dest="dual_cls", required=True)
    common(p)
    p.set_defaults(func=cmd_gamma)

    p = sub.add_parser("check", help="run theorem checks")
    p.add_argument("sub", choices=_SUBCHECKS)
    p.add_argument("file", nargs="?")
    p.add_argument("--class", dest="cls")
    p.add_argument("--dual-class", dest="dual_cls")
    p.add_argument("--degree", type=int)
    p.add_argument("--prime", type=int, help="prime for the refinement check")
    p.add_argument("--against", help="second complex for the lipschitz check")
    p.add_argument("--seed", type=int)
    p.add_argument("--gen-seeds", help="range a..b of generator seeds")
    gen_params(p)
    common(p)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("gen", help="write a seeded random complex")
    p.add_argument("--seed", type=int, required=True)
    gen_params(p)
    common(p, ring=False, json_flag=False)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("qring", help="arithmetic in the quantum ring of CP^n")
    p.add_argument("op", choices=_QOPS)
    p.add_argument("exprs", nargs="+", help='expressions such as "x^2*t^-1 + 3"')
    p.add_argument("--n", type=int, required=True, help="projective dimension")
    common(p)
    p.set_defaults(func=cmd_qring)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, ComplexFormatError, InvalidComplex) as exc:
        print(f"spectra: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
