"""Command-line front end: ``glbc {tower,char,mult,oracle,verify}``."""
from __future__ import annotations

import argparse
import json
import os
import sys

from . import __version__
from .errors import BoundExceeded, GLBCError, GreenFormulaNotValidated, ParityViolation, PredictorMismatch

EXIT_PASS, EXIT_MISMATCH, EXIT_USAGE = 0, 1, 2

VERIFIERS = ["prop2.1", "cor2.3", "cor2.4", "ex2.5", "prop3.1", "thm4.1", "thm4.2", "cor4.3",
             "prop5.1", "thm5.3", "cor5.5", "rem5.6"]


class UsageError(Exception):
    pass


def _emit(payload, args, csv_text: str | None = None):
    if getattr(args, "format", "json") == "csv" and csv_text is not None:
        text = csv_text
    else:
        text = json.dumps(payload, indent=1, sort_keys=True) + "\n"
    out = getattr(args, "out", None)
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _need(args, *names):
    for name in names:
        if getattr(args, name.replace("-", "_")) is None:
            raise UsageError(f"--{name.rstrip('_')} is required for this command")


# -- subcommands ------------------------------------------------------------------

def cmd_tower(args) -> int:
    from .fields import build_tower

    _need(args, "q")
    tower = build_tower(args.q, args.degrees or [1])
    desc = tower.descriptor()
    desc["hash"] = tower.descriptor_hash()
    _emit(desc, args)
    return EXIT_PASS


def cmd_char(args) -> int:
    from . import chars as ch
    from . import matrices as mx
    from .errors import NotRational

    _need(args, "spec", "class_")
    spec = ch.parse_spec(args.spec)
    c = mx.ClassData.from_key(args.class_)
    if (c.n, c.q) != (spec.n, spec.q):
        raise UsageError(f"class {args.class_} is not a class of GL_{spec.n}(F_{spec.q})")
    tower = ch.tower_for(spec)
    v = ch.class_value(spec, c, tower)
    out = {"spec": ch.spec_str(spec), "class": c.key(), "value": repr(v), "conductor": v.m}
    try:
        out["integer"] = v.as_integer()
    except NotRational:
        out["integer"] = None
    _emit(out, args)
    return EXIT_PASS


def _factor_chars(H, exps):
    from . import chars as ch

    if len(exps) == 1:
        exps = exps * len(H.factors)
    if len(exps) != len(H.factors):
        raise UsageError(f"{len(H.factors)} --chi values needed for {H.label()}")
    return tuple(ch.DetChar(n, Q, c) for (n, Q), c in zip(H.factors, exps))


def cmd_mult(args) -> int:
    from . import chars as ch
    from . import mult
    from . import subgroups as sg
    from .fields import prime_power

    _need(args, "spec", "sub")
    pi = ch.parse_spec(args.spec)
    if args.sub in ("levi", "weil", "torus"):
        if pi.n % 2:
            raise UsageError(f"--sub {args.sub} needs an even ambient rank")
        H = sg.subgroup_from_name(args.sub, pi.n // 2, pi.q)
    elif args.sub == "subfield":
        p, e = prime_power(pi.q)
        if e % 2:
            raise UsageError("--sub subfield needs a spec over a quadratic extension")
        H = sg.SubfieldGLn(pi.n, p ** (e // 2))
    else:
        H = sg.WholeGroup(pi.n, pi.q)
    if args.chi_spec:
        chis = tuple(ch.parse_spec(s) for s in args.chi_spec)
    else:
        chis = _factor_chars(H, args.chi or [0])
    if any(isinstance(s, (ch.Cuspidal, ch.Induced)) for s in (pi,) + chis):
        ch.require_green_validated()
    methods = {"auto": "auto", "both": "both", "elementwise": "elementwise", "classwise": "classwise"}
    clock = mult._Timer(args.timing)
    m = mult.multiplicity(pi, H, chis, method=methods[args.method])
    used = mult._resolve_method(H, args.method)
    rep = mult.MultReport("mult", {"spec": ch.spec_str(pi), "subgroup": H.label(),
                                   "chi": [ch.spec_str(s) for s in chis],
                                   "tower": mult.tower_for_problem(pi, H, *chis).descriptor_hash(),
                                   "method": "both" if len(used) == 2 else used[0]},
                          m=m, computed=m, wall_ms=clock.ms())
    _emit(rep.to_json(), args)
    return EXIT_PASS


def cmd_oracle(args) -> int:
    from . import oracle

    if args.validate:
        groups = oracle.DEFAULT_VALIDATION_GROUPS
        if args.group:
            _, n, q = args.group.split(":")
            groups = [(int(n), int(q))]
        results = oracle.validate_green_formula(groups, persist=True)
        ok = all(r["pass"] for r in results)
        _emit({"validated": ok, "groups": results}, args)
        return EXIT_PASS if ok else EXIT_MISMATCH
    _need(args, "group")
    t = oracle.get_table(args.group)
    _emit({"group": t.group, "order": t.order, "classes": len(t.class_keys),
           "degrees": t.degrees, "cache": str(oracle._cache_path(t.group))}, args)
    return EXIT_PASS


def _half(args) -> int:
    if args.n is not None:
        return args.n
    if args.two_n is not None:
        if args.two_n % 2:
            raise UsageError("--two-n must be even")
        return args.two_n // 2
    raise UsageError("--n or --two-n is required for this verifier")


def _two_n(args) -> int:
    if args.two_n is not None:
        return args.two_n
    if args.n is not None:
        return 2 * args.n
    raise UsageError("--two-n is required for this verifier")


def run_verifier(args):
    from . import mult

    _need(args, "q")
    vid, q = args.id, args.q
    kw = {"timing": args.timing, "threads": args.threads}
    if vid in ("prop2.1", "cor2.3"):
        return mult.verify_bc_relation(_two_n(args), q, method=args.method, verifier=vid, **kw)
    if vid == "thm4.1":
        return mult.verify_thm41(_two_n(args), q, method=args.method, basechange=args.basechange, **kw)
    if vid == "thm5.3":
        return mult.verify_thm53(_two_n(args), q, method=args.method, basechange=args.basechange, **kw)
    if vid == "cor5.5":
        return mult.verify_cor55(_two_n(args), q, method=args.method, **kw)
    if vid == "rem5.6":
        return mult.verify_remark56(q, method=args.method, **kw)
    if vid == "cor2.4":
        return mult.verify_cor24(_half(args) if args.n is None else args.n, q, method=args.method, **kw)
    if vid == "prop3.1":
        return mult.verify_thm31(_half(args), q, method=args.method, **kw)
    if vid == "thm4.2":
        return mult.verify_thm42(_half(args), q, **kw)
    if vid == "cor4.3":
        return mult.verify_cor43(_half(args), q, **kw)
    if vid == "prop5.1":
        return mult.verify_prop51(args.n if args.n is not None else _half(args), q, **kw)
    if vid == "ex2.5":
        return mult.verify_example25(q, **kw)
    raise UsageError(f"unknown verifier {vid}")


def cmd_verify(args) -> int:
    try:
        res = run_verifier(args)
    except (PredictorMismatch, ParityViolation) as e:
        _emit({"verifier": args.id, "pass": False, "error": str(e),
               "counterexamples": getattr(e, "counterexamples", [])}, args)
        return EXIT_MISMATCH
    _emit(res.to_json(), args, res.to_csv())
    return EXIT_PASS if res.passed else EXIT_MISMATCH


# -- parser -------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="glbc", description=__doc__)
    p.add_argument("--version", action="version", version=f"glbc {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=["json", "csv"], default="json")
    common.add_argument("--out", help="write the report here instead of stdout")
    common.add_argument("--threads", type=int, default=1, help="width of sweep and sum parallelism")
    common.add_argument("--cache-dir", help="cache directory (default $GLBC_CACHE_DIR or ~/.cache/glbc)")
    common.add_argument("--element-bound", type=int, help="largest subgroup summed element by element")
    common.add_argument("--timing", action="store_true", help="record wall_ms (reports stop being byte-identical)")
    common.add_argument("--method", choices=["auto", "both", "elementwise", "classwise"], default="auto")
    sub = p.add_subparsers(dest="command", required=True)

    t = sub.add_parser("tower", parents=[common], help="describe a field tower")
    t.add_argument("--q", type=int)
    t.add_argument("--degrees", type=int, nargs="+")
    t.set_defaults(func=cmd_tower)

    c = sub.add_parser("char", parents=[common], help="character value of a spec at a class")
    c.add_argument("--spec")
    c.add_argument("--class", dest="class_")
    c.set_defaults(func=cmd_char)

    m = sub.add_parser("mult", parents=[common], help="multiplicity of a character of a subgroup")
    m.add_argument("--spec")
    m.add_argument("--sub", choices=["levi", "weil", "torus", "subfield", "whole"])
    m.add_argument("--chi", type=int, nargs="+", help="determinant-character exponents, one per factor")
    m.add_argument("--chi-spec", action="append", help="explicit spec per factor (repeatable)")
    m.set_defaults(func=cmd_mult)

    o = sub.add_parser("oracle", parents=[common], help="brute-force character tables")
    o.add_argument("--group", help="gl:n:q")
    o.add_argument("--validate", action="store_true", help="check the cuspidal formula and open the gate")
    o.set_defaults(func=cmd_oracle)

    v = sub.add_parser("verify", parents=[common], help="run a verification sweep")
    v.add_argument("id", choices=VERIFIERS)
    v.add_argument("--q", type=int)
    v.add_argument("--two-n", type=int)
    v.add_argument("--n", type=int)
    v.add_argument("--basechange", action="store_true", help="attach m_E and the twisted multiplicity")
    v.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code else EXIT_PASS
    if args.cache_dir:
        os.environ["GLBC_CACHE_DIR"] = args.cache_dir
    if args.element_bound is not None:
        from . import subgroups

        subgroups.ELEMENT_BOUND = args.element_bound
    try:
        return args.func(args)
    except UsageError as e:
        print(f"glbc: {e}", file=sys.stderr)
        return EXIT_USAGE
    except GreenFormulaNotValidated as e:
        print(f"glbc: {e}", file=sys.stderr)
        return EXIT_USAGE
    except BoundExceeded as e:
        print(f"glbc: bound exceeded: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (PredictorMismatch, ParityViolation) as e:
        print(f"glbc: mismatch: {e}", file=sys.stderr)
        return EXIT_MISMATCH
    except (GLBCError, ValueError) as e:
        print(f"glbc: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
