"""Command line front end.

Verbs: dist, normalize, bisim, unfold, check-model.  All numeric output is
exact rational text (p/q or inf); --decimal opts into rounded rendering.
Exit codes: 0 success, 1 domain errors, 2 parse errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

from .bisim import format_coalgebra, parse_coalgebras, solve_bisim, unfold_term
from .errors import DomainError, ParseError, QuantAlgError
from .extvalue import ExtValue
from .modelcheck import check_theory, format_report, parse_algebras
from .semantics import BOUNDED, EXTENDED, denote, format_value, term_dist
from .spaces import parse_spaces
from .terms import parse_term, well_formed
from .theories import ParamPool, parse_monoids, parse_theory


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return 2
    except QuantAlgError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="quantalg",
        description="exact distances for quantitative algebraic effects")
    sub = p.add_subparsers(required=True)

    def common(sp, space=True, theory=True, mode_default=EXTENDED):
        if theory:
            sp.add_argument("--theory", required=True,
                            help="theory expression, e.g. 'sum(sum(bary, exc{1}), contr{next, 1/2})'")
        if space:
            sp.add_argument("--space", help="space file; ground metric for variables")
        sp.add_argument("--monoid", help="monoid file for writer theories")
        sp.add_argument("--mode", choices=[EXTENDED, BOUNDED], default=mode_default)
        sp.add_argument("--format", choices=["text", "record"], default="text")
        sp.add_argument("--decimal", type=int, metavar="DIGITS",
                        help="also render rationals rounded to DIGITS places")

    sp = sub.add_parser("dist", help="distance between two terms")
    common(sp)
    sp.add_argument("terms", nargs=2, help="term files (or literal terms with --inline)")
    sp.add_argument("--inline", action="store_true", help="treat the term arguments as literal text")
    sp.set_defaults(handler=_cmd_dist)

    sp = sub.add_parser("normalize", help="canonical normal form of a term")
    common(sp)
    sp.add_argument("term")
    sp.add_argument("--inline", action="store_true")
    sp.set_defaults(handler=_cmd_normalize)

    sp = sub.add_parser("bisim", help="bisimilarity metric of a coalgebra file")
    common(sp, theory=False, mode_default=BOUNDED)
    sp.add_argument("file")
    sp.add_argument("--tol", default="1/1000", help="guaranteed sup-norm tolerance")
    sp.set_defaults(handler=_cmd_bisim)

    sp = sub.add_parser("unfold", help="convert a term to a coalgebra file")
    common(sp)
    sp.add_argument("term")
    sp.add_argument("--inline", action="store_true")
    sp.set_defaults(handler=_cmd_unfold)

    sp = sub.add_parser("check-model", help="check an algebra file against a theory")
    common(sp)
    sp.add_argument("file")
    sp.add_argument("--weights", default="", help="comma list of convex weights")
    sp.add_argument("--epsilons", default="", help="comma list of premise thresholds")
    sp.add_argument("--elems", default="", help="comma list of writer monoid elements")
    sp.add_argument("--verbose", action="store_true")
    sp.set_defaults(handler=_cmd_check_model)
    return p


def _load_context(args, need_theory=True):
    spaces = {}
    space = None
    if getattr(args, "space", None):
        spaces = parse_spaces(Path(args.space).read_text(), args.space)
        if len(spaces) == 1:
            space = next(iter(spaces.values()))
    monoids = {}
    if getattr(args, "monoid", None):
        monoids = parse_monoids(Path(args.monoid).read_text(), args.monoid)
    theory = None
    if need_theory and getattr(args, "theory", None):
        theory = parse_theory(args.theory, spaces, monoids, "--theory")
    return theory, space, spaces, monoids


def _read_term(arg: str, inline: bool, theory, source_hint: str):
    if inline:
        return parse_term(arg, theory, source_hint)
    text = Path(arg).read_text()
    return parse_term(text, theory, arg)


def _render(value: ExtValue, args) -> str:
    text = str(value)
    if args.decimal is not None and not value.is_inf:
        text += f" ({float(value.rational):.{args.decimal}f})"
    return text


def _cmd_dist(args) -> int:
    theory, space, _, _ = _load_context(args)
    t = _read_term(args.terms[0], args.inline, theory, "term-1")
    s = _read_term(args.terms[1], args.inline, theory, "term-2")
    for label, term in (("term-1", t), ("term-2", s)):
        ok, why = well_formed(term, theory)
        if not ok:
            raise DomainError(f"{label} is not well formed: {why}")
    d = term_dist(t, s, theory, space, args.mode)
    if args.format == "record":
        print(json.dumps({"verb": "dist", "mode": args.mode, "distance": str(d)},
                         sort_keys=True))
    else:
        print(_render(d, args))
    return 0


def _cmd_normalize(args) -> int:
    theory, _, _, _ = _load_context(args)
    t = _read_term(args.term, args.inline, theory, "term")
    ok, why = well_formed(t, theory)
    if not ok:
        raise DomainError(f"term is not well formed: {why}")
    v = denote(t, theory)
    if args.format == "record":
        print(json.dumps({"verb": "normalize", "value": format_value(v)}, sort_keys=True))
    else:
        print(format_value(v))
    return 0


def _cmd_bisim(args) -> int:
    _, space, _, monoids = _load_context(args, need_theory=False)
    systems = parse_coalgebras(Path(args.file).read_text(), monoids, space, args.file)
    tol = Fraction(args.tol)
    out_records = []
    for name in sorted(systems):
        C = systems[name]
        metric, cert = solve_bisim(C, tol, args.mode)
        if args.format == "record":
            out_records.append({
                "system": name,
                "metric": {f"d({u},{v})": str(val) for (u, v), val in metric.pairs()},
                "certificate": cert.as_record(),
            })
        else:
            print(f"system {name}:")
            for (u, v), val in metric.pairs():
                print(f"  d({u},{v}) = {_render(val, args)}")
            print(f"  certificate: iterations={cert.iterations} "
                  f"a_priori_bound={cert.a_priori_bound} residual={cert.residual} "
                  f"exact={'yes' if cert.exact else 'no'}")
    if args.format == "record":
        print(json.dumps(out_records, sort_keys=True))
    return 0


def _cmd_unfold(args) -> int:
    theory, space, _, monoids = _load_context(args)
    t = _read_term(args.term, args.inline, theory, "term")
    ok, why = well_formed(t, theory)
    if not ok:
        raise DomainError(f"term is not well formed: {why}")
    C, root = unfold_term(t, theory, space)
    monoid_name = next((name for name, m in monoids.items() if m == C.monoid), None)
    sys.stdout.write(f"# root = {root}\n")
    sys.stdout.write(format_coalgebra(C, monoid_name))
    return 0


def _cmd_check_model(args) -> int:
    theory, space, spaces, _ = _load_context(args)
    algebras = parse_algebras(Path(args.file).read_text(), spaces, args.file)
    pool = ParamPool.make(
        weights=[Fraction(w) for w in args.weights.split(",") if w],
        epsilons=[Fraction(e) for e in args.epsilons.split(",") if e],
        monoid_elems=[Fraction(a) if a.replace("/", "").isdigit() else a
                      for a in args.elems.split(",") if a],
    )
    ok = True
    for name in sorted(algebras):
        report = check_theory(algebras[name], theory, pool)
        if args.format == "record":
            print(json.dumps({
                "algebra": name,
                "passed": report.passed,
                "failures": [e.label for e in report.failures()],
            }, sort_keys=True))
        else:
            print(f"algebra {name}:")
            sys.stdout.write(format_report(report, args.verbose))
        ok = ok and report.passed
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
