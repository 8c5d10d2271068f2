"""Command-line front end.

Exit codes: 0 success (and EQUAL for ``eq``), 1 a negative answer (DISTINCT,
no separator found, non-canonical, failed verification), 2 usage or input
errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import List, Optional

from . import lang, semigroup
from .canon import canonicalize, is_canonical, is_circular_canonical, is_semi_canonical
from .rewrite import DerivationTrace, verify_derivation
from .term import TermSyntaxError, format_paren_word, mu, parse_term, rank, render_term, scale_nu, to_paren_word

EXIT_OK, EXIT_NO, EXIT_ERROR = 0, 1, 2


class CliError(Exception):
    pass


def _fmt(t, style: str) -> str:
    return format_paren_word(to_paren_word(t)) if style == "paren" else render_term(t)


def _parse(text: str):
    try:
        return parse_term(text)
    except TermSyntaxError as exc:
        raise CliError(f"cannot parse {text!r}: {exc}") from None


def _write_trace(path: str, trace: DerivationTrace) -> None:
    text = trace.to_text()
    if path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def cmd_canon(args) -> int:
    t = _parse(args.term)
    rep = canonicalize(t, args.mode, want_trace=bool(args.trace))
    if args.trace:
        _write_trace(args.trace, rep.trace)
    if args.format == "json":
        data = {"input": render_term(t), "canonical": render_term(rep.output), "mode": args.mode}
        if rep.trace is not None:
            data["trace"] = [s.to_line() for s in rep.trace.steps]
        print(json.dumps(data))
    else:
        print(_fmt(rep.output, args.format))
    return EXIT_OK


def cmd_eq(args) -> int:
    a, b = _parse(args.left), _parse(args.right)
    ca = canonicalize(a, args.mode).output
    cb = canonicalize(b, args.mode).output
    verdict = "EQUAL" if ca == cb else "DISTINCT"
    if args.format == "json":
        print(json.dumps({"verdict": verdict, "mode": args.mode,
                          "canonical": [render_term(ca), render_term(cb)]}))
    else:
        print(verdict)
        print(_fmt(ca, args.format))
        print(_fmt(cb, args.format))
    return EXIT_OK if ca == cb else EXIT_NO


def cmd_derive(args) -> int:
    if args.verify:
        with open(args.verify) as fh:
            trace = DerivationTrace.from_text(fh.read())
    else:
        if args.term is None:
            raise CliError("derive needs a term or --verify FILE")
        trace = canonicalize(_parse(args.term), args.mode, want_trace=True).trace
        _write_trace(args.trace or "-", trace)
    res = verify_derivation(trace)
    # keep stdout a clean trace when the trace itself went there
    out = sys.stderr if not args.verify and (args.trace or "-") == "-" else sys.stdout
    if res.ok:
        print(f"verified: {len(trace.steps)} steps, {render_term(trace.start)} = {render_term(trace.end)}", file=out)
        return EXIT_OK
    print(f"verification failed at step {res.failed_at}: {res.reason}", file=out)
    return EXIT_NO


def _scheme_for(t, args) -> lang.Scheme:
    if args.n is None and args.p is None:
        return lang.compute_scheme([t])
    if args.n is None or args.p is None:
        raise CliError("--n and --p must be given together")
    try:
        scheme = lang.Scheme(args.n, args.p)
    except lang.LangError as exc:
        raise CliError(str(exc)) from None
    if scheme.n <= scale_nu(t):
        raise CliError(f"--n {scheme.n} must exceed the largest offset magnitude {scale_nu(t)}")
    if not scheme.governs(t):
        print(f"note: ({scheme.n}, {scheme.p}) is below the scheme bounds for this term "
              f"(mu = {mu(t)}, nu = {scale_nu(t)}); the language is still well defined",
              file=sys.stderr)
    return scheme


def cmd_lang(args) -> int:
    t = _parse(args.term)
    scheme = _scheme_for(t, args)
    spec = lang.build_lang(t, scheme)
    code = EXIT_OK
    if args.format == "json":
        data = {"term": render_term(t), "n": scheme.n, "p": scheme.p, "regex": lang.render(spec)}
        if args.member:
            nfa = lang.LazyNFA(spec)
            data["members"] = {w: nfa.accepts(w) for w in args.member}
        print(json.dumps(data))
    else:
        print(lang.render(spec))
        if args.member:
            nfa = lang.LazyNFA(spec)
            for w in args.member:
                ok = nfa.accepts(w)
                print(f"{'member' if ok else 'non-member'}: {w}")
                if not ok:
                    code = EXIT_NO
    if args.dump:
        try:
            text = lang.to_nfa(spec).to_text()
        except lang.CapExceeded as exc:
            raise CliError(f"NFA too large to dump: {exc}") from None
        with open(args.dump, "w") as fh:
            fh.write(text)
    return code


_BUILTIN = {
    "Z": semigroup.cyclic_group,
    "T": semigroup.full_transformations,
    "L": semigroup.left_zero,
}


def _load_semigroup(ref: str) -> semigroup.FiniteSemigroup:
    if ref in ("B2", "B_2"):
        return semigroup.brandt_b2()
    if ref in ("U2", "U_2", "flipflop"):
        return semigroup.flip_flop()
    key, tail = ref[:1], ref[1:].lstrip("_")
    if key in _BUILTIN and tail.isdigit():
        return _BUILTIN[key](int(tail))
    try:
        return semigroup.read_semigroup(ref)
    except OSError as exc:
        raise CliError(f"cannot read semigroup {ref!r}: {exc}") from None
    except semigroup.SemigroupError as exc:
        raise CliError(f"bad semigroup {ref!r}: {exc}") from None


def cmd_eval(args) -> int:
    t = _parse(args.term)
    S = _load_semigroup(args.semigroup)
    assignment = {}
    for item in args.assignment:
        name, sep, value = item.partition("=")
        if not sep:
            raise CliError(f"assignment {item!r} must look like letter=value")
        if S.names and value in S.names:
            assignment[name] = S.names.index(value)
        else:
            try:
                assignment[name] = int(value)
            except ValueError:
                raise CliError(f"unknown element {value!r}") from None
    try:
        value = semigroup.eval_term(S, t, assignment)
    except (KeyError, ValueError) as exc:
        raise CliError(str(exc.args[0] if exc.args else exc)) from None
    print(S.name_of(value))
    return EXIT_OK


def cmd_separate(args) -> int:
    a, b = _parse(args.left), _parse(args.right)
    sep = semigroup.find_separator(a, b, budget=args.budget, mode=args.mode)
    if sep is None:
        if canonicalize(a, args.mode).output == canonicalize(b, args.mode).output:
            print("no separator: the canonical forms coincide")
        else:
            print("no separator found within the search budget (inconclusive)")
        return EXIT_NO
    if args.format == "json":
        print(json.dumps({"semigroup": sep.semigroup.label, "table": sep.semigroup.table.tolist(),
                          "assignment": sep.assignment, "values": [sep.left, sep.right]}))
    else:
        print(sep.describe())
    return EXIT_OK


def cmd_check(args) -> int:
    t = _parse(args.term)
    canonical = is_canonical(t, args.mode)
    rows = [("rank", rank(t)), ("canonical", canonical), ("semi-canonical", is_semi_canonical(t)),
            ("circular-canonical", is_circular_canonical(t))]
    if args.format == "json":
        print(json.dumps(dict(rows)))
    else:
        for name, value in rows:
            print(f"{name}: {str(value).lower() if isinstance(value, bool) else value}")
    return EXIT_OK if canonical else EXIT_NO


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--mode", choices=("S", "A"), default="S",
                        help="S: all finite semigroups; A: aperiodic ones (offsets collapse to 0)")
    common.add_argument("--format", choices=("term", "paren", "json"), default="term")

    parser = argparse.ArgumentParser(prog="kappa-canon", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("canon", parents=[common], help="print the canonical form")
    p.add_argument("term")
    p.add_argument("--trace", metavar="FILE", help="write the derivation to FILE ('-' for stdout)")
    p.set_defaults(func=cmd_canon)

    p = sub.add_parser("eq", parents=[common], help="decide equality of two terms")
    p.add_argument("left")
    p.add_argument("right")
    p.set_defaults(func=cmd_eq)

    p = sub.add_parser("derive", parents=[common], help="emit and verify a derivation")
    p.add_argument("term", nargs="?")
    p.add_argument("--trace", metavar="FILE", help="where to write the derivation (default stdout)")
    p.add_argument("--verify", metavar="FILE", help="verify an existing trace file instead")
    p.set_defaults(func=cmd_derive)

    p = sub.add_parser("lang", parents=[common], help="regular expression for L_{n,p}(t)")
    p.add_argument("term")
    p.add_argument("--n", type=int)
    p.add_argument("--p", type=int)
    p.add_argument("--member", action="append", metavar="WORD", help="test membership of WORD")
    p.add_argument("--dump", metavar="FILE", help="write the explicit NFA to FILE")
    p.set_defaults(func=cmd_lang)

    p = sub.add_parser("eval", parents=[common], help="evaluate a term in a finite semigroup")
    p.add_argument("term")
    p.add_argument("semigroup", help="JSON file, or a builtin: Z<k>, T<n>, L<n>, B2, U2")
    p.add_argument("assignment", nargs="*", metavar="letter=value")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("separate", parents=[common], help="search a finite semigroup telling two terms apart")
    p.add_argument("left")
    p.add_argument("right")
    p.add_argument("--budget", type=int, help="maximum number of semigroups to try")
    p.set_defaults(func=cmd_separate)

    p = sub.add_parser("check", parents=[common], help="report the canonicity predicates")
    p.add_argument("term")
    p.set_defaults(func=cmd_check)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
