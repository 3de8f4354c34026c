"""Command-line front end.

Exit codes: 0 success, 2 a mathematically negative answer (not representable,
class of finite order > 1, undecided at this N), 1 usage or runtime errors.
All reports go to standard output; diagnostics to standard error.
"""

from __future__ import annotations

import argparse
import json
import logging
import re
import sys
from fractions import Fraction

from . import __version__
from .arith import ArithmeticError_, PrimeExponentMap
from .dirichlet import DirichletCharacter, enumerate_characters, parse_label

log = logging.getLogger("ratiogroup")

EXIT_OK, EXIT_ERROR, EXIT_OBSTRUCTION = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


_FACTORED = re.compile(r"^\s*\d+(\s*\^\s*-?\d+)?(\s*\*\s*\d+(\s*\^\s*-?\d+)?)*\s*$")


def parse_rational(text: str) -> Fraction:
    """``p/q``, an integer, or a factored form like ``3^1*19^1`` (exact)."""
    t = text.strip()
    if "^" in t or "*" in t:
        if not _FACTORED.match(t):
            raise ValueError(f"malformed factored rational {text!r}")
        value = Fraction(1)
        for part in t.split("*"):
            base, _, exp = part.partition("^")
            value *= Fraction(int(base)) ** (int(exp) if exp else 1)
    else:
        try:
            value = Fraction(t)
        except (ValueError, ZeroDivisionError):
            raise ValueError(f"malformed rational {text!r}") from None
        if value.denominator != 1 and "." in t:
            raise ValueError(f"malformed rational {text!r} (use p/q)")
    if value <= 0:
        raise ValueError(f"rational must be positive, got {text!r}")
    return value


def factored_json(r) -> dict[str, int]:
    return {str(p): e for p, e in PrimeExponentMap.of(Fraction(r)).items()}


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def _text(obj, indent: int = 0) -> str:
    pad = "  " * indent
    lines = []
    if isinstance(obj, dict):
        for key in sorted(obj):
            val = obj[key]
            if isinstance(val, (dict, list)) and val:
                lines.append(f"{pad}{key}:")
                lines.append(_text(val, indent + 1))
            else:
                lines.append(f"{pad}{key}: {json.dumps(val, sort_keys=True)}")
    elif isinstance(obj, list):
        for item in obj:
            if isinstance(item, (dict, list)):
                lines.append(f"{pad}-")
                lines.append(_text(item, indent + 1))
            else:
                lines.append(f"{pad}- {json.dumps(item)}")
    else:
        lines.append(f"{pad}{obj}")
    return "\n".join(lines)


def format_report(result, fmt: str = "json") -> str:
    if hasattr(result, "to_json"):
        result = result.to_json()
    if fmt == "json":
        return dumps(result)
    return _text(result)


def _cyc_json(x) -> dict:
    z = x.to_complex()
    return {"exact": repr(x), "re": round(z.real, 15), "im": round(z.imag, 15)}


# ---------------------------------------------------------------------------


def _family(args):
    from .family import normalize_family

    missing = [n for n in ("a", "b", "A", "B") if getattr(args, n) is None]
    if missing:
        raise UsageError("missing family parameters: " + " ".join("-" + m for m in missing))
    return normalize_family(args.a, args.b, args.A, args.B, args.k)


def _chi_for(f, label):
    if label is None:
        return DirichletCharacter.principal(f.delta)
    chi = parse_label(label)
    if chi.modulus != f.delta:
        chi = chi.primitive().induce(f.delta)
    return chi


def _oracle(f, N, policy, threads, restrict=None, grow=True):
    from .lattice import quotient_invariants

    res = quotient_invariants(f, N, policy, restrict=restrict)
    tries = 0
    while grow and not res.stabilized and tries < 3:
        N *= 2
        tries += 1
        log.info("oracle not stabilized; retrying at N=%d", N)
        res = quotient_invariants(f, N, policy, restrict=restrict)
    return res


def cmd_determine(args):
    from .dualdet import presentation, dual_group

    f = _family(args)
    dual = dual_group(f, threads=args.threads)
    oracle = _oracle(f, args.N or 2000, args.policy, args.threads)
    pres = presentation(f, oracle, dual)
    out = pres.to_json()
    out["family"] = f.describe()
    out["candidates"] = dual.to_json()["candidates"]
    return EXIT_OK, out


def cmd_oracle(args):
    f = _family(args)
    restrict = None
    if args.restrict_class:
        try:
            n0, M = (int(x) for x in args.restrict_class.split(","))
        except ValueError:
            raise UsageError("--restrict-class expects n0,M") from None
        if M < 1:
            raise UsageError("--restrict-class modulus must be positive")
        restrict = (n0, M)
    res = _oracle(f, args.N or 2000, args.policy, args.threads, restrict, grow=False)
    out = res.to_json()
    if restrict:
        out["restrict_class"] = list(restrict)
    return EXIT_OK, out


def _need_r(args):
    if args.r is None:
        raise UsageError("missing -r (target rational)")
    return parse_rational(args.r)


def cmd_membership(args):
    from .lattice import membership

    f = _family(args)
    r = _need_r(args)
    res = membership(f, r, args.N or 2000, args.policy)
    out = res.to_json()
    out["target"] = factored_json(r)
    out["N"] = args.N or 2000
    if res.order is not None:
        out["minimal_v"] = res.order
    code = EXIT_OK if res.status == "in_lattice" else EXIT_OBSTRUCTION
    return code, out


def cmd_represent(args):
    from .lattice import RepresentationError, certificate_json, represent

    f = _family(args)
    r = _need_r(args)
    try:
        cert = represent(f, r, args.N or 2000, args.policy)
    except RepresentationError as exc:
        out = {"target": factored_json(r), "representable": False, "reason": str(exc)}
        if exc.obstruction:
            out["obstruction"] = exc.obstruction
        if exc.order:
            out["minimal_v"] = exc.order
        return EXIT_OBSTRUCTION, out
    return EXIT_OK, {"target": factored_json(r), "representable": True, "certificate": certificate_json(cert)}


def _parse_overrides(items):
    out = {}
    for item in items or ():
        p, _, val = item.partition("=")
        if not val:
            raise UsageError(f"--override expects p=angle, got {item!r}")
        out[int(p)] = None if val.strip() == "zero" else Fraction(val)
    return out


def cmd_correlate(args):
    from .correlation import MultFunctionSpec, corr_report
    from .dualdet import dual_group

    f = _family(args)
    x = args.N or 10**5
    specs = []
    if args.chi:
        chi = parse_label(args.chi)
        specs.append(("given", MultFunctionSpec.make(chi, _parse_overrides(args.override))))
    else:
        for g in dual_group(f, threads=args.threads).elements:
            specs.append((g.chi.label(), MultFunctionSpec.from_gcharacter(f, g)))
    reports = []
    for name, spec in specs:
        rep = corr_report(spec, f, x, args.prime_bound, threads=args.threads)
        rep["g"] = {"chi": spec.chi.label(), "overrides": {
            str(p): (None if a is None else [a.numerator, a.denominator]) for p, a in spec.overrides
        }}
        reports.append(rep)
    return EXIT_OK, {"reports": reports}


def cmd_characters(args):
    if args.modulus:
        chars = enumerate_characters(args.modulus, args.order_divides)
        rows = [
            {"label": c.label(), "order": c.order, "conductor": c.conductor, "primitive": c.is_primitive()}
            for c in chars
        ]
        return EXIT_OK, {"modulus": args.modulus, "count": len(rows), "characters": rows}
    from .arith import factorize
    from .dualdet import component_candidates, order_bound

    f = _family(args)
    comps = []
    for p, t in factorize(f.delta).items():
        cands = component_candidates(f, p**t)
        if args.order_divides:
            cands = [c for c in cands if args.order_divides % c.order == 0]
        comps.append({
            "prime_power": p**t,
            "order_bound": order_bound(f, p**t),
            "candidates": [{"label": c.label(), "order": c.order, "conductor": c.conductor} for c in cands],
        })
    return EXIT_OK, {"delta": f.delta, "components": comps}


def cmd_theta(args):
    from .dualdet import theta

    f = _family(args)
    chi = _chi_for(f, args.chi)
    val = theta(f, chi, args.d1, args.d2)
    return EXIT_OK, {"chi": chi.label(), "d1": args.d1, "d2": args.d2, "theta": _cyc_json(val)}


def cmd_eta(args):
    from .dualdet import eta, eta_context

    f = _family(args)
    chi = _chi_for(f, args.chi)
    if args.ell is None:
        raise UsageError("missing --ell")
    ctx = eta_context(f, chi, args.ell)
    val = eta(ctx, f, args.beta, args.gamma)
    return EXIT_OK, {
        "chi": chi.label(), "ell": args.ell, "beta": args.beta, "gamma": args.gamma,
        "component": ctx.component.label(), "eta": _cyc_json(val),
    }


COMMANDS = {
    "determine": (cmd_determine, "torsion, free rank and dual characters of G"),
    "membership": (cmd_membership, "decide whether r lies in the ratio group at finite N"),
    "represent": (cmd_represent, "explicit product of ratios equal to r"),
    "correlate": (cmd_correlate, "correlation means against their predictions"),
    "characters": (cmd_characters, "enumerate characters (or a family's filtered candidates)"),
    "theta": (cmd_theta, "evaluate one theta character sum"),
    "eta": (cmd_eta, "evaluate one local eta sum"),
    "oracle": (cmd_oracle, "lattice quotient invariants at finite N"),
}


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("-a", type=int, help="numerator slope")
    common.add_argument("-b", type=int, help="numerator offset")
    common.add_argument("-A", type=int, help="denominator slope")
    common.add_argument("-B", type=int, help="denominator offset")
    common.add_argument("-k", type=int, default=1, help="first index n (default 1)")
    common.add_argument("-N", type=int, help="oracle bound / correlation length x")
    common.add_argument("-r", help="target rational: p/q or 3^1*19^1")
    common.add_argument("--modulus", type=int, help="character modulus (characters)")
    common.add_argument("--order-divides", type=int, help="keep characters whose order divides this")
    common.add_argument("--restrict-class", help="n0,M: oracle columns with n = n0 mod M only")
    common.add_argument("--threads", type=int, default=1, help="worker cap (default 1)")
    common.add_argument("--format", choices=("json", "text"), default="json")
    common.add_argument("--policy", default="smooth:100", help="oracle support: full or smooth:B")
    common.add_argument("--chi", help="character label m=..;e=..")
    common.add_argument("--override", action="append", help="p=angle (or p=zero), repeatable")
    common.add_argument("--prime-bound", type=int, default=10**4, help="Euler product cutoff P")
    common.add_argument("--d1", type=int, default=1)
    common.add_argument("--d2", type=int, default=1)
    common.add_argument("--ell", type=int)
    common.add_argument("--beta", type=int, default=0)
    common.add_argument("--gamma", type=int, default=0)
    common.add_argument("-v", "--verbose", action="store_true")

    parser = _Parser(prog="ratiogroup", description="Structure of the group generated by (an+b)/(An+B).")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    for name, (_, help_) in COMMANDS.items():
        sub.add_parser(name, parents=[common], help=help_, description=help_)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if not args.command:
            parser.print_help(sys.stderr)
            return EXIT_ERROR
    except UsageError as exc:
        print(f"ratiogroup: error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    handler = COMMANDS[args.command][0]
    try:
        code, result = handler(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"ratiogroup: error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except (ArithmeticError_, ValueError, ArithmeticError) as exc:
        print(f"ratiogroup: error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    print(format_report(result, args.format))
    return code


if __name__ == "__main__":
    sys.exit(main())
