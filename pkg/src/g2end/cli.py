"""Command-line front end.

    g2end classify --p 11 --n 1 --f 2,7,5,2,4,6,1
    g2end endoring --p 11 --n 1 --f 2,7,5,2,4,6,1 [--max-ell N] [--max-field-bits B]
    g2end split    --p 13 --n 1 --f 1,0,5,0,9,0,1 [--dmax D] [--try-iezzi]
    g2end corpus   curves.txt

Coefficients are serialized low-to-high; every integer in the JSON report is
a decimal string, so reports are word-size independent and byte-reproducible
for a fixed spec and seed.  Exit codes: 0 ok, 2 parse error, 3 capacity
undetermined, 4 internal invariant violation.
"""

import argparse
import json
import sys
import time

from . import invariants as inv
from . import orders as ords
from . import endoring as er
from . import split as sp
from .config import CAPS, CapacityError
from .curves import Genus2Curve
from .ff import FieldError, Poly, field


EXIT_OK = 0
EXIT_PARSE = 2
EXIT_CAPACITY = 3
EXIT_INTERNAL = 4


class ParseError(ValueError):
    pass


def parse_curve_spec(args):
    try:
        p = int(args.p)
        n = int(args.n)
    except (TypeError, ValueError) as exc:
        raise ParseError(f"bad p/n: {exc}")
    modulus = None
    if getattr(args, "modulus", None):
        modulus = _int_list(args.modulus, "modulus")
    coeffs = _int_list(args.f, "f")
    if len(coeffs) not in (6, 7):
        raise ParseError(
            f"f needs 6 or 7 coefficients (degree 5 or 6), got {len(coeffs)}")
    try:
        ctx = field(p, n, modulus)
        curve = Genus2Curve(ctx, coeffs)
    except (FieldError, ValueError) as exc:
        raise ParseError(str(exc))
    return curve


def _int_list(text, what):
    out = []
    for pos, tok in enumerate(text.split(",")):
        tok = tok.strip()
        try:
            out.append(int(tok))
        except ValueError:
            raise ParseError(f"{what}: bad integer {tok!r} at position {pos}")
    return out


def _s(x):
    """Decimal-string encoding for integers (incl. nested lists)."""
    if isinstance(x, bool) or x is None or isinstance(x, str):
        return x
    if isinstance(x, int):
        return str(x)
    if isinstance(x, (list, tuple)):
        return [_s(v) for v in x]
    return x


def _order_summary(lat, OK):
    return {
        "denominator": _s(lat.den),
        "basis": _s([list(r) for r in lat.rows]),
        "index_in_maximal": _s(ords.index(lat, OK)),
    }


def _report_base(curve, fa):
    return {
        "p": _s(curve.ctx.p),
        "n": _s(curve.ctx.n),
        "f": _s([c.c[0] if curve.ctx.n == 1 else list(c.c) for c in curve.f.c]),
        "charpoly": _s(fa.coeffs()),
        "a1": _s(fa.a1),
        "a2": _s(fa.a2),
        "jacobian_order": _s(fa.jacobian_order()),
    }


def cmd_classify(args):
    curve = parse_curve_spec(args)
    t0 = time.time()
    fa = inv.char_poly(curve)
    rep = inv.classify(curve, fa=fa)
    ag = sp.aut_group(curve)
    out = _report_base(curve, fa)
    out.update(rep.as_dict())
    out["Delta"] = _s(rep.delta_big)
    out["delta"] = _s(rep.delta_small)
    out["simple_over_closure"] = rep.absolutely_simple
    out["automorphism_group"] = {"order": _s(ag.order), "label": ag.label}
    out["elapsed_s"] = round(time.time() - t0, 3)
    return out, EXIT_OK


def cmd_endoring(args):
    curve = parse_curve_spec(args)
    t0 = time.time()
    if args.max_field_bits:
        CAPS.torsion_degree_limit = max(
            4, args.max_field_bits // max(1, curve.ctx.p.bit_length()))
    fa = inv.char_poly(curve)
    rep = inv.classify(curve, fa=fa)
    out = _report_base(curve, fa)
    out["table1_row"] = rep.table1_row
    if not rep.simple_over_base:
        out["note"] = ("surface is not simple over the base field; "
                       "run the split command for elliptic factors")
        out["elapsed_s"] = round(time.time() - t0, 3)
        return out, EXIT_OK
    ctx = ords.AlgebraCtx(fa)
    OK = ords.maximal_order(ctx)
    zpi = ords.zpi_order(ctx)
    out["nu"] = _s(ords.index(zpi, OK))
    result = er.ascend(curve, fa=fa, seed=args.seed)
    out["end_ring"] = _order_summary(result.order, OK)
    out["exact"] = result.exact
    out["certificate"] = [
        {k: _s(v) for k, v in c.items()} for c in result.certificate]
    if not result.exact:
        out["undetermined_at"] = _s(result.undetermined)
        out["bounds"] = {
            "lower": _order_summary(result.order, OK),
            "upper": _order_summary(result.upper, OK),
        }
    out["elapsed_s"] = round(time.time() - t0, 3)
    return out, EXIT_OK if result.exact else EXIT_CAPACITY


def cmd_split(args):
    curve = parse_curve_spec(args)
    t0 = time.time()
    fa = inv.char_poly(curve)
    rep = inv.classify(curve, fa=fa)
    ag = sp.aut_group(curve)
    out = _report_base(curve, fa)
    out["table1_row"] = rep.table1_row
    out["automorphism_group"] = {"order": _s(ag.order), "label": ag.label}
    factors = []
    # (2,2)-kernel scan
    try:
        e1, e2, res = sp.find_split_22(curve)
        k = e1.ctx.n // curve.ctx.n
        fk = inv.base_change(fa, k) if k > 1 else fa
        t1, t2 = e1.trace(), e2.trace()
        verified = (fk.a1, fk.a2) == (-(t1 + t2), t1 * t2 + 2 * e1.ctx.order)
        factors.append({
            "via": "richelot-degenerate",
            "field_degree_over_base": _s(k),
            "traces": _s([t1, t2]),
            "charpoly_product_verified": verified,
        })
        if not verified:
            return out, EXIT_INTERNAL
    except sp.NotFound as exc:
        out["richelot_22"] = f"not found: {exc}"
    except CapacityError as exc:
        out["richelot_22"] = f"capacity: {exc}"
    # subcover search
    try:
        sub = sp.subcover_search(curve, d_max=args.dmax)
        factors.append({
            "via": "regular-differentials",
            "degree": _s(sub.degree),
            "f1": _s([c.c[0] if curve.ctx.n == 1 else list(c.c) for c in sub.f1.c]),
            "codomain_trace": _s(sub.curve.trace()),
            "identity_residual_zero": sub.verify(curve.f),
        })
    except sp.NotFound as exc:
        out["subcover"] = f"not found: {exc}"
    except CapacityError as exc:
        out["subcover"] = f"capacity: {exc}"
    if args.try_iezzi:
        try:
            orderings = sp.iezzi_orderings(curve, max_orderings=200)
            hit = None
            for perm in orderings:
                try:
                    ep, em = sp.iezzi_split(list(perm), curve.f.lead())
                except sp.SplitError:
                    continue
                t1, t2 = ep.trace(), em.trace()
                if (fa.a1, fa.a2) == (-(t1 + t2), t1 * t2 + 2 * curve.ctx.order):
                    hit = (t1, t2)
                    break
            if hit:
                factors.append({"via": "symmetric-sextic-formulas",
                                "traces": _s(list(hit)),
                                "charpoly_product_verified": True})
            else:
                out["iezzi"] = "no verified ordering"
        except sp.SplitError as exc:
            out["iezzi"] = str(exc)
    out["factors"] = factors
    out["elapsed_s"] = round(time.time() - t0, 3)
    return out, EXIT_OK


def cmd_corpus(args):
    """One curve spec per line: p n c0,...,c6 [expected-json]."""
    failures = 0
    reports = []
    with open(args.path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split(None, 3)
            if len(parts) < 3:
                print(f"line {lineno}: malformed", file=sys.stderr)
                failures += 1
                continue
            ns = argparse.Namespace(p=parts[0], n=parts[1], f=parts[2],
                                    modulus=None, seed=0)
            try:
                rep, _code = cmd_classify(ns)
            except (ParseError, CapacityError) as exc:
                print(f"line {lineno}: {exc}", file=sys.stderr)
                failures += 1
                continue
            rep.pop("elapsed_s", None)
            reports.append(rep)
            if len(parts) == 4:
                expected = json.loads(parts[3])
                diffs = {k: (expected[k], rep.get(k))
                         for k in expected if rep.get(k) != expected[k]}
                if diffs:
                    print(f"line {lineno}: diff {diffs}", file=sys.stderr)
                    failures += 1
    return {"reports": reports, "failures": _s(failures)}, (
        EXIT_OK if failures == 0 else EXIT_INTERNAL)


def build_parser():
    ap = argparse.ArgumentParser(prog="g2end", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--p", required=True, help="field characteristic (odd prime)")
        p.add_argument("--n", default="1", help="extension degree")
        p.add_argument("--modulus", default=None,
                       help="optional modulus coefficients c0,c1,...")
        p.add_argument("--f", required=True,
                       help="curve coefficients c0,...,c6 low to high")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--json", dest="json_path", default=None,
                       help="also write the report to this path")

    p1 = sub.add_parser("classify", help="invariants + table row")
    common(p1)
    p2 = sub.add_parser("endoring", help="endomorphism ring by order ascent")
    common(p2)
    p2.add_argument("--max-ell", type=int, default=None,
                    help="skip EL tests above this prime")
    p2.add_argument("--max-field-bits", type=int, default=None,
                    help="torsion extension size cap, in bits of q^k")
    p3 = sub.add_parser("split", help="elliptic factors and subcovers")
    common(p3)
    p3.add_argument("--dmax", type=int, default=1)
    p3.add_argument("--try-iezzi", action="store_true")
    p4 = sub.add_parser("corpus", help="run classify over a corpus file")
    p4.add_argument("path")
    return ap


def main(argv=None):
    ap = build_parser()
    args = ap.parse_args(argv)
    handler = {"classify": cmd_classify, "endoring": cmd_endoring,
               "split": cmd_split, "corpus": cmd_corpus}[args.command]
    try:
        report, code = handler(args)
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except CapacityError as exc:
        print(f"capacity: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    except (inv.InvariantError, AssertionError) as exc:
        print(f"internal invariant violation: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    text = json.dumps(report, indent=2, sort_keys=True)
    print(text)
    if getattr(args, "json_path", None):
        with open(args.json_path, "w") as fh:
            fh.write(text + "\n")
    return code


if __name__ == "__main__":
    sys.exit(main())
