"""Command-line entry point.

Exit status: 0 on success, 1 when a computed verdict fails (a fixture mismatch,
a failed check on a search report), 2 on usage or input errors.  With --json,
stdout carries exactly one JSON document or a JSON-lines stream; diagnostics go
to stderr.  Search-style subcommands always stream JSON lines.
"""

from __future__ import annotations

import argparse
import json
import logging
import random
import sys
from fractions import Fraction
from typing import Iterable

from . import __version__
from .arith import is_prime, is_squarefree
from .curve import SingularCurveError, WeierstrassModel, global_minimal_model, quadratic_twist
from .families import (
    family_from_text,
    get_family,
    list_families,
    parse_poly,
    specialize,
    torsion_point_order,
)
from .lmfdb_client import FixtureNotFound, LabelError, LMFDBClient, TransportError, verify_fixture
from .localdata import ContractError, conductor, global_tamagawa, tate_algorithm
from .search import (
    almost_prime_scan,
    bound_scan,
    integer_domain,
    prime_domain,
    prop31_check,
    prop32_check,
    refined_bound_scan,
    squarefree_scan,
    torsion_divisibility_search,
)
from .shapes import check_shape, shape_for
from .twists import TwistConstraints, TwistHypothesisError, predict_twist_type, twist_search

log = logging.getLogger("tamagawa")

SEARCH_MODES = ("almost-prime", "squarefree", "prop31", "prop32", "divisibility", "bound", "refined")


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# output helpers


def _dump(obj) -> str:
    return json.dumps(obj, sort_keys=True)


def _emit_json(obj) -> None:
    print(_dump(obj))


def _emit_lines(rows: Iterable[dict]) -> int:
    n = 0
    for row in rows:
        print(_dump(row), flush=True)
        n += 1
    return n


def _local_row(ld) -> str:
    return f"{ld.p:>8}  {str(ld.kodaira):<6} c_p={ld.cp:<4} f_p={ld.fp}  v(D)={ld.v_delta:<4} {ld.kind}"


def _resolve_curve(args, client: LMFDBClient | None = None) -> tuple[str, WeierstrassModel]:
    if getattr(args, "curve", None) and getattr(args, "label", None):
        raise UsageError("give either --curve or --label, not both")
    if getattr(args, "curve", None):
        return args.curve, WeierstrassModel.parse(args.curve)
    if getattr(args, "label", None):
        client = client or LMFDBClient(online=args.online)
        fx = client.fetch(args.label)
        return fx.label, fx.model
    raise UsageError("a curve is required: --curve \"[a1,a2,a3,a4,a6]\" or --label N.xK")


def _prime(text: str) -> int:
    try:
        p = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not an integer")
    if not is_prime(p):
        raise argparse.ArgumentTypeError(f"{p} is not prime")
    return p


def _positive(text: str) -> int:
    n = int(text)
    if n < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return n


# ---------------------------------------------------------------------------
# subcommands


def cmd_local(args) -> int:
    name, E = _resolve_curve(args)
    ld = tate_algorithm(E, args.p)
    if args.json:
        _emit_json({"curve": name, **ld.to_json()})
    else:
        print(f"{name} at p = {args.p}")
        print(_local_row(ld))
    return 0


def cmd_global(args) -> int:
    name, E = _resolve_curve(args)
    M, _ = global_minimal_model(E)
    c, breakdown = global_tamagawa(M)
    N = conductor(M)
    if args.json:
        _emit_json({
            "curve": name,
            "minimal_model": M.to_json(),
            "discriminant": str(M.discriminant),
            "conductor": N,
            "c": c,
            "breakdown": [ld.to_json() for ld in breakdown],
        })
    else:
        print(f"{name}: minimal model {list(M.int_ainvs())}, conductor {N}, c(E) = {c}")
        for ld in breakdown:
            print(_local_row(ld))
    return 0


def cmd_twist(args) -> int:
    name, E = _resolve_curve(args)
    if not is_squarefree(args.d) or args.d == 0:
        raise UsageError(f"d = {args.d} must be a nonzero square-free integer")
    Ed = quadratic_twist(E, args.d)
    M, _ = global_minimal_model(Ed)
    c, breakdown = global_tamagawa(M)
    out = {"curve": name, "d": args.d, "twist": M.to_json(), "c": c, "breakdown": [ld.to_json() for ld in breakdown]}
    ok = True
    if args.p is not None:
        src = tate_algorithm(E, args.p)
        dst = tate_algorithm(Ed, args.p)
        pred = predict_twist_type(src.kodaira, args.p, args.d)
        allowed = sorted(str(k) for k in pred) if isinstance(pred, frozenset) else None
        ok = allowed is None or dst.kodaira in pred
        out["at_p"] = {
            "p": args.p,
            "source": src.to_json(),
            "target": dst.to_json(),
            "predicted": allowed,
            "prediction_holds": ok if allowed is not None else None,
        }
    if args.json:
        _emit_json(out)
    else:
        print(f"{name} twisted by d = {args.d}: {list(M.int_ainvs())}, c = {c}")
        for ld in breakdown:
            print(_local_row(ld))
        if args.p is not None:
            a = out["at_p"]
            pred_txt = ", ".join(a["predicted"]) if a["predicted"] is not None else "unconstrained"
            print(f"at {args.p}: {a['source']['kodaira']} -> {a['target']['kodaira']} (predicted: {pred_txt})")
    return 0 if ok else 1


def cmd_twist_search(args) -> int:
    _, E = _resolve_curve(args)
    cons = TwistConstraints(
        max_abs_d=args.max_d,
        positive_only=args.positive_only,
        num_prime_factors=args.factors,
        include_trivial=args.include_trivial,
        limit=args.limit,
    )
    bad = 0
    for hit in twist_search(E, cons, jobs=args.jobs):
        bad += not hit.identity_holds
        print(_dump(hit.to_json()), flush=True)
    return 1 if bad else 0


def cmd_family(args) -> int:
    if args.list:
        for fid in list_families():
            fam = get_family(fid)
            if args.json:
                print(_dump({"id": fid, "ainvs": fam.ainvs_str(), "torsion_order": fam.torsion_order}))
            else:
                print(f"{fid:<12} {fam.ainvs_str()}  {fam.description}")
        return 0
    if not args.id or args.at is None:
        raise UsageError("family needs an id and --at T (or --list)")
    fam = get_family(args.id)
    rec = specialize(fam, Fraction(args.at))
    out = rec.to_json()
    ok = rec.admissible
    if rec.admissible:
        M, _ = global_minimal_model(rec.model)
        c, breakdown = global_tamagawa(M)
        out.update(c=c, breakdown=[ld.to_json() for ld in breakdown])
        if fam.torsion_order is not None and fam.point is not None:
            order = torsion_point_order(rec)
            out["torsion"] = {"claimed": fam.torsion_order, "computed": order, "ok": order == fam.torsion_order}
            ok = order == fam.torsion_order
    if args.json:
        _emit_json(out)
    else:
        if not rec.admissible:
            print(f"{fam.id} at T = {rec.t}: {rec.reason}")
        else:
            print(f"{fam.id} at T = {rec.t}: {out['model']}, c = {out['c']}")
            for ld in breakdown:
                print(_local_row(ld))
            if "torsion" in out:
                t = out["torsion"]
                print(f"(0,0) has order {t['computed']} (claimed {t['claimed']})")
    return 0 if ok else 1


def _search_family(args):
    if args.family_ainvs:
        return family_from_text(args.family or "user", args.family_ainvs)
    if not args.family:
        raise UsageError(f"--mode {args.mode} needs --family ID or --family-ainvs \"[...]\"")
    return get_family(args.family)


def cmd_search(args) -> int:
    mode = args.mode
    limit = args.limit
    if mode == "prop31":
        reports = prop31_check(limit or 50, include_p2=args.include_p2, jobs=args.jobs)
    elif mode == "prop32":
        reports = prop32_check(limit or 25, jobs=args.jobs)
    elif mode == "divisibility":
        if args.order is None or args.p is None:
            raise UsageError("--mode divisibility needs --order N' and --p P")
        reports = torsion_divisibility_search(args.order, args.p, limit or 10, jobs=args.jobs)
    elif mode == "almost-prime":
        if not args.poly:
            raise UsageError("--mode almost-prime needs --poly F(T)")
        F = parse_poly(args.poly)
        domain = prime_domain(args.start) if args.domain == "primes" else integer_domain(args.start)
        hits = almost_prime_scan(F, args.r, domain, limit=limit or 1000)
        n = _emit_lines(
            {"n": h.n, "value": h.value, "omega": h.omega, "factorization": h.factorization.to_json()} for h in hits
        )
        log.info("%d hits", n)
        return 0
    else:
        fam = _search_family(args)
        scan = {"squarefree": squarefree_scan, "refined": refined_bound_scan}.get(mode)
        if scan is not None:
            reports = scan(fam, limit or 1000, start=args.start, jobs=args.jobs)
        else:
            reports = bound_scan(fam, limit or 1000, s=args.s, start=args.start, jobs=args.jobs)
    failed = 0
    for rep in reports:
        failed += not rep.ok
        print(_dump(rep.to_json()), flush=True)
    if failed:
        log.error("%d report(s) failed their checks", failed)
    return 1 if failed else 0


def cmd_verify(args) -> int:
    client = LMFDBClient(online=args.online)
    if args.all_paper_fixtures:
        fixtures = list(client.fixtures.values())
    elif args.label:
        fixtures = [client.fetch(args.label)]
    else:
        raise UsageError("verify needs --all-paper-fixtures or --label")
    failed = 0
    for fx in fixtures:
        v = verify_fixture(fx)
        row = v.to_json()
        ok = v.ok
        if args.shapes and fx.isogeny_degree is not None and shape_for(fx.isogeny_degree):
            sv = check_shape(fx.isogeny_degree, v.c)
            row["shape"] = {"N": sv.N, "allowed": sv.shape, "support_ok": sv.support_ok, "lower_ok": sv.lower_ok}
            ok = ok and sv.ok
            row["ok"] = ok
        failed += not ok
        if args.json:
            print(_dump(row), flush=True)
        else:
            status = "ok" if ok else "MISMATCH"
            extra = "; ".join(v.mismatches)
            if "shape" in row and not (row["shape"]["support_ok"] and row["shape"]["lower_ok"]):
                extra = "; ".join(filter(None, [extra, f"c = {v.c} outside {row['shape']['allowed']}"]))
            print(f"{fx.label:<12} c = {v.c:<5} {status}" + (f"  {extra}" if extra else ""))
    return 1 if failed else 0


def cmd_fetch(args) -> int:
    client = LMFDBClient(online=args.online)
    fx = client.fetch(args.label)
    if args.json:
        _emit_json({"label": fx.label, **fx.to_json()})
    else:
        print(f"{fx.label}: {list(fx.ainvs)}")
    return 0


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="machine-readable output on stdout")
    common.add_argument("--jobs", type=_positive, default=1, help="worker processes for searches (default 1)")
    common.add_argument("--seed", type=int, default=0, help="seed for anything randomized (default 0)")
    common.add_argument("--online", action="store_true", help="allow fetching unknown labels over HTTP")
    common.add_argument("-v", "--verbose", action="store_true")

    curve = argparse.ArgumentParser(add_help=False)
    curve.add_argument("--curve", help='curve literal "[a1,a2,a3,a4,a6]"; entries may be p/q')
    curve.add_argument("--label", help="curve label such as 49.a1")

    ap = argparse.ArgumentParser(prog="tamagawa", description="Tamagawa numbers of elliptic curves over Q.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", metavar="COMMAND", required=True)

    p = sub.add_parser("local", parents=[common, curve], help="local data at one prime")
    p.add_argument("--p", type=_prime, required=True)
    p.set_defaults(func=cmd_local, parser=p)

    p = sub.add_parser("global", parents=[common, curve], help="minimal model, conductor and c(E)")
    p.set_defaults(func=cmd_global, parser=p)

    p = sub.add_parser("twist", parents=[common, curve], help="quadratic twist by d, optionally checked at p")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--p", type=_prime)
    p.set_defaults(func=cmd_twist, parser=p)

    p = sub.add_parser("twist-search", parents=[common, curve], help="stream twists d = 1 mod 4 with c(E^d)")
    p.add_argument("--max-d", type=_positive, default=10_000)
    p.add_argument("--positive-only", action="store_true")
    p.add_argument("--factors", type=_positive, help="exact number of prime factors of d")
    p.add_argument("--include-trivial", action="store_true", help="also report d = 1")
    p.add_argument("--limit", type=_positive)
    p.set_defaults(func=cmd_twist_search, parser=p)

    p = sub.add_parser("family", parents=[common], help="specialize a parametric family")
    p.add_argument("id", nargs="?")
    p.add_argument("--at", help="parameter value (integer or p/q)")
    p.add_argument("--list", action="store_true", help="list registered families")
    p.set_defaults(func=cmd_family, parser=p)

    p = sub.add_parser("search", parents=[common], help="sieve searches; JSON lines, one report per line")
    p.add_argument("--mode", choices=SEARCH_MODES, required=True)
    p.add_argument("--family", help="registered family id")
    p.add_argument("--family-ainvs", help='user family "[a1,...,a6]" with polynomials in T')
    p.add_argument("--limit", type=_positive, help="parameter bound, or number of hits for prop31/prop32/divisibility")
    p.add_argument("--start", type=int, default=1)
    p.add_argument("--r", type=_positive, default=3, help="Omega cap for almost-prime mode")
    p.add_argument("--poly", help="polynomial F(T) for almost-prime mode, e.g. 16*T+1")
    p.add_argument("--domain", choices=("primes", "integers"), default="primes")
    p.add_argument("--s", type=_positive, help="sieve constant for bound mode")
    p.add_argument("--order", type=int, help="torsion order N' for divisibility mode")
    p.add_argument("--p", type=_prime, help="prime p for divisibility mode")
    p.add_argument("--include-p2", action="store_true", help="prop31: also report p = 2")
    p.set_defaults(func=cmd_search, parser=p)

    p = sub.add_parser("verify", parents=[common], help="check vendored fixtures against computed data")
    p.add_argument("--all-paper-fixtures", action="store_true")
    p.add_argument("--label")
    p.add_argument("--shapes", action="store_true", help="also check c(E) against the isogeny-degree shape")
    p.set_defaults(func=cmd_verify, parser=p)

    p = sub.add_parser("fetch", parents=[common], help="a-invariants for a label")
    p.add_argument("label")
    p.set_defaults(func=cmd_fetch, parser=p)
    return ap


def main(argv: list[str] | None = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    random.seed(args.seed)
    try:
        return args.func(args)
    except (UsageError, LabelError, SingularCurveError, ContractError, TwistHypothesisError, ValueError, KeyError) as exc:
        args.parser.print_usage(sys.stderr)
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"tamagawa {args.command}: error: {msg}", file=sys.stderr)
        return 2
    except FixtureNotFound as exc:
        print(f"tamagawa {args.command}: not found: {exc}", file=sys.stderr)
        return 2
    except TransportError as exc:
        print(f"tamagawa {args.command}: network error: {exc}", file=sys.stderr)
        return 2
    except ArithmeticError as exc:
        print(f"tamagawa {args.command}: cannot compute: {exc}", file=sys.stderr)
        return 2
    except BrokenPipeError:
        return 0


if __name__ == "__main__":
    sys.exit(main())
