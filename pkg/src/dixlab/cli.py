"""Command-line entry point: ``dixlab <command> ...``.

Exit codes: 0 success, 2 invalid input, 3 computation succeeded but an
``--assert`` check came out negative.
"""

import argparse
import csv
import dataclasses
import sys

import numpy as np

from . import averaging, membership, structure
from .catalog import fixture
from .errors import DixlabError, RenderError, SchemaError, UnknownFixture
from .io import dumps, emit_spec, jsonable, load_spec
from .render import render
from .selection import dist_to_center

EXIT_OK, EXIT_INPUT, EXIT_ASSERT = 0, 2, 3


class InputError(Exception):
    pass


def _element(path, name, lax):
    algebra, elements = load_spec(path, lax=lax)
    if name not in elements:
        raise InputError(f"no element named {name!r}; available: {', '.join(sorted(elements))}")
    return algebra, elements[name]


def _plain(obj):
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: _plain(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    return obj


def _per_point(records):
    return [{"point": r["point"], "psi_empty": r["psi_empty"], "f_trace": r["f_trace"],
             "conflict": r["conflict"], "distances": {"center_minimax": r["distance"]}}
            for r in records]


def _write(text, out):
    if out:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# commands


def cmd_check(args):
    _, el = _element(args.spec, args.element, args.lax)
    test = args.test
    if test in ("mag-bar", "dix-bar", "cq"):
        fn = {"mag-bar": membership.in_mag_bar, "dix-bar": membership.in_dix_bar,
              "cq": membership.in_cq}[test]
        dec = fn(el)
        verdict = bool(dec)
        per_point = _per_point(dec.per_point) if dec.per_point else []
        report = {"verdict": verdict, "per_point": per_point, "certificate": None,
                  "diagnostics": {"test": test, "witness": dec.witness}}
        negative = not verdict
    else:
        fn = membership.in_mag if test == "mag" else membership.in_dix
        v = fn(el, lipschitz=args.lipschitz, refine=args.refine)
        bar = membership.in_dix_bar(el) if test == "dix" else membership.in_mag_bar(el)
        report = {"verdict": v.status, "per_point": _per_point(bar.per_point),
                  "certificate": v.certificate,
                  "diagnostics": {"test": test, "lipschitz": args.lipschitz,
                                  "refine": args.refine, "evidence": _plain(v.evidence)}}
        if v.certificate is not None:
            ok, worst = membership.validate_certificate(el, v.certificate, dix=(test == "dix"))
            report["diagnostics"]["certificate_valid"] = ok
            report["diagnostics"]["certificate_violation"] = worst
        negative = not v.is_yes
    if args.json:
        _write(dumps(jsonable(report)), args.out)
    else:
        _write(f"{test}({args.element}) = {report['verdict']}\n", args.out)
    return EXIT_ASSERT if (args.assert_ and negative) else EXIT_OK


def cmd_distance(args):
    if args.kind == "magajna":
        if not args.element2:
            raise InputError("--kind magajna needs --element2")
        _, a = _element(args.spec, args.element, args.lax)
        _, b = _element(args.spec, args.element2, args.lax)
        value = membership.magajna_distance(a, b)
    else:
        _, a = _element(args.spec, args.element, args.lax)
        value = dist_to_center(a, lipschitz=args.lipschitz)
    report = {"kind": args.kind, "value": value, "element": args.element,
              "element2": args.element2}
    _write(dumps(jsonable(report)), args.out)
    return EXIT_OK


def _target(text, el):
    if text is None or text == "auto":
        return None
    if text in ("dix", "mag"):
        v = (membership.in_dix if text == "dix" else membership.in_mag)(el, trend=False)
        if v.certificate is None:
            raise InputError(f"no {text} certificate available for the target")
        return v.certificate
    try:
        vals = [complex(s.replace(" ", "")) for s in text.split(",")]
    except ValueError:
        raise InputError(f"cannot read target {text!r}") from None
    if len(vals) not in (1, el.algebra.n_points):
        raise InputError(f"target needs 1 or {el.algebra.n_points} values")
    return np.array(vals) if len(vals) > 1 else vals[0]


def cmd_average(args):
    _, el = _element(args.spec, args.element, args.lax)
    if args.method == "twirl":
        phi, result = averaging.blockwise_scalarize(el)
        residual = max(float(np.max(np.abs(m - np.trace(m) / m.shape[0] * np.eye(m.shape[0]))))
                       for row in result.blocks for m in row)
        report = {"method": "twirl", "terms": phi.n_terms, "verify": averaging.verify(phi),
                  "scalarization_residual": residual, "result": result}
        curve = None
    else:
        target = _target(args.target, el)
        chain, curve = averaging.descent_to_center(el, target, budget=args.iters, seed=args.seed)
        report = {"method": "descent", "steps": len(curve) - 1, "seed": args.seed,
                  "initial_residual": curve[0], "final_residual": curve[-1],
                  "verify": averaging.verify(chain)}
    if args.csv and curve is not None:
        with open(args.csv, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["step", "residual"])
            for k, r in enumerate(curve):
                w.writerow([k, repr(float(r))])
    _write(dumps(jsonable(report)), args.out)
    return EXIT_OK


def cmd_structure(args):
    algebra, _ = load_spec(args.spec, lax=args.lax)
    suite = args.suite
    if suite == "magclosed":
        rep = structure.check_magclosed(algebra)
        ok = rep["abelian_quotient_jwc"]
    elif suite == "dixadd":
        rep = structure.check_dixadd(algebra)
        ok = rep["holds"]
    elif suite == "dixmult":
        rep = structure.check_dixmult(algebra)
        ok = rep["abelian_quotient_jdp"]
    elif suite == "spans":
        rep = structure.span_identities(algebra)
        ok = rep["verified"]
    else:
        rep = structure.ideal_report(algebra)
        ok = True
    _write(dumps(jsonable({"suite": suite, "report": rep})), args.out)
    return EXIT_ASSERT if (args.assert_ and not ok) else EXIT_OK


def cmd_catalog(args):
    fx = fixture(args.fixture, points=args.points, epsilon=args.epsilon)
    alg = fx.algebra
    notes = [f"{k}: {v}" for k, v in sorted(fx.metadata.items()) if k != "surrogates"]
    notes += [f"surrogate: {s}" for s in fx.metadata.get("surrogates", [])]
    alg = type(alg)(alg.base, alg.fibers, alg.name, tuple(notes))
    elements = {k: alg.element(e.blocks) for k, e in fx.elements.items()}
    _write(emit_spec(alg, elements), args.export)
    return EXIT_OK


def cmd_render(args):
    algebra, el = _element(args.spec, args.element, args.lax)
    points = None
    if args.points:
        try:
            points = [int(s) for s in args.points.split(",")]
        except ValueError:
            raise InputError(f"cannot read points {args.points!r}") from None
    selection = None
    if args.selection != "none":
        v = membership.in_mag(el, trend=False)
        selection = v.certificate
    svg = render(algebra, el, points, selection, require_selection=(args.selection == "require"))
    with open(args.out, "wb") as fh:
        fh.write(svg)
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser():
    ap = argparse.ArgumentParser(prog="dixlab", description="Averaging and central selections "
                                 "for fibered matrix-algebra models.")
    sub = ap.add_subparsers(dest="command", required=True)

    def spec_cmd(name, help_):
        p = sub.add_parser(name, help=help_)
        p.add_argument("spec")
        p.add_argument("--lax", action="store_true", help="tolerate unknown keys")
        p.add_argument("--out", help="write the report here instead of stdout")
        return p

    p = spec_cmd("check", "membership tests")
    p.add_argument("--element", required=True)
    p.add_argument("--test", required=True, choices=["mag", "mag-bar", "dix", "dix-bar", "cq"])
    p.add_argument("--lipschitz", type=float, default=membership.DEFAULT_LIPSCHITZ)
    p.add_argument("--refine", type=int, default=membership.DEFAULT_REFINE)
    p.add_argument("--json", action="store_true")
    p.add_argument("--assert", dest="assert_", action="store_true",
                   help="exit with code 3 when the verdict is negative")
    p.set_defaults(fn=cmd_check)

    p = spec_cmd("distance", "Magajna distance or distance to the centre")
    p.add_argument("--element", required=True)
    p.add_argument("--element2")
    p.add_argument("--kind", required=True, choices=["magajna", "to-center"])
    p.add_argument("--lipschitz", type=float, default=membership.DEFAULT_LIPSCHITZ)
    p.set_defaults(fn=cmd_distance)

    p = spec_cmd("average", "averaging certificates")
    p.add_argument("--element", required=True)
    p.add_argument("--method", required=True, choices=["twirl", "descent"])
    p.add_argument("--target", help="auto, dix, mag, a complex number or one per point")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--iters", type=int, default=500)
    p.add_argument("--csv", help="write the residual curve (step, residual)")
    p.set_defaults(fn=cmd_average)

    p = spec_cmd("structure", "whole-algebra checks")
    p.add_argument("--suite", required=True,
                   choices=["magclosed", "dixadd", "dixmult", "spans", "ideals"])
    p.add_argument("--assert", dest="assert_", action="store_true")
    p.set_defaults(fn=cmd_structure)

    p = sub.add_parser("catalog", help="export a fixture as a spec document")
    p.add_argument("--fixture", required=True)
    p.add_argument("--epsilon", type=float, default=0.5)
    p.add_argument("--points", type=int)
    p.add_argument("--export", help="output path (stdout if omitted)")
    p.set_defaults(fn=cmd_catalog)

    p = sub.add_parser("render", help="SVG of numerical ranges, psi and the selection")
    p.add_argument("spec")
    p.add_argument("--lax", action="store_true")
    p.add_argument("--element", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--points")
    p.add_argument("--selection", choices=["auto", "none", "require"], default="auto")
    p.set_defaults(fn=cmd_render)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (SchemaError, InputError, UnknownFixture, RenderError, OSError) as exc:
        msg = f"unknown fixture {exc.args[0]!r}" if isinstance(exc, UnknownFixture) else exc
        sys.stderr.write(f"dixlab: error: {msg}\n")
        return EXIT_INPUT
    except DixlabError as exc:
        sys.stderr.write(f"dixlab: error: {exc}\n")
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
