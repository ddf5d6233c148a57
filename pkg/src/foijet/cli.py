"""Command line driver.

Each subcommand reads exact JSON problem files, runs one task, and prints a
delimited report (``--json`` switches to the full JSON form).  ``--out DIR``
additionally writes ``residuals.csv``; the numeric validation task also
writes ``errors.csv`` and a convergence figure next to it.

Exit codes: 0 when every check passes, 1 when a residual fails, 2 on bad
input.
"""
from __future__ import annotations

import argparse
import json
import os
import sys

from .errors import FoijetError, ParseError
from .foi import (
    PhasePair,
    construct_foi,
    ibp_residual,
    lambda1_check,
    strong_defect,
    strong_normalize,
)
from .jets import WeightedJet, monomials_up_to
from .kfoi import hessian_report, kl_axiom_suite, multinomial_check
from .oracles import laplace_validate, oracle_foi_apply
from .problems import load_json, parse_jet, parse_pair, parse_potential
from .rational import IMAG, grat
from .reports import (
    Report,
    Residual,
    bound_residual,
    exact_residual,
    laplace_results,
    write_convergence_png,
    write_errors_csv,
    write_residuals_csv,
)
from .sepvars import (
    KahlerPotential,
    berezin,
    dual_potential,
    poisson_bracket,
    star,
    trace_density,
)


def _load_pair(path: str) -> tuple[PhasePair, dict]:
    obj = load_json(path)
    return parse_pair(obj, path), obj


def _load_potential(path: str) -> tuple[KahlerPotential, dict]:
    obj = load_json(path)
    return parse_potential(obj, path), obj


def _load_jet(path: str, vars: tuple[str, ...]) -> tuple[WeightedJet, dict]:
    obj = load_json(path)
    return parse_jet(obj, path, variables=vars), obj


def _flat(text: str) -> str:
    return " | ".join(line.strip() for line in text.splitlines())


def _write_out(report: Report, out: str) -> None:
    os.makedirs(out, exist_ok=True)
    write_residuals_csv(report, os.path.join(out, "residuals.csv"))


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_construct(args) -> Report:
    pair, obj = _load_pair(args.pair)
    report = Report("construct", {"pair": obj, "order": args.order})
    lam = construct_foi(pair, args.order)
    report.results["functional"] = _flat(lam.render())
    one = WeightedJet.const(pair.vars, grat(1))
    report.results["value_one"] = str(lam.apply(one))
    report.add(exact_residual(
        "oracle_match_one",
        lam.apply(one) - oracle_foi_apply(pair, one, args.order),
    ))
    if args.apply:
        f, fobj = _load_jet(args.apply, pair.vars)
        report.inputs["apply"] = fobj
        report.results["value"] = str(lam.apply(f))
        report.add(exact_residual(
            "oracle_match_apply",
            lam.apply(f) - oracle_foi_apply(pair, f, args.order),
        ))
    return report


def cmd_check_foi(args) -> Report:
    pair, obj = _load_pair(args.pair)
    report = Report("check-foi", {"pair": obj, "order": args.order})
    lam = construct_foi(pair, args.order)
    report.results["functional"] = _flat(lam.render())
    for alpha in monomials_up_to(pair.n, 2):
        f = WeightedJet.monomial(pair.vars, alpha)
        label = "".join(f"{v}^{e}" for v, e in zip(pair.vars, alpha) if e) or "1"
        for d in pair.vars:
            report.add(exact_residual(
                f"ibp[{d},{label}]", ibp_residual(lam, pair, d, f)
            ))
        report.add(exact_residual(
            f"oracle[{label}]",
            lam.apply(f) - oracle_foi_apply(pair, f, args.order),
        ))
    if lam.leading_is_delta and args.order >= 1:
        fit = lambda1_check(lam, pair)
        value = "0" if fit.prediction_matches else str(
            [str(c) for c in fit.correction]
        )
        report.add(Residual("row1_cubic_prediction", value,
                            fit.prediction_matches))
        defect = strong_defect(lam, pair)
        report.results["defect"] = str(defect)
        if defect.coeff(0) == grat(1):
            report.results["normalizing_shift"] = str(strong_normalize(lam, pair))
    return report


def cmd_star(args) -> Report:
    kp, obj = _load_potential(args.potential)
    f, fobj = _load_jet(args.f, kp.vars)
    g, gobj = _load_jet(args.g, kp.vars)
    report = Report("star", {
        "potential": obj, "f": fobj, "g": gobj, "order": args.order,
    })
    fg = star(kp, f, g, args.order)
    report.results["product"] = fg.render()
    if args.order >= 1:
        gf = star(kp, g, f, args.order)
        anti = (fg - gf).nu_component(1)
        pb = poisson_bracket(kp, f, g, anti.trunc).scale(IMAG)
        report.add(exact_residual(
            "c1_antisymmetry_vs_bracket", anti - pb.truncate(anti.trunc)
        ))
    return report


def cmd_berezin(args) -> Report:
    kp, obj = _load_potential(args.potential)
    f, fobj = _load_jet(args.f, kp.vars)
    direction = "inverse" if args.inverse else "forward"
    report = Report("berezin", {
        "potential": obj, "f": fobj, "order": args.order, "direction": direction,
    })
    g = berezin(kp, f, args.order, direction)
    report.results["transform"] = g.render()
    back = berezin(kp, g, args.order,
                   "forward" if args.inverse else "inverse")
    trunc = min(back.trunc, f.trunc)
    report.add(exact_residual(
        "roundtrip", back.truncate(trunc) - f.truncate(trunc)
    ))
    return report


def cmd_dual_potential(args) -> Report:
    kp, obj = _load_potential(args.potential)
    report = Report("dual-potential", {"potential": obj, "weight": args.weight})
    dual = dual_potential(kp, args.weight)
    report.results["psi"] = dual.psi.render()
    report.add(exact_residual("nu_constant_residual", dual.psinu_residual))
    for k, zk in enumerate(kp.hol):
        report.add(exact_residual(
            f"gradient[{zk}]", dual.psi.derive(zk) - dual.gradients[k]
        ))
    return report


def cmd_trace_density(args) -> Report:
    kp, obj = _load_potential(args.potential)
    report = Report("trace-density", {"potential": obj, "weight": args.weight})
    td = trace_density(kp, args.weight)
    report.results["log_density"] = td.log_density.render()
    report.results["prefactor"] = str(td.prefactor)
    report.add(exact_residual("trace_identity", td.identity_residual))
    return report


def cmd_kfoi_check(args) -> Report:
    kp, obj = _load_potential(args.potential)
    report = Report("kfoi-check", {
        "potential": obj, "points": args.points, "order": args.order,
    })
    z1 = WeightedJet.monomial(kp.vars, (1,) + (0,) * (2 * kp.m - 1))
    zb1 = WeightedJet.monomial(
        kp.vars, (0,) * kp.m + (1,) + (0,) * (kp.m - 1)
    )
    mixed = WeightedJet.const(kp.vars, grat(1)) + z1 * zb1
    tests = (
        tuple(zb1 if i % 2 == 0 else z1 for i in range(args.points)),
        tuple(mixed for _ in range(args.points)),
    )
    hess = hessian_report(kp, args.points)
    report.results["hessian_determinant"] = str(hess.determinant)
    report.add(exact_residual(
        "hessian_block_pattern", 0 if hess.pattern_ok else 1
    ))
    suite = kl_axiom_suite(kp, args.points, args.order, tests)
    report.results["normalizer"] = str(suite.normalizer)
    one = suite.normalizer - grat(1)
    report.add(exact_residual("normalizer_is_one", one))
    for name, group in (
        ("ibp", suite.ibp_residuals),
        ("nu_identity", suite.nu_residuals),
        ("star_match", suite.star_residuals),
        ("collapse", suite.collapse_residuals),
    ):
        for i, res in enumerate(group):
            report.add(exact_residual(f"{name}[{i}]", res))
    wedge = multinomial_check(kp.m, args.points, seed=args.seed)
    report.results["wedge_value"] = str(wedge.wedge_value)
    report.add(exact_residual(
        "wedge_vs_determinant", wedge.wedge_value - wedge.determinant_value
    ))
    return report


def cmd_laplace_validate(args) -> Report:
    pair, obj = _load_pair(args.pair)
    if args.f:
        f, fobj = _load_jet(args.f, pair.vars)
    else:
        f = WeightedJet.const(pair.vars, grat(1))
        fobj = None
    hs = tuple(float(h) for h in args.h.split(","))
    box = None
    if args.box:
        edges = [float(b) for b in args.box.split(",")]
        if len(edges) != 2 * pair.n:
            raise ParseError(
                f"box needs {2 * pair.n} numbers for {pair.n} variables", "box"
            )
        box = tuple(
            (edges[2 * i], edges[2 * i + 1]) for i in range(pair.n)
        )
    inputs = {"pair": obj, "order": args.order, "h": list(hs)}
    if fobj is not None:
        inputs["f"] = fobj
    if box is not None:
        inputs["box"] = [list(b) for b in box]
    report = Report("laplace-validate", inputs)
    rep = laplace_validate(pair, f, args.order, hs, box)
    report.results.update(laplace_results(rep))
    if len(hs) >= 2:
        report.add(bound_residual(
            "slope_error",
            (rep.slope - rep.expected_slope) / rep.expected_slope,
            args.slope_tol,
        ))
    if args.rel_tol is not None:
        report.add(bound_residual("max_rel_err", rep.max_rel_err, args.rel_tol))
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        write_errors_csv(rep, os.path.join(args.out, "errors.csv"))
        write_convergence_png(rep, os.path.join(args.out, "convergence.png"))
    return report


# ---------------------------------------------------------------------------
# argument wiring
# ---------------------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="foijet",
        description="exact formal oscillatory integrals and star products",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--json", action="store_true",
                       help="print the full report as JSON")
        p.add_argument("--out", metavar="DIR",
                       help="directory for residuals.csv and figures")

    p = sub.add_parser("construct", help="build a functional from a pair file")
    p.add_argument("--pair", required=True, metavar="FILE")
    p.add_argument("--order", required=True, type=int, metavar="R")
    p.add_argument("--apply", metavar="FILE", help="jet to pair the functional with")
    common(p)
    p.set_defaults(run=cmd_construct)

    p = sub.add_parser("check-foi", help="verify the defining identities")
    p.add_argument("--pair", required=True, metavar="FILE")
    p.add_argument("--order", required=True, type=int, metavar="R")
    common(p)
    p.set_defaults(run=cmd_check_foi)

    p = sub.add_parser("star", help="multiply two jets on a chart")
    p.add_argument("--potential", required=True, metavar="FILE")
    p.add_argument("--f", required=True, metavar="FILE")
    p.add_argument("--g", required=True, metavar="FILE")
    p.add_argument("--order", required=True, type=int, metavar="R")
    common(p)
    p.set_defaults(run=cmd_star)

    p = sub.add_parser("berezin", help="apply the chart transform to a jet")
    p.add_argument("--potential", required=True, metavar="FILE")
    p.add_argument("--f", required=True, metavar="FILE")
    p.add_argument("--order", required=True, type=int, metavar="R")
    p.add_argument("--inverse", action="store_true")
    common(p)
    p.set_defaults(run=cmd_berezin)

    p = sub.add_parser("dual-potential", help="solve for the dual potential")
    p.add_argument("--potential", required=True, metavar="FILE")
    p.add_argument("--weight", required=True, type=int, metavar="W")
    common(p)
    p.set_defaults(run=cmd_dual_potential)

    p = sub.add_parser("trace-density", help="trace density and normalization")
    p.add_argument("--potential", required=True, metavar="FILE")
    p.add_argument("--weight", required=True, type=int, metavar="W")
    common(p)
    p.set_defaults(run=cmd_trace_density)

    p = sub.add_parser("kfoi-check", help="verify the chain functional")
    p.add_argument("--potential", required=True, metavar="FILE")
    p.add_argument("--points", required=True, type=int, metavar="L")
    p.add_argument("--order", required=True, type=int, metavar="R")
    p.add_argument("--seed", type=int, default=0)
    common(p)
    p.set_defaults(run=cmd_kfoi_check)

    p = sub.add_parser("laplace-validate",
                       help="compare against numeric integration")
    p.add_argument("--pair", required=True, metavar="FILE")
    p.add_argument("--order", required=True, type=int, metavar="R")
    p.add_argument("--f", metavar="FILE", help="amplitude jet, default 1")
    p.add_argument("--h", default="0.02,0.01,0.005",
                   help="comma-separated h values")
    p.add_argument("--box", metavar="A,B[,C,D]",
                   help="integration box, two numbers per variable")
    p.add_argument("--slope-tol", type=float, default=0.2,
                   help="relative tolerance on the fitted slope")
    p.add_argument("--rel-tol", type=float, default=None,
                   help="also require max_rel_err below this bound")
    common(p)
    p.set_defaults(run=cmd_laplace_validate)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        report = args.run(args)
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FoijetError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    if args.json:
        print(json.dumps(report.to_dict(), indent=2))
    else:
        print(report.delimited())
    if args.out:
        _write_out(report, args.out)
    return 0 if report.passed else 1


if __name__ == "__main__":
    sys.exit(main())
