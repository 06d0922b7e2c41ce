"""Command-line interface.

    nthbound validate  --input FILE     check the datum, lattice and isometries
    nthbound classify  --input FILE     rank-2 reduction and Bravais type
    nthbound spectra   --input FILE     spectra of the symmetrized actions
    nthbound optimize  --input FILE     best averaging measure
    nthbound bound     --input FILE     best applicable height bound
    nthbound enumerate --input FILE     lattice vectors below a height bound
    nthbound report    --input FILE     bound, then enumeration up to it

Exit status: 0 on success (with a bound, for ``bound``/``report``), 2 when
no criterion applies, 1 on any error.  The error is still written as a
report.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import platform
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .bounds import NONE, Tolerances, best_bound
from .bravais import REL_TOL, classify
from .datum import parse_datum
from .enumeration import BOUNDARY_TOL, DEFAULT_CAP, short_vectors
from .errors import NthboundError
from .lattice import ISO_TOL, PD_TOL, SYM_TOL, check_isometry, lagrange_reduce, validate_lattice
from .measure_opt import DEFAULT_BUDGET, optimize_mu
from .reporting import envelope, to_json, to_text
from .spectral import alpha_h, symmetrize

COMMANDS = ("validate", "classify", "spectra", "optimize", "bound", "enumerate", "report")

EXIT_OK, EXIT_ERROR, EXIT_NONE = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on usage errors; 2 is reserved for "no bound"
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--input", required=True, help="curve datum file (TOML)")
    common.add_argument("--format", choices=("text", "json"), default="text")
    common.add_argument("--output", help="write the report here instead of stdout (plus a .meta.json sidecar)")
    common.add_argument("--tol-pd", type=float, default=PD_TOL, help="Cholesky pivot floor")
    common.add_argument("--tol-sym", type=float, default=SYM_TOL, help="relative Gram asymmetry allowed")
    common.add_argument("--tol-iso", type=float, default=ISO_TOL, help="relative isometry residual allowed")
    common.add_argument("--tol-bravais", type=float, default=REL_TOL, help="relative tolerance of Bravais tests")
    common.add_argument("--budget", type=int, default=DEFAULT_BUDGET, help="optimizer iterations")
    common.add_argument("--restarts", type=int, default=0, help="extra optimizer runs from random starts")
    common.add_argument("--seed", type=int, default=None, help="seed for --restarts")
    common.add_argument("--enum-bound", type=float, default=None, help="height bound for enumeration")
    common.add_argument("--enum-cap", type=int, default=DEFAULT_CAP, help="maximum number of enumerated vectors")
    common.add_argument("--enum-reduce", action="store_true", help="Lagrange-reduce rank-2 lattices before enumerating")
    common.add_argument("--include-zero", action="store_true", help="list the zero vector")
    common.add_argument("--check-group-closure", action="store_true",
                        help="verify the supplied matrices generate a group of order <= group_order")
    common.add_argument("--mx", type=float, default=None, help="M(X) value overriding the datum")

    parser = _Parser(prog="nthbound", description="Height bounds from Mordell-Weil lattice data.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


def _tolerances(args) -> Tolerances:
    return Tolerances(
        pd_tol=args.tol_pd, sym_tol=args.tol_sym, iso_tol=args.tol_iso,
        bravais_tol=args.tol_bravais, boundary_tol=BOUNDARY_TOL, budget=args.budget,
        restarts=args.restarts, seed=args.seed, enum_cap=args.enum_cap,
        check_group_closure=args.check_group_closure,
    )


def _load(args):
    datum = parse_datum(args.input)
    if args.mx is not None:
        if not args.mx > 0:
            raise NthboundError(f"--mx must be positive, got {args.mx}")
        datum = dataclasses.replace(datum, mx_value=args.mx, mx_components=None)
    return datum


def _lattice_and_actions(datum, tol):
    lat = validate_lattice(datum.gram, tol.pd_tol, tol.sym_tol)
    actions = [
        check_isometry(lat, a.matrix, tol.iso_tol, name=a.name, group_identity=a.identity)
        for a in datum.automorphisms
    ]
    return lat, actions


def _enumeration(lat, bound, args):
    s = short_vectors(lat, bound, include_zero=args.include_zero, cap=args.enum_cap, reduce=args.enum_reduce)
    return {
        "bound": s.bound,
        "count_up_to_sign": s.count_up_to_sign,
        "count_total": s.count_total,
        "vectors": [{"coords": list(c), "height": h} for c, h in s.vectors],
    }


def _report_body(report):
    body = {
        "label": report.label,
        "genus": report.genus,
        "rank": report.rank,
        "mx": report.mx,
        "criterion": report.criterion,
        "beta_or_alpha": report.beta_or_alpha,
        "bound_factor": report.bound_factor,
        "bound": report.bound,
        "candidates": report.candidates,
        "kernel": report.kernel,
        "alpha": {"value": report.alpha, "label": report.alpha_label},
        "averaged": {
            "beta_star": report.beta_star,
            "mu_star": report.mu_star,
            "iterations": report.optimizer_iterations,
        },
        "spectra": report.spectra,
        "isometry_residuals": report.isometry_residuals,
        "gram_asymmetry": report.gram_asymmetry,
        "notes": report.notes,
    }
    if report.bravais is not None:
        body["bravais"] = {
            "kind": report.bravais.kind,
            "order": report.bravais.order,
            "cosine": report.bravais.cosine,
            "margins": report.bravais.margins,
        }
        body["reduction"] = {"transform": report.reduction, "reduced_gram": report.reduced_gram}
    return body


def execute(args):
    """Run one command; returns ``(body, exit_code)``."""
    tol = _tolerances(args)
    datum = _load(args)
    cmd = args.command

    if cmd == "validate":
        lat, actions = _lattice_and_actions(datum, tol)
        body = {
            "label": datum.label,
            "genus": datum.genus,
            "rank": datum.rank,
            "group_order": datum.group_order,
            "torsion_order": datum.torsion_order,
            "cholesky_pivots": np.diag(lat.chol),
            "gram_asymmetry": lat.asymmetry,
            "automorphisms": {
                a.name: {"is_identity": a.is_identity, "group_identity": a.group_identity, "residual": a.residual}
                for a in actions
            },
            "mx": datum.mx,
        }
        return body, EXIT_OK

    if cmd == "classify":
        lat, _ = _lattice_and_actions(datum, tol)
        reduced, u = lagrange_reduce(lat)
        b = classify(reduced.gram, tol.bravais_tol)
        body = {
            "label": datum.label,
            "reduction": {"transform": u, "reduced_gram": reduced.gram},
            "bravais": {"kind": b.kind, "order": b.order, "cosine": b.cosine, "margins": b.margins},
            "notes": list(b.notes),
        }
        return body, EXIT_OK

    if cmd == "spectra":
        lat, actions = _lattice_and_actions(datum, tol)
        ops = {}
        for a in actions:
            s = symmetrize(lat, a)
            ops[a.name] = {
                "spectrum": s.spectrum,
                "lambda_min": s.lambda_min,
                "is_identity": a.is_identity,
                "group_identity": a.group_identity,
                "involution_residual": s.involution_residual,
            }
        alpha, label = alpha_h(lat, actions)
        return {"label": datum.label, "operators": ops, "alpha": {"value": alpha, "label": label}}, EXIT_OK

    if cmd == "optimize":
        lat, actions = _lattice_and_actions(datum, tol)
        res = optimize_mu(lat, actions, tol.budget, restarts=tol.restarts, seed=tol.seed)
        body = {
            "label": datum.label,
            "beta_star": res.beta_star,
            "mu_star": res.mu_star.weights,
            "iterations": res.iterations,
            "dirac_best": {"value": res.dirac_best, "label": res.dirac_label},
            "threshold": 1.0 / datum.genus,
        }
        return body, EXIT_OK

    report = best_bound(datum, tol)
    body = _report_body(report)
    code = EXIT_NONE if report.criterion == NONE else EXIT_OK

    if cmd == "bound":
        return body, code

    bound = args.enum_bound if args.enum_bound is not None else report.bound
    if cmd == "enumerate":
        if bound is None:
            return {"label": datum.label, "enumeration": None, "notes": ["no height bound available to enumerate below"]}, EXIT_NONE
        lat = validate_lattice(datum.gram, tol.pd_tol, tol.sym_tol)
        return {"label": datum.label, "enumeration": _enumeration(lat, bound, args)}, EXIT_OK

    # report
    if bound is not None:
        lat = validate_lattice(datum.gram, tol.pd_tol, tol.sym_tol)
        body["enumeration"] = _enumeration(lat, bound, args)
    else:
        body["enumeration"] = None
        body["notes"].append("enumeration skipped: no numeric height bound (supply M(X) or --enum-bound)")
    return body, code


def _tolerance_echo(args):
    return {
        "pd": args.tol_pd, "sym": args.tol_sym, "iso": args.tol_iso, "bravais": args.tol_bravais,
        "enum_boundary": BOUNDARY_TOL, "budget": args.budget, "restarts": args.restarts,
        "seed": args.seed, "enum_cap": args.enum_cap,
    }


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        body, code = execute(args)
        doc = envelope(args.command, body)
    except (NthboundError, OSError, ValueError) as exc:
        doc = envelope(args.command, None, error=exc)
        code = EXIT_ERROR
    doc["tolerances"] = _tolerance_echo(args)
    text = to_json(doc) if args.format == "json" else to_text(doc)

    if args.output:
        out = Path(args.output)
        out.write_text(text, encoding="utf-8")
        meta = {
            "version": __version__,
            "argv": list(sys.argv[1:] if argv is None else argv),
            "created": datetime.now(timezone.utc).isoformat(),
            "python": platform.python_version(),
            "numpy": np.__version__,
            "exit_code": code,
        }
        out.with_name(out.name + ".meta.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
