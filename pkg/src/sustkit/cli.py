"""Command-line front end.

Every library operation is reachable from one executable with
machine-readable output:

    sustkit verify-solutions [--k 2,3,4,5]
    sustkit rs sum|integrate|variation|bound --f EXPR --omega EXPR ...
    sustkit solve --spec scenario.json
    sustkit figures --which fig4|fig5
    sustkit index eval|seven|fit ...
    sustkit pavement table|reduction ...

Functions for the ``rs`` verbs are expressions in x (see
:mod:`sustkit.expressions`) or ``table:FILE.csv`` sample tables.  All
subcommands are deterministic given their inputs and seeds.  The default
output directory is "." or $SUSTKIT_OUTPUT_DIR.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import diffusion, index, pavement, polynomials
from . import riemann_stieltjes as rs
from .expressions import ExpressionError, compile_expression

OUTPUT_DIR_ENV = "SUSTKIT_OUTPUT_DIR"


def _fmt(x: float, precision: str) -> str:
    return repr(float(x)) if precision == "full" else f"{float(x):.6g}"


def _function_arg(text: str):
    """An expression in x, or table:FILE for a CSV-sampled function."""
    if text.startswith("table:"):
        return rs.WeightFunction.from_csv(text[len("table:"):])
    return compile_expression(text)


def _float_list(text: str) -> list[float]:
    return [float(v) for v in text.replace(",", " ").split()]


def _int_list(text: str) -> list[int]:
    return [int(v) for v in text.replace(",", " ").split()]


def _default_outdir() -> str:
    return os.environ.get(OUTPUT_DIR_ENV, ".")


# -- subcommand handlers -------------------------------------------------------


def _cmd_verify_solutions(args) -> int:
    checks = polynomials.verify_solution_families(
        k_values=args.k, draws=args.draws, seed=args.seed
    )
    if args.format == "json":
        payload = [
            {
                "variant": c.variant,
                "k": c.k,
                "model": c.model,
                "max_residual_coeff": c.max_residual_coeff,
                "ok": c.ok,
                "note": c.note,
            }
            for c in checks
        ]
        print(json.dumps(payload, indent=2, sort_keys=True))
    else:
        for c in checks:
            status = "PASS" if c.ok else "FAIL"
            note = f"  [{c.note}]" if c.note else ""
            print(
                f"{status}  {c.variant:<18s} k={c.k}  {c.model:<11s} "
                f"max residual coeff {c.max_residual_coeff:.3e}{note}"
            )
    return 0 if all(c.ok for c in checks) else 1


def _cmd_rs(args) -> int:
    f = _function_arg(args.f)
    omega = _function_arg(args.omega)
    if args.verb == "sum":
        if args.n is None:
            raise ValueError("rs sum needs --n (number of subintervals)")
        p = rs.make_uniform_partition(args.lo, args.hi, args.n, args.tag_rule)
        print(_fmt(rs.rs_sum(f, omega, p), args.precision))
    elif args.verb == "integrate":
        value = rs.rs_integrate(
            f, omega, args.lo, args.hi, eta=args.eta, max_refinements=args.max_refinements
        )
        print(_fmt(value, args.precision))
    elif args.verb == "variation":
        if args.n is not None:
            p = rs.make_uniform_partition(args.lo, args.hi, args.n, args.tag_rule)
            value = rs.total_variation(omega, p)
        else:
            value = rs.variation_sup(omega, args.lo, args.hi, args.max_refinements)
        print(_fmt(value, args.precision))
    else:  # bound
        report = rs.variation_lower_bound_check(
            f, omega, args.lo, args.hi, eta=args.eta, max_refinements=args.max_refinements
        )
        payload = {
            "lhs": report.lhs,
            "rhs": report.rhs,
            "holds": report.holds,
            "sup_f": report.sup_f,
            "integral": report.integral,
            "sup_f_zero": report.sup_f_zero,
            "omega_nondecreasing": report.omega_nondecreasing,
        }
        if args.format == "json":
            print(json.dumps(payload, sort_keys=True))
        else:
            print(
                f"lhs={_fmt(report.lhs, args.precision)} "
                f"rhs={_fmt(report.rhs, args.precision)} "
                f"holds={report.holds}"
            )
        return 0 if report.holds else 1
    return 0


def _cmd_solve(args) -> int:
    spec = diffusion.scenario_from_json(args.spec)
    if args.dt is not None:
        spec.dt = args.dt
    times = args.snapshots if args.snapshots is not None else [spec.t_end]
    fields = diffusion.run_scenario(spec, times)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    stem = Path(args.spec).stem
    manifest = {
        "spec": str(args.spec),
        "dt": spec.resolved_dt(),
        "snapshot_note": "snapshots snap to the nearest completed step; dt is not adjusted",
        "files": [],
    }
    for requested, fld in zip(times, fields):
        name = f"{stem}_t{requested:g}.{args.format}"
        if args.format == "csv":
            diffusion.field_to_csv(fld, out / name)
        else:
            diffusion.field_to_json(fld, out / name)
        manifest["files"].append(
            {"file": name, "time_requested": requested, "time_actual": fld.time}
        )
    with open(out / f"{stem}_manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"wrote {len(manifest['files'])} snapshot(s) to {out}")
    return 0


def _cmd_figures(args) -> int:
    manifest = pavement.run_demo_figures(
        args.which,
        args.out,
        resolution=args.resolution,
        s=args.s,
        t_end=args.t_end,
        snapshot_times=args.snapshots,
        normalized=args.normalized,
    )
    n_files = sum(len(p["files"]) for p in manifest["panels"])
    print(f"wrote {n_files} grid(s) and {args.which}_manifest.json to {args.out}")
    return 0


def _make_inputs(args, need_k: int | None = None) -> index.IndexInputs:
    psi = _float_list(args.psi)
    weights = _float_list(args.weights) if args.weights else [1.0] * len(psi)
    k = need_k if need_k is not None else (args.k if args.k else len(psi))
    return index.IndexInputs(
        k=k,
        t=args.t,
        psi=tuple(psi),
        weights=tuple(weights),
        alpha=args.alpha,
        beta=args.beta,
    )


def _cmd_index(args) -> int:
    if args.verb == "eval":
        value = index.index_value(_make_inputs(args), args.family)
        print(_fmt(value, args.precision))
    elif args.verb == "seven":
        value = index.index_seven_ab(_make_inputs(args, need_k=7))
        print(_fmt(value, args.precision))
    else:  # fit
        obs = index.read_observations(args.observations)
        result = index.fit_alpha_beta(obs)
        if args.out:
            index.write_fit_report(result, args.out)
        payload = result.to_json_dict()
        if args.format == "json":
            print(json.dumps(payload, sort_keys=True))
        else:
            print(
                f"alpha={_fmt(result.alpha, args.precision)} "
                f"beta={_fmt(result.beta, args.precision)} "
                f"residual_norm={_fmt(result.residual_norm, args.precision)} "
                f"n_obs={result.n_obs}"
            )
    return 0


def _cmd_pavement(args) -> int:
    designs = pavement.load_mix_table(args.table)
    if args.verb == "table":
        if args.format == "json":
            payload = [
                {
                    "label": d.label,
                    "ac_mm": d.ac_mm,
                    "drainage_mm": d.drainage_mm,
                    "subbase_mm": d.subbase_mm,
                    "base_mm": d.base_mm,
                    "total_mm": d.total_mm,
                    "base_mr_mpa": d.base_mr_mpa,
                    "reference": d.reference,
                }
                for d in designs
            ]
            print(json.dumps(payload, indent=2, sort_keys=True))
        else:
            print(",".join(pavement.MIX_CSV_COLUMNS))
            for d in designs:
                drainage = "" if d.drainage_mm is None else f"{d.drainage_mm:g}"
                print(
                    f"{d.label},{d.ac_mm:g},{drainage},{d.subbase_mm:g},"
                    f"{d.base_mm:g},{d.total_mm:g},{d.base_mr_mpa:g},{d.reference}"
                )
    else:  # reduction
        baseline = pavement.find_mix(designs, args.baseline)
        if args.mix:
            mix = pavement.find_mix(designs, args.mix)
            print(_fmt(pavement.thickness_reduction(mix, baseline), args.precision))
        else:
            for label, pct in pavement.reduction_table(designs, args.baseline):
                print(f"{label},{_fmt(pct, args.precision)}")
    return 0


# -- parser --------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sustkit",
        description="Sustainability-index toolkit: closed-form PDE index "
        "families, Riemann-Stieltjes weights, an explicit diffusion solver "
        "and the recycled-pavement case study.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify-solutions", help="check every index family against its model")
    p.add_argument("--k", type=_int_list, default=[2, 3, 4, 5], metavar="LIST")
    p.add_argument("--draws", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.set_defaults(handler=_cmd_verify_solutions)

    p = sub.add_parser("rs", help="Riemann-Stieltjes sums, integrals and variation")
    p.add_argument("verb", choices=("sum", "integrate", "variation", "bound"))
    p.add_argument("--f", default="1", help="integrand expression or table:FILE")
    p.add_argument("--omega", required=True, help="weight expression or table:FILE")
    p.add_argument("--lo", type=float, required=True)
    p.add_argument("--hi", type=float, required=True)
    p.add_argument("--n", type=int, default=None, help="subintervals (sum/variation)")
    p.add_argument("--tag-rule", choices=rs.TAG_RULES, default="midpoint")
    p.add_argument("--eta", type=float, default=1e-6)
    p.add_argument("--max-refinements", type=int, default=rs.MAX_REFINEMENTS)
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--precision", choices=("default", "full"), default="default")
    p.set_defaults(handler=_cmd_rs)

    p = sub.add_parser("solve", help="run a scenario from a JSON spec and export grids")
    p.add_argument("--spec", required=True)
    p.add_argument("--snapshots", type=_float_list, default=None, metavar="LIST")
    p.add_argument("--dt", type=float, default=None,
                   help="override the spec's time step (must satisfy the stability bound)")
    p.add_argument("--out", default=_default_outdir())
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.set_defaults(handler=_cmd_solve)

    p = sub.add_parser("figures", help="run the four panels of a demonstration figure")
    p.add_argument("--which", choices=("fig4", "fig5"), required=True)
    p.add_argument("--out", default=_default_outdir())
    p.add_argument("--resolution", type=int, default=pavement.DEFAULT_RESOLUTION,
                   help="points on the longest axis")
    p.add_argument("--s", type=float, default=pavement.DEFAULT_S)
    p.add_argument("--t-end", type=float, default=pavement.DEFAULT_T_END)
    p.add_argument("--snapshots", type=_float_list, default=None, metavar="LIST")
    p.add_argument("--normalized", action="store_true",
                   help="also export grids divided by s*t")
    p.set_defaults(handler=_cmd_figures)

    p = sub.add_parser("index", help="evaluate or fit the weighted index")
    p.add_argument("verb", choices=("eval", "seven", "fit"))
    p.add_argument("--family", default="C1w", choices=polynomials.FAMILY_VARIANTS)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--t", type=float, default=0.0)
    p.add_argument("--psi", default="", help="comma-separated factor values")
    p.add_argument("--weights", default="", help="comma-separated weights (default all 1)")
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--beta", type=float, default=None)
    p.add_argument("--observations",
                   help="CSV (t, psi1.., omega1.., H_obs) or JSON observations (fit)")
    p.add_argument("--out", default=None, help="write the fit report JSON here")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--precision", choices=("default", "full"), default="default")
    p.set_defaults(handler=_cmd_index)

    p = sub.add_parser("pavement", help="mix-design table and thickness reductions")
    p.add_argument("verb", choices=("table", "reduction"))
    p.add_argument("--table", default=None, help="mix-design CSV (default: embedded table)")
    p.add_argument("--mix", default=None, help="mix label for a single reduction")
    p.add_argument("--baseline", default=pavement.BASELINE_LABEL)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--precision", choices=("default", "full"), default="default")
    p.set_defaults(handler=_cmd_pavement)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except (
        ValueError,
        KeyError,
        OSError,
        ExpressionError,
        rs.NonConvergenceError,
        diffusion.NonFiniteFieldError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
