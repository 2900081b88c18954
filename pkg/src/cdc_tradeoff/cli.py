"""Command-line front end.

    cdc-tradeoff simulate -K 4 -Q 4 -N 12 -r 2 -T 8
    cdc-tradeoff curve fig3 -K 10 -Q 10 -N 2520 -r 5
    cdc-tradeoff bound -K 10 -Q 10 -N 2520 -r 5 --budget 40000
    cdc-tradeoff scdc-plan -K 10 -Q 10 -N 2520 -r 5 --budget 40000 --out plan.json
    cdc-tradeoff simulate -K 10 -Q 10 -N 2520 -r 5 --plan plan.json

Exit codes: 0 ok, 2 config error, 3 infeasible budget, 4 verification failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from fractions import Fraction

from . import analysis, lp
from .core import ClusterConfig, ConfigError, decimal, format_rational, validate_config
from .placement import place_files
from .simulator import (
    PlanSizeError,
    SimulationError,
    VerificationFailure,
    cdc_shuffle,
    measure_loads,
    reduce_verify,
    scdc_shuffle,
    write_log,
)

EXIT_OK, EXIT_CONFIG, EXIT_INFEASIBLE, EXIT_VERIFY = 0, 2, 3, 4


def _rat(x: Fraction | None) -> str:
    return "" if x is None else format_rational(x)


def _dec(x: Fraction | None) -> str:
    return "" if x is None else decimal(x)


def _config(args) -> ClusterConfig:
    if args.r is None:
        raise ConfigError(["-r is required for this command"])
    return validate_config(ClusterConfig(args.K, args.Q, args.N, args.r, args.T))


def _emit(args, text: str) -> None:
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _csv(header: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def _json(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def read_plan(path: str, cfg: ClusterConfig) -> dict[int, int]:
    """Integer split plan from a ``scdc-plan`` document (or a bare weights list)."""
    with open(path) as fh:
        doc = json.load(fh)
    if isinstance(doc, dict):
        stored = doc.get("config")
        if stored:
            mine = cfg.as_dict()
            clash = [k for k in ("K", "Q", "N", "r") if stored.get(k) != mine[k]]
            if clash:
                raise ConfigError([f"plan was made for {k}={stored[k]}, not {mine[k]}" for k in clash])
        weights = doc.get("rounded", doc).get("weights")
    else:
        weights = doc
    return {int(w["ell"]): int(w["z"]) for w in weights}


def cmd_simulate(args) -> int:
    cfg = _config(args)
    placement = place_files(cfg)
    if args.plan:
        result = scdc_shuffle(placement, read_plan(args.plan, cfg), seed=args.seed)
    else:
        result = cdc_shuffle(placement, seed=args.seed)
    if args.log:
        with open(args.log, "w") as fh:
            write_log(result.log, fh, payloads=args.payloads)
    report = measure_loads(result.log, result.plan, cfg, placement)
    try:
        verification = reduce_verify(result, placement, args.seed)
        verified, failures = True, []
    except VerificationFailure as exc:
        verified, failures = False, exc.failures

    summary = report.to_dict()
    summary.update(config=cfg.as_dict(), seed=args.seed, verified=verified,
                   failures=[[k, iv.q, iv.n, kind] for k, iv, kind in failures])
    if verified:
        summary["values_checked"] = verification.values_checked
    if args.format == "json":
        _emit(args, _json(summary))
    elif args.format == "csv":
        header = ["K", "Q", "N", "r", "T", "seed", "communication_load",
                  "communication_load_decimal", "computation_count", "shuffle_computations",
                  "total_bits", "transmissions", "verified"]
        row = [cfg.K, cfg.Q, cfg.N, cfg.r, cfg.T, args.seed, summary["communication_load"],
               summary["communication_load_decimal"], report.computation_count,
               report.shuffle_computations, report.total_bits, report.transmissions, verified]
        _emit(args, _csv(header, [row]))
    else:
        lines = [
            f"config: K={cfg.K} Q={cfg.Q} N={cfg.N} r={cfg.r} T={cfg.T} seed={args.seed}",
            f"communication load L = {summary['communication_load']} "
            f"({summary['communication_load_decimal']})",
            f"computation load C = {report.computation_count} "
            f"(local {report.local_computations}, shuffle {report.shuffle_computations})",
            f"transmissions = {report.transmissions}, bits = {report.total_bits}",
            "reduce: verified" if verified else f"reduce: FAILED ({len(failures)} values)",
        ]
        _emit(args, "\n".join(lines) + "\n")
    if not verified:
        print(str(VerificationFailure(failures)), file=sys.stderr)
        return EXIT_VERIFY
    return EXIT_OK


def _budgets(args, cfg: ClusterConfig) -> list[Fraction]:
    if args.budget is not None:
        return [Fraction(args.budget)]
    return analysis.budget_grid(cfg, args.steps, args.budget_min, args.budget_max)


def cmd_curve(args) -> int:
    if args.figure in ("fig1", "fig2"):
        base = ClusterConfig(args.K, args.Q, args.N, args.r or 1, args.T)
        if args.figure == "fig1":
            rows = analysis.figure1_series(base)
            if args.format == "json":
                _emit(args, _json(rows))
            else:
                _emit(args, _csv(["r", "comp_min", "comp_naive"],
                                 [[d["r"], d["comp_min"], d["comp_naive"]] for d in rows]))
            return EXIT_OK
        points = analysis.figure2_series(base)
        if args.format == "json":
            _emit(args, _json([
                {"comp": p.computation, "comm": format_rational(p.communication),
                 "comm_decimal": decimal(p.communication), "scheme": p.scheme, "r": p.r}
                for p in points]))
        else:
            _emit(args, _csv(["comp", "comm", "comm_decimal", "scheme", "r"], [
                [p.computation, format_rational(p.communication), decimal(p.communication),
                 p.scheme, p.r] for p in points]))
        return EXIT_OK

    cfg = _config(args)
    if args.steps < 1:
        raise ConfigError(["--steps must be positive"])
    rows = analysis.figure3_series(cfg, _budgets(args, cfg))
    header = ["budget", "budget_decimal", "status", "r_star", "cdc_fit", "cdc_fit_decimal",
              "scdc", "scdc_decimal", "scdc_rounded", "scdc_rounded_decimal",
              "rounded_within_budget", "bound", "bound_decimal"]
    table = []
    for row in rows:
        table.append([
            format_rational(row.budget), decimal(row.budget),
            "ok" if row.feasible else "infeasible",
            "" if row.r_star is None else row.r_star,
            _rat(row.cdc_fit), _dec(row.cdc_fit), _rat(row.scdc), _dec(row.scdc),
            _rat(row.scdc_rounded), _dec(row.scdc_rounded),
            "" if row.scdc_rounded_within_budget is None else row.scdc_rounded_within_budget,
            _rat(row.bound), _dec(row.bound),
        ])
    if args.format == "json":
        _emit(args, _json([dict(zip(header, r)) for r in table]))
    else:
        _emit(args, _csv(header, table))
    return EXIT_OK


def _single_budget(args) -> Fraction:
    if args.budget is None:
        raise ConfigError(["--budget is required"])
    return Fraction(args.budget)


def cmd_bound(args) -> int:
    cfg = _config(args)
    sol = lp.lower_bound(cfg, _single_budget(args))
    doc = sol.to_dict()
    doc["objective_decimal"] = decimal(sol.objective)
    doc["config"] = cfg.as_dict()
    _emit(args, _json(doc))
    return EXIT_OK


def cmd_scdc_plan(args) -> int:
    cfg = _config(args)
    sol = lp.scdc_optimize(cfg, _single_budget(args))
    rounded = lp.round_plan(sol, cfg)
    doc = {
        "config": cfg.as_dict(),
        "budget": format_rational(sol.budget),
        "lp": sol.to_dict(),
        "lp_objective_decimal": decimal(sol.objective),
        "rounded": rounded.to_dict(),
        "rounded_objective_decimal": decimal(rounded.objective),
    }
    _emit(args, _json(doc))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-K", type=int, required=True, help="number of servers")
    common.add_argument("-Q", type=int, required=True, help="number of output functions")
    common.add_argument("-N", type=int, required=True, help="number of files")
    common.add_argument("-r", type=int, default=None, help="load redundancy")
    common.add_argument("-T", type=int, default=None,
                        help="intermediate value size in bits (default lcm(8, 1..r))")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", default=None, help="write output here instead of stdout")

    budgets = argparse.ArgumentParser(add_help=False)
    budgets.add_argument("--budget", type=Fraction, default=None)
    budgets.add_argument("--budget-min", type=Fraction, default=None)
    budgets.add_argument("--budget-max", type=Fraction, default=None)
    budgets.add_argument("--steps", type=int, default=60)

    parser = argparse.ArgumentParser(prog="cdc-tradeoff", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", parents=[common], help="bit-exact CDC / split-CDC run")
    sim.add_argument("--plan", default=None, help="integer split plan from scdc-plan")
    sim.add_argument("--log", default=None, help="write the transmission log (JSON lines)")
    sim.add_argument("--payloads", action="store_true", help="include payload bits in the log")
    sim.add_argument("--format", choices=["csv", "json"], default=None)
    sim.set_defaults(func=cmd_simulate)

    curve = sub.add_parser("curve", parents=[common, budgets], help="figure data")
    curve.add_argument("figure", choices=["fig1", "fig2", "fig3"])
    curve.add_argument("--format", choices=["csv", "json"], default="csv")
    curve.set_defaults(func=cmd_curve)

    bound = sub.add_parser("bound", parents=[common, budgets], help="lower-bound LP")
    bound.add_argument("--format", choices=["json"], default="json")
    bound.set_defaults(func=cmd_bound)

    plan = sub.add_parser("scdc-plan", parents=[common, budgets], help="split-CDC LP and rounding")
    plan.add_argument("--format", choices=["json"], default="json")
    plan.set_defaults(func=cmd_scdc_plan)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except PlanSizeError as exc:
        print(f"PlanSizeError: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except lp.Infeasible as exc:
        print(f"BudgetInfeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except SimulationError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_VERIFY


if __name__ == "__main__":
    sys.exit(main())
