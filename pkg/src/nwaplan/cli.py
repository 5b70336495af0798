"""Command-line entry point.

Commands: plan (solve the planning problem), capex (expansion timing for a
peak forecast), assess (Monte Carlo evaluation of a saved plan), sweep
(plan + assess over a protection-level grid, pick the cost-minimizing one).

Exit codes: 0 success, 2 infeasible model, 1 any other error. JSON outputs
serialize floats at 9 significant digits so reruns are byte-stable.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys

import numpy as np

from nwaplan.assess import gamma_sweep, monte_carlo
from nwaplan.capex import capex_year, min_present_cost, present_cost
from nwaplan.config import load_config
from nwaplan.lp import LpModelError, SolverFailure
from nwaplan.plan import Plan, solve_dwda, solve_sequential, write_iteration_log
from nwaplan.scenario import ScenarioError
from nwaplan.timegrid import ConfigError

log = logging.getLogger("nwaplan")


class Infeasible(RuntimeError):
    pass


def _round_floats(obj):
    if isinstance(obj, float):
        return float(f"{obj:.9g}")
    if isinstance(obj, dict):
        return {k: _round_floats(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round_floats(v) for v in obj]
    return obj


def dump_json(obj, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(_round_floats(obj), fh, indent=2, sort_keys=True)
        fh.write("\n")


def _fmt(x):
    return f"{float(f'{x:.9g}'):.9g}"


def cmd_plan(args) -> int:
    cfg = load_config(args.config)
    problem = cfg.problem
    log.info(
        "planning %d years x %d periods, %d technologies, gamma=%g, technique=%s",
        problem.grid.n_years, problem.grid.n_periods, len(problem.blocks),
        problem.robust_gamma, args.technique,
    )
    iteration_log: list = []
    if args.technique == "dwda":
        plan = solve_dwda(
            problem, max_iters=args.max_iters, tol_gap=args.tol_gap, iteration_log=iteration_log
        )
    else:
        plan = solve_sequential(problem, iteration_log=iteration_log)
    dump_json(plan.to_json_dict(), args.out)
    log_path = args.iter_log or f"{args.out}.iterations.jsonl"
    with open(log_path, "w", encoding="utf-8") as fh:
        write_iteration_log(_round_floats(iteration_log), fh)
    print(
        f"technique={plan.technique} gamma={plan.gamma:g} delta={plan.delta} "
        f"objective={_fmt(plan.objective)} (iterations={plan.iterations}, {plan.wall_time:.2f}s)"
    )
    print(f"plan written to {args.out}, iteration log to {log_path}")
    return 0


def cmd_capex(args) -> int:
    cfg = load_config(args.config)
    capex = cfg.problem.capex
    years, peaks = [], []
    with open(args.peaks, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip().lower() for h in header][:2] != ["year", "value"]:
            raise ConfigError(f"{args.peaks}: expected header 'year,value'")
        for lineno, rec in enumerate(reader, start=2):
            if not rec:
                continue
            try:
                years.append(int(rec[0]))
                peaks.append(float(rec[1]))
            except (ValueError, IndexError) as exc:
                raise ConfigError(f"{args.peaks}:{lineno}: {exc}") from None
    if years != list(range(1, len(years) + 1)):
        raise ConfigError(f"{args.peaks}: years must run 1..{len(years)} in order")
    peaks = np.asarray(peaks)
    n = len(peaks)
    delta = capex_year(peaks, capex.limit, n)
    cost = present_cost(capex, delta, n)
    delta_opt, cost_opt = min_present_cost(peaks, capex)
    agree = delta == delta_opt and abs(cost - cost_opt) < 1e-9 * (1 + abs(cost))
    print(f"expansion year delta = {delta} (limit {capex.limit:g} MW, horizon {n} years)")
    print(f"present cost = {_fmt(cost)} $ (cost {capex.cost:g} $ at rate {capex.discount.rho:g})")
    print(f"optimization cross-check: delta = {delta_opt}, cost = {_fmt(cost_opt)} $ -> "
          f"{'agrees' if agree else 'MISMATCH'}")
    return 0 if agree else 1


def cmd_assess(args) -> int:
    cfg = load_config(args.config)
    with open(args.plan, encoding="utf-8") as fh:
        plan = Plan.from_json_dict(json.load(fh))
    problem = cfg.problem.with_gamma(plan.gamma)
    n = args.n_draws or cfg.assess.n_draws
    voll = cfg.assess.voll if args.voll is None else args.voll
    seed = cfg.assess.seed if args.seed is None else args.seed
    log.info("assessing plan (delta=%d, gamma=%g) with %d draws", plan.delta, plan.gamma, n)
    assessment = monte_carlo(problem, plan, cfg.sets, n, voll, seed, workers=args.threads)
    dump_json(assessment.to_json_dict(), args.out_json)
    with open(args.out_csv, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["draw", "op_cost", "demand_charge", "shed_energy_mwh", "shed_fraction_pct", "total_cost"])
        for r in assessment.records:
            w.writerow([r.draw, _fmt(r.op_cost), _fmt(r.demand_charge), _fmt(r.shed_energy_mwh),
                        _fmt(r.shed_fraction_pct), _fmt(r.total_cost)])
    agg = assessment.aggregates
    print(f"n={n} voll={voll:g} seed={seed}")
    print(f"expected total cost = {_fmt(agg['total_cost']['mean'])} $ "
          f"(std {_fmt(agg['total_cost']['stddev'])})")
    print(f"mean shed = {_fmt(agg['shed']['mean_energy_mwh'])} MWh "
          f"({_fmt(agg['shed']['mean_fraction_pct'])} % of load), "
          f"P(any shed) = {agg['shed']['prob_any_shed']:.3f}")
    print(f"written {args.out_json}, {args.out_csv}")
    return 0


def cmd_sweep(args) -> int:
    cfg = load_config(args.config)
    gammas = [float(tok) for tok in args.gammas.split(",") if tok.strip() != ""]
    if not gammas:
        raise ConfigError("--gammas: need at least one value")
    if any(g < 0 or g > 1 for g in gammas):
        raise ConfigError("--gammas: values must lie in [0, 1]")
    n = args.n_draws or cfg.assess.n_draws
    voll = cfg.assess.voll if args.voll is None else args.voll
    seed = cfg.assess.seed if args.seed is None else args.seed
    solver = (lambda p: solve_dwda(p)) if args.technique == "dwda" else None
    result = gamma_sweep(cfg.problem, gammas, cfg.sets, n, voll, seed, solver=solver,
                         workers=args.threads)

    cap_cols = sorted({name for pt in result.points for name in pt.plan.invest})
    with open(args.out, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(
            ["gamma", "plan_objective", "delta", "expected_total_cost",
             "mean_shed_fraction_pct", "mean_shed_mwh", "prob_any_shed"]
            + [f"invest_{name}" for name in cap_cols]
        )
        for pt in result.points:
            agg = pt.assessment.aggregates
            caps = [
                _fmt(sum(pt.plan.invest[name]["values"])) if name in pt.plan.invest else ""
                for name in cap_cols
            ]
            w.writerow(
                [pt.gamma, _fmt(pt.plan.objective), pt.plan.delta,
                 _fmt(pt.expected_total_cost), _fmt(agg["shed"]["mean_fraction_pct"]),
                 _fmt(agg["shed"]["mean_energy_mwh"]), _fmt(agg["shed"]["prob_any_shed"])]
                + caps
            )
    print(f"gamma* = {result.gamma_star:g} at voll {voll:g} $/MWh (curve in {args.out})")

    if args.volls:
        volls = [float(tok) for tok in args.volls.split(",") if tok.strip() != ""]
        out = args.gamma_star_out or f"{args.out}.gamma_star.csv"
        with open(out, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["voll", "gamma_star", "expected_total_cost"])
            for v in volls:
                gs = result.gamma_star_at_voll(v)
                cost = min(result.expected_total_at_voll(v))
                w.writerow([v, gs, _fmt(cost)])
        print(f"gamma*(voll) curve in {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="nwaplan", description=__doc__,
                                 formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--log-level", default="warning",
                    choices=["debug", "info", "warning", "error"])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("plan", help="solve the planning problem")
    p.add_argument("--config", required=True)
    p.add_argument("--technique", choices=["sequential", "dwda"], default="sequential")
    p.add_argument("--out", required=True)
    p.add_argument("--iter-log", default=None)
    p.add_argument("--max-iters", type=int, default=200)
    p.add_argument("--tol-gap", type=float, default=1e-6)
    p.add_argument("--threads", type=int, default=1)
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("capex", help="expansion timing for a peak forecast")
    p.add_argument("--config", required=True)
    p.add_argument("--peaks", required=True, help="CSV with header year,value")
    p.set_defaults(func=cmd_capex)

    p = sub.add_parser("assess", help="Monte Carlo evaluation of a saved plan")
    p.add_argument("--config", required=True)
    p.add_argument("--plan", required=True)
    p.add_argument("--out-json", default="assessment.json")
    p.add_argument("--out-csv", default="assessment.csv")
    p.add_argument("--n-draws", type=int, default=None)
    p.add_argument("--voll", type=float, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--threads", type=int, default=1)
    p.set_defaults(func=cmd_assess)

    p = sub.add_parser("sweep", help="plan + assess over a protection-level grid")
    p.add_argument("--config", required=True)
    p.add_argument("--gammas", default="0,0.25,0.5,0.75,1")
    p.add_argument("--out", required=True)
    p.add_argument("--technique", choices=["sequential", "dwda"], default="sequential")
    p.add_argument("--n-draws", type=int, default=None)
    p.add_argument("--voll", type=float, default=None)
    p.add_argument("--volls", default=None,
                   help="comma list; also write the gamma*(voll) curve")
    p.add_argument("--gamma-star-out", default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--threads", type=int, default=1)
    p.set_defaults(func=cmd_sweep)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=args.log_level.upper(), format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except Infeasible as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return 2
    except (ConfigError, ScenarioError, LpModelError, SolverFailure, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
