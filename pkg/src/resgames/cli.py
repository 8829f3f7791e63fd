"""Command line interface.

Exit codes: 0 success, 2 validation/usage error, 3 budget or enumeration cap.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import io
from .analytics import (
    frontier_setcov,
    one_round_bound,
    one_round_setcov,
    poa_closed_form,
    solve_poa_lp,
    theory_bounds,
)
from .constructions import (
    ScalingError,
    build_common_interest_chain,
    build_greedy_trap,
    build_poa_witness,
    build_stack_or_spread,
    build_two_agent_worst_case,
)
from .designs import DesignSpec, resolve_design
from .dynamics import (
    AdversarialEnumerate,
    BudgetExceededError,
    EnumerationCapError,
    k_round_walk,
    reachable_nash_min,
    walk_to_nash,
)
from .experiments import ExperimentConfig, export_result, run_experiment
from .model import UtilityRule, ValidationError, make_welfare_rule, welfare


def _welfare_from_args(args, j_max):
    fam = args.welfare
    if fam in ("setcov", "set_covering"):
        return make_welfare_rule("set_covering", j_max)
    if fam == "bent":
        return make_welfare_rule("bent", j_max, b=args.b, curvature=args.C)
    if fam == "wta":
        return make_welfare_rule("wta", j_max, p=args.p)
    if fam == "harmonic":
        return make_welfare_rule("harmonic", j_max)
    raise ValidationError(f"unknown welfare family {fam!r}")


def _design_from_args(args, w, j_max):
    spec = DesignSpec(args.design, c=args.C, b=args.b, chi=args.chi, q=args.q)
    return resolve_design(spec, w, j_max)


def _parse_grid(text):
    if ":" in text:
        start, stop, step = (float(t) for t in text.split(":"))
        n = int(round((stop - start) / step))
        return [start + i * step for i in range(n + 1)]
    return [float(text)]


def _emit(lines, out):
    data = "\n".join(lines) + "\n"
    if out in (None, "-"):
        sys.stdout.write(data)
    else:
        Path(out).write_text(data)


def _cmd_simulate(args):
    g = io.load_game(args.game)
    if args.tiebreak == "adversarial":
        tb = AdversarialEnumerate(cap=args.cap)
    else:
        tb = {"incumbent": "incumbent_then_lex", "lexicographic": "lexicographic"}[args.tiebreak]
    schedule = None
    if args.schedule:
        schedule = [int(t) for t in args.schedule.split(",")]
    if args.k == "inf":
        if isinstance(tb, AdversarialEnumerate):
            w, state = reachable_nash_min(g, cap=args.cap)
            print(f"limit_welfare={w!r} state={list(state)}")
            return 0
        traj = walk_to_nash(g, tb)
    else:
        traj = k_round_walk(g, int(args.k), tb, schedule)
    if args.out:
        io.trajectory_to_jsonl(g, traj, args.out)
    print(f"final_welfare={traj.final_welfare!r} final_action={list(traj.final)}")
    return 0


def _cmd_design(args):
    w = _welfare_from_args(args, args.jmax) if args.welfare else make_welfare_rule("set_covering", args.jmax)
    f = _design_from_args(args, w, args.jmax)
    if args.format == "json":
        _emit([json.dumps({"family": args.design, "values": list(f.values), "tail_value": f.tail_value})], args.out)
    else:
        lines = ["j,f_j"] + [f"{j + 1},{v!r}" for j, v in enumerate(f.values)]
        _emit(lines, args.out)
    return 0


def _cmd_analyze(args):
    lines = ["parameter,value,truncation_flag"]
    if args.route == "bounds":
        for c in _parse_grid(args.C_grid):
            v = theory_bounds(c, args.k, args.design)
            lines.append(f"{c!r},{v!r},False")
    elif args.route == "frontier":
        for q in _parse_grid(args.Q_grid):
            pt = frontier_setcov(q, args.jtrunc)
            lines.append(f"{q!r},{pt.one_round!r},False")
    elif args.route == "closed-form":
        w = _welfare_from_args(args, max(args.n + 2, args.jmax))
        f = _design_from_args(args, w, max(args.n + 2, args.jmax))
        fam = "setcov" if args.welfare in ("setcov", "set_covering") else "bent"
        res = poa_closed_form(w, f, fam, n=args.n, j_max=args.jmax)
        lines.append(f"{args.n},{res.value!r},{res.truncated}")
    elif args.route == "one-round":
        w = _welfare_from_args(args, args.jmax)
        f = _design_from_args(args, w, args.jmax + 2)
        if args.welfare in ("setcov", "set_covering"):
            lines.append(f"{args.jtrunc},{one_round_setcov(f, args.jtrunc)!r},False")
        else:
            res = one_round_bound(w, f, args.jmax)
            lines.append(f"{args.jmax},{res.value!r},{res.truncated}")
    elif args.route == "lp":
        w = _welfare_from_args(args, args.N + 2)
        f = _design_from_args(args, w, args.N + 2)
        sol = solve_poa_lp(w, f, args.N)
        if sol.status != "optimal":
            raise ValidationError(f"LP status: {sol.status}")
        lines.append(f"{args.N},{1.0 / sol.q!r},False")
    else:
        raise ValidationError(f"unknown route {args.route!r}")
    _emit(lines, args.out)
    return 0


def _cmd_construct(args):
    if args.kind == "greedy_trap":
        fvals = [float(t) for t in args.f_values.split(",")] if args.f_values else None
        con = build_greedy_trap(args.eps, fvals)
    elif args.kind == "two_agent_worst_case":
        if args.f_values:
            f = UtilityRule(tuple(float(t) for t in args.f_values.split(",")))
        else:
            w = make_welfare_rule("bent", 2, b=1, curvature=args.C)
            f = _design_from_args(args, w, 8)
        con = build_two_agent_worst_case(args.C, f)
    elif args.kind == "ci_chain":
        con = build_common_interest_chain(args.n, args.C)
    elif args.kind == "stack_or_spread":
        w = make_welfare_rule("set_covering", max(args.n, 2))
        f = _design_from_args(args, w, max(args.n, 2))
        con = build_stack_or_spread(args.n, f, args.base_size)
    elif args.kind == "poa_witness":
        w = _welfare_from_args(args, args.N1 + 2)
        f = _design_from_args(args, w, args.N1 + 2)
        sol = solve_poa_lp(w, f, args.N1)
        con = build_poa_witness(sol, args.N2)
    else:
        raise ValidationError(f"unknown construction kind {args.kind!r}")
    io.save_game(con.game, args.out)
    meta_path = Path(args.out).with_suffix(".meta.json")
    with meta_path.open("w") as fh:
        json.dump(con.meta, fh, indent=1, default=list)
        fh.write("\n")
    print(f"wrote {args.out} and {meta_path}")
    return 0


def _cmd_experiment(args):
    if args.config:
        cfg = ExperimentConfig.from_dict(json.loads(Path(args.config).read_text()))
    else:
        cfg = ExperimentConfig()
    res = run_experiment(cfg)
    paths = export_result(res, args.format, args.out_dir)
    for p in paths:
        print(f"wrote {p}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="resgames")
    sub = p.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run a best-response walk on a game JSON")
    sim.add_argument("--game", required=True)
    sim.add_argument("--k", default="1", help="number of rounds, or 'inf'")
    sim.add_argument("--tiebreak", default="incumbent",
                     choices=["incumbent", "lexicographic", "adversarial"])
    sim.add_argument("--cap", type=int, default=500_000)
    sim.add_argument("--schedule", default=None, help="comma-separated player indices")
    sim.add_argument("--out", default=None, help="trajectory JSONL path")
    sim.set_defaults(func=_cmd_simulate)

    def add_design_flags(sp, default_design=None, extra_choices=()):
        sp.add_argument("--design", default=default_design,
                        choices=["common_interest", "one_round", "asymptotic", "pareto",
                                 *extra_choices])
        sp.add_argument("--C", type=float, default=None)
        sp.add_argument("--b", type=int, default=1)
        sp.add_argument("--chi", type=float, default=None)
        sp.add_argument("--q", type=float, default=None)
        sp.add_argument("--p", type=float, default=0.5)

    des = sub.add_parser("design", help="tabulate a utility rule")
    add_design_flags(des)
    des.add_argument("--welfare", default=None,
                     choices=["setcov", "set_covering", "bent", "wta", "harmonic"])
    des.add_argument("--jmax", type=int, default=16)
    des.add_argument("--format", default="csv", choices=["csv", "json"])
    des.add_argument("--out", default=None)
    des.set_defaults(func=_cmd_design)

    ana = sub.add_parser("analyze", help="closed-form, LP, frontier, and bound values")
    ana.add_argument("--route", required=True,
                     choices=["closed-form", "lp", "frontier", "bounds", "one-round"])
    ana.add_argument("--C-grid", dest="C_grid", default="0:1:0.25")
    ana.add_argument("--Q-grid", dest="Q_grid", default="0.5")
    ana.add_argument("--k", default="one")
    ana.add_argument("--n", type=int, default=50)
    ana.add_argument("--N", type=int, default=8)
    ana.add_argument("--jtrunc", type=int, default=10_000)
    ana.add_argument("--jmax", type=int, default=50)
    ana.add_argument("--welfare", default="setcov",
                     choices=["setcov", "set_covering", "bent", "wta", "harmonic"])
    add_design_flags(ana, default_design="common_interest",
                     extra_choices=("optimal", "asymptotic_one_round"))
    ana.add_argument("--out", default=None)
    ana.set_defaults(func=_cmd_analyze)

    con = sub.add_parser("construct", help="generate a worst-case game instance")
    con.add_argument("--kind", required=True,
                     choices=["greedy_trap", "two_agent_worst_case", "ci_chain",
                              "stack_or_spread", "poa_witness"])
    con.add_argument("--eps", type=float, default=0.1)
    con.add_argument("--n", type=int, default=3)
    con.add_argument("--N1", type=int, default=3)
    con.add_argument("--N2", type=int, default=40)
    con.add_argument("--base-size", dest="base_size", type=int, default=100)
    con.add_argument("--f-values", dest="f_values", default=None,
                     help="explicit comma-separated utility rule values")
    con.add_argument("--welfare", default="setcov",
                     choices=["setcov", "set_covering", "bent", "wta", "harmonic"])
    add_design_flags(con, default_design="one_round")
    con.add_argument("--out", required=True)
    con.set_defaults(func=_cmd_construct)

    exp = sub.add_parser("experiment", help="run the randomized assignment experiment")
    exp.add_argument("--config", default=None, help="ExperimentConfig JSON path")
    exp.add_argument("--out-dir", dest="out_dir", default="experiment_out")
    exp.add_argument("--format", default="both", choices=["csv", "json", "both"])
    exp.set_defaults(func=_cmd_experiment)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        rc = args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (BudgetExceededError, EnumerationCapError, ScalingError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    return 0 if rc is None else rc


if __name__ == "__main__":
    sys.exit(main())
