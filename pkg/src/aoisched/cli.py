"""Command-line front end: ``aoisched <command> [options]``.

Global options (``--seed``, ``--out``, ``--format``) may be given either
before or after the command name.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from pathlib import Path

from .activation import solve_activation
from .experiment import ExperimentConfig, render_table, rows_to_csv, run_experiment
from .grouping import ClusterConfig, build_graph, cluster_sources
from .lowerbound import solve_lb
from .model import HomogeneousSchedule, Instance, source_label, validate_instance
from .offsets import OffsetProblem, solve_offsets
from .pipeline import SolveConfig, solve_instance
from .scenarios import GridScenario, generate, nine_region_fixture, two_group_fixture
from .simulate import assign_channels, render_window, simulate

FORMATS = ("json", "csv", "table")
PRESETS = ("full", "two-group")
FIXTURES = {"nine-region": nine_region_fixture, "two-group": two_group_fixture}


def _global_options(parser: argparse.ArgumentParser, suppress: bool) -> None:
    default = argparse.SUPPRESS if suppress else None
    parser.add_argument("--seed", type=int, default=argparse.SUPPRESS if suppress else 0,
                        help="base RNG seed (default 0)")
    parser.add_argument("--out", type=Path, default=default,
                        help="write output here instead of stdout")
    parser.add_argument("--format", choices=FORMATS, default=default,
                        help="output format (default depends on the command)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="aoisched",
        description="Minimum-channel periodic schedules under hard age-of-information deadlines.")
    _global_options(parser, suppress=False)
    parser.add_argument("-v", "--verbose", action="store_true", help="log solver progress")
    # Sub-parsers suppress their defaults so a value given before the command survives.
    common = argparse.ArgumentParser(add_help=False)
    _global_options(common, suppress=True)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", parents=[common], help="generate a grid instance as JSON")
    p.add_argument("--width", type=int, default=6)
    p.add_argument("--height", type=int, default=6)
    p.add_argument("--coverage", type=int, choices=(1, 2, 3), default=2)
    p.add_argument("--case", type=int, choices=(1, 2, 3), default=2,
                   help="1: T=d-1, 2: T=1, 3: no fusion")
    p.add_argument("--dlo", type=int, default=2)
    p.add_argument("--dhi", type=int, default=10)
    p.add_argument("--trial", type=int, default=0)
    p.add_argument("--shape", choices=("straight", "bent"), default="straight",
                   help="footprint shape for coverage 3")
    p.add_argument("--fixture", choices=sorted(FIXTURES),
                   help="emit a built-in worked instance instead of a random one")

    p = sub.add_parser("lb", parents=[common], help="channel lower bound from the covering LP")
    p.add_argument("instance", type=Path)

    p = sub.add_parser("activate", parents=[common], help="choose active sources per region")
    p.add_argument("instance", type=Path)

    p = sub.add_parser("group", parents=[common], help="cluster active sources into divisible groups")
    p.add_argument("instance", type=Path)
    p.add_argument("--preset", choices=PRESETS, default="full")

    p = sub.add_parser("offsets", parents=[common], help="minimum-peak offsets for given intervals")
    p.add_argument("problem", type=Path,
                   help='JSON {"intervals": {"1": 4, ...}, "regions": [{"id", "members", "T"}]}')
    p.add_argument("--budget", type=int, default=None, help="search node budget")

    p = sub.add_parser("solve", parents=[common], help="full pipeline with verification")
    p.add_argument("instance", type=Path)
    p.add_argument("--preset", choices=PRESETS, default="full")
    p.add_argument("--horizon", type=int, default=None, help="verification horizon")

    p = sub.add_parser("simulate", parents=[common], help="age trace of an instance under a schedule")
    p.add_argument("instance", type=Path)
    p.add_argument("schedule", type=Path, help="schedule JSON or a solve report")
    p.add_argument("--horizon", type=int, default=None)

    p = sub.add_parser("experiment", parents=[common], help="three-case channel-count sweep")
    p.add_argument("--width", type=int, default=6)
    p.add_argument("--height", type=int, default=6)
    p.add_argument("--trials", type=int, default=50)
    p.add_argument("--coverages", type=int, nargs="+", default=[1, 2, 3])
    p.add_argument("--cases", type=int, nargs="+", default=[1, 2, 3])
    p.add_argument("--dlo", type=int, default=2)
    p.add_argument("--dhi", type=int, default=10)
    p.add_argument("--preset", choices=PRESETS, default="two-group")
    p.add_argument("--shape", choices=("straight", "bent"), default="straight")
    p.add_argument("--jobs", type=int, default=1, help="worker processes")
    return parser


def _load_instance(path: Path) -> Instance:
    inst = Instance.from_json(path.read_text())
    problems = validate_instance(inst, require_direct=False)
    if problems:
        raise SystemExit(f"{path}: invalid instance:\n  " + "\n  ".join(problems))
    return inst


def _csv(rows: list[list]) -> str:
    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerows(rows)
    return buf.getvalue()


def _json(data) -> str:
    return json.dumps(data, indent=2, sort_keys=True) + "\n"


def cmd_gen(args) -> str:
    if args.fixture:
        inst = FIXTURES[args.fixture]()
    else:
        inst = generate(GridScenario(args.width, args.height, args.coverage, args.case,
                                     args.dlo, args.dhi, args.seed, args.trial, shape=args.shape))
    return inst.to_json() + "\n"


def cmd_lb(args) -> str:
    lb = solve_lb(_load_instance(args.instance))
    fmt = args.format or "csv"
    if fmt == "json":
        return _json({"rate_sum": str(lb.total), "K": lb.channels,
                      "rates": {source_label(m): str(v) for m, v in lb.rates.rates.items()}})
    rows = [["source", "rate", "rate_float"]]
    rows += [[source_label(m), str(v), f"{float(v):.9f}"] for m, v in lb.rates.rates.items()]
    rows += [["sum", str(lb.total), f"{float(lb.total):.9f}"], ["K", lb.channels, lb.channels]]
    if fmt == "table":
        return "\n".join(f"{a:<8} {b:<12} {c}" for a, b, c in rows) + "\n"
    return _csv(rows)


def cmd_activate(args) -> str:
    act = solve_activation(_load_instance(args.instance))
    fmt = args.format or "table"
    if fmt == "json":
        return _json(act.to_dict())
    rates = act.rates
    if fmt == "csv":
        rows = [["region", "option", "kind", "members"]]
        rows += [[n, o.index, o.kind, " ".join(source_label(m) for m in o.members)]
                 for n, o in enumerate(act.chosen, start=1)]
        rows += [[], ["source", "max_interval", "rate"]]
        rows += [[source_label(m), u, str(rates[m])] for m, u in act.max_intervals.items()]
        return _csv(rows)
    lines = [f"region {n}: {' '.join(source_label(m) for m in o.members)} ({o.describe()})"
             for n, o in enumerate(act.chosen, start=1)]
    lines.append("")
    lines.append("source  max interval  rate")
    lines += [f"{source_label(m):<7} {u:>12}  {rates[m]}" for m, u in act.max_intervals.items()]
    lines.append(f"total rate {act.objective}" + ("" if act.certified else " (not proven optimal)"))
    return "\n".join(lines) + "\n"


def cmd_group(args) -> str:
    act = solve_activation(_load_instance(args.instance))
    graph = build_graph(act)
    plan = cluster_sources(act, graph, ClusterConfig.preset(args.preset))
    fmt = args.format or "table"
    if fmt == "json":
        data = plan.to_dict()
        data["components"] = [list(c) for c in graph.components]
        return _json(data)
    if fmt == "csv":
        rows = [["source", "group", "base", "max_interval", "interval"]]
        for j, g in enumerate(plan.groups, start=1):
            for m, c in g.intervals.items():
                rows.append([source_label(m), j, g.base, act.max_interval(m), c])
        return _csv(rows)
    label = lambda comp: "{" + ",".join(source_label(m) for m in comp) + "}"  # noqa: E731
    lines = ["components: " + " ".join(label(c) for c in graph.components)]
    for j, g in enumerate(plan.groups, start=1):
        ivs = " ".join(f"{source_label(m)}:{c}" for m, c in g.intervals.items())
        lines.append(f"group {j} base {g.base}: {ivs}  (channels {g.channels})")
    lines.append(f"estimated channels {plan.objective}")
    return "\n".join(lines) + "\n"


def cmd_offsets(args) -> str:
    problem = OffsetProblem.from_dict(json.loads(args.problem.read_text()))
    kw = {} if args.budget is None else {"node_budget": args.budget}
    sol = solve_offsets(problem, **kw)
    fmt = args.format or "table"
    if fmt == "json":
        return _json({"offsets": {source_label(m): o for m, o in sol.offsets.items()},
                      "K": sol.channels, "lower_bound": sol.lower_bound,
                      "certified": sol.certified})
    if fmt == "csv":
        rows = [["source", "interval", "offset"]]
        rows += [[source_label(m), problem.intervals[m], o] for m, o in sol.offsets.items()]
        return _csv(rows)
    head = " ".join(f"{source_label(m)}:{o}" for m, o in sol.offsets.items())
    table = render_window(assign_channels(sol.schedule(problem.intervals)))
    return f"offsets {head}\nK = {sol.channels}\n{table}\n"


def cmd_solve(args) -> str:
    inst = _load_instance(args.instance)
    report = solve_instance(inst, SolveConfig.preset(args.preset, horizon=args.horizon))
    fmt = args.format or "json"
    if fmt == "json":
        return report.to_json() + "\n"
    if fmt == "csv":
        rows = [["source", "interval", "offset"]]
        rows += [[source_label(m), c, o] for m, (c, o) in report.schedule.entries.items()]
        return _csv(rows)
    status = "feasible" if report.feasible else f"{report.violations} violations"
    lb = report.lower_bound_channels
    return (f"K = {report.channels} (lower bound {lb}), {status}\n"
            f"{render_table(report)}\n")


def cmd_simulate(args) -> str:
    inst = _load_instance(args.instance)
    schedule = HomogeneousSchedule.from_dict(json.loads(args.schedule.read_text()))
    trace = simulate(inst, schedule, args.horizon)
    for n, t in trace.violations[:10]:
        print(f"violation: region {n} at slot {t}", file=sys.stderr)
    args.exit_status = 1 if trace.violations else 0
    fmt = args.format or "csv"
    if fmt == "json":
        return _json({"horizon": trace.horizon, "max_age": trace.max_age(),
                      "violations": [list(v) for v in trace.violations]})
    return trace.to_csv()


def cmd_experiment(args) -> str:
    cfg = ExperimentConfig(width=args.width, height=args.height, coverages=tuple(args.coverages),
                           cases=tuple(args.cases), trials=args.trials, d_lo=args.dlo,
                           d_hi=args.dhi, seed=args.seed, preset=args.preset, shape=args.shape,
                           jobs=args.jobs)
    rows = run_experiment(cfg)
    if (args.format or "csv") == "json":
        return _json(rows)
    return rows_to_csv(rows)


COMMANDS = {
    "gen": cmd_gen, "lb": cmd_lb, "activate": cmd_activate, "group": cmd_group,
    "offsets": cmd_offsets, "solve": cmd_solve, "simulate": cmd_simulate,
    "experiment": cmd_experiment,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    text = COMMANDS[args.command](args)
    if args.out:
        args.out.write_text(text)
    else:
        sys.stdout.write(text)
    return getattr(args, "exit_status", 0)


if __name__ == "__main__":
    raise SystemExit(main())
