"""Command-line entry point: ``teamcoop {simulate,optimize,validate,metrics}``.

Exit codes: 0 success, 1 validation failure, 2 runtime error, 3 bad
arguments (including missing input files).  Log verbosity comes from the
``TEAMCOOP_LOG`` environment variable (default ``WARNING``).
"""

import argparse
import enum
import logging
import os
import sys

from .errors import EmptyTrajectory, ScenarioError, TeamCoopError, TooLarge
from .files import (
    FileFormatError,
    atomic_write,
    dump_json,
    load_json,
    load_trajectory,
    metrics_text,
    trajectory_text,
)
from .payoff import (
    DIRECTED,
    GAParams,
    PayoffModel,
    brute_force_optimize,
    ga_optimize,
    problem_violations,
)
from .sim import Scenario, metrics, run, scenario_violations

log = logging.getLogger("teamcoop")


class ExitStatus(enum.IntEnum):
    OK = 0
    INVALID = 1
    RUNTIME = 2
    USAGE = 3


class _Usage(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(ExitStatus.USAGE, f"{self.prog}: error: {message}\n")


def _existing(path):
    if not os.path.isfile(path):
        raise _Usage(f"no such file: {path}")
    return path


def _report(problems):
    for p in problems:
        print(f"  - {p}")


def _load_scenario(path):
    """Parsed :class:`Scenario` or an exit status after printing why not."""
    data = load_json(_existing(path))
    problems = scenario_violations(data)
    if problems:
        print(f"invalid scenario {path}:")
        _report(problems)
        return None
    return Scenario.from_dict(data)


def cmd_simulate(args):
    if args.epochs is not None and args.epochs < 1:
        raise _Usage(f"--epochs must be >= 1, got {args.epochs}")
    scenario = _load_scenario(args.scenario)
    if scenario is None:
        return ExitStatus.INVALID
    scenario = scenario.with_overrides(seed=args.seed, epochs=args.epochs)
    records = run(scenario)
    summary = metrics(records)
    os.makedirs(args.out, exist_ok=True)
    atomic_write(os.path.join(args.out, "trajectory.jsonl"), trajectory_text(records))
    atomic_write(os.path.join(args.out, "metrics.csv"), metrics_text(summary))
    agg = summary["aggregate"]
    print(
        f"simulated {agg['epochs']} epochs (seed {scenario.seed}): "
        f"mean density {agg['mean_cooperation_density']:.4f}, "
        f"mean teams {agg['mean_team_count']:.3f}, cumulative EU {agg['cumulative_eu']:.4f}"
    )
    return ExitStatus.OK


def _load_problem(path):
    data = load_json(_existing(path))
    problems = problem_violations(data)
    if problems:
        print(f"invalid problem {path}:")
        _report(problems)
        return None, None
    return PayoffModel.from_dict(data), data.get("mode", DIRECTED)


def cmd_optimize(args):
    model, mode = _load_problem(args.problem)
    if model is None:
        return ExitStatus.INVALID
    if args.method == "brute":
        result = brute_force_optimize(model, mode, seed=args.seed)
        print(f"optimum team payoff {result.team_payoff!r} profile {result.profile.to_lists()}")
    else:
        params = GAParams(
            **{k: v for k, v in (("population", args.population), ("generations", args.generations)) if v is not None}
        )
        result = ga_optimize(model, mode, params, seed=args.seed)
        try:
            best = brute_force_optimize(model, mode).team_payoff
            gap = f"gap vs brute {best - result.team_payoff!r}"
        except TooLarge:
            gap = "brute force infeasible"
        print(f"ga best payoff {result.team_payoff!r} ({gap})")
    atomic_write(args.out, dump_json(result.to_dict()))
    return ExitStatus.OK


def cmd_validate(args):
    path = args.scenario or args.problem
    data = load_json(_existing(path))
    problems = scenario_violations(data) if args.scenario else problem_violations(data)
    if problems:
        print(f"{len(problems)} violation(s) in {path}:")
        _report(problems)
        return ExitStatus.INVALID
    print("OK")
    return ExitStatus.OK


def cmd_metrics(args):
    records = load_trajectory(_existing(args.trajectory))
    try:
        summary = metrics(records)
    except EmptyTrajectory as exc:
        print(f"invalid trajectory {args.trajectory}: {exc}")
        return ExitStatus.INVALID
    atomic_write(args.out, metrics_text(summary))
    for key, value in summary["aggregate"].items():
        print(f"{key}: {value}")
    return ExitStatus.OK


def build_parser():
    parser = _Parser(prog="teamcoop", description="Simulate robot-team cooperation and optimize action profiles.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("simulate", help="run a scenario; writes trajectory.jsonl and metrics.csv")
    p.add_argument("--scenario", required=True, help="scenario JSON file")
    p.add_argument("--seed", type=int, help="override the scenario's master seed")
    p.add_argument("--epochs", type=int, help="override the scenario's epoch count (>= 1)")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("optimize", help="optimize a standalone payoff problem")
    p.add_argument("--problem", required=True, help="problem JSON file")
    p.add_argument("--method", choices=("brute", "ga"), default="brute")
    p.add_argument("--seed", type=int, default=0, help="GA seed (recorded for brute too)")
    p.add_argument("--population", type=int, help="GA population size")
    p.add_argument("--generations", type=int, help="GA generation count")
    p.add_argument("--out", required=True, help="result JSON file")
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("validate", help="check a scenario or problem file")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--scenario", help="scenario JSON file")
    group.add_argument("--problem", help="problem JSON file")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("metrics", help="re-summarize an existing trajectory")
    p.add_argument("--trajectory", required=True, help="trajectory JSONL file")
    p.add_argument("--out", required=True, help="metrics CSV file")
    p.set_defaults(func=cmd_metrics)
    return parser


def main(argv=None):
    logging.basicConfig(level=os.environ.get("TEAMCOOP_LOG", "WARNING").upper(), format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return int(args.func(args))
    except _Usage as exc:
        print(f"teamcoop {args.command}: {exc}", file=sys.stderr)
        return ExitStatus.USAGE
    except FileFormatError as exc:
        print(f"malformed input: {exc}")
        return ExitStatus.INVALID
    except ScenarioError as exc:
        print("invalid scenario:")
        _report(exc.violations)
        return ExitStatus.INVALID
    except TeamCoopError as exc:
        log.debug("runtime failure", exc_info=True)
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return ExitStatus.RUNTIME


if __name__ == "__main__":
    sys.exit(main())
