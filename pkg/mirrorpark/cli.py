"""
mirrorpark command line

    mirrorpark plan --kind reverse --sw 2.9 --theta0 10 --out out/plan
    mirrorpark sweep --kind all --sampler stratified --sample 200 --out out/sweep
    mirrorpark report --out out/sweep
    mirrorpark selftest

exit codes: 0 ok, 2 vehicle not parked, 1 usage error or failure
"""
import argparse
import sys
import os
from os.path import join
import numpy as np
from mirrorpark.config import Config
from mirrorpark.startup import setup_logging
from mirrorpark.scenario.layout import build_scenario
from mirrorpark.scenario.grid import grid_cases, read_cases, write_cases
from mirrorpark.dynamics.bicycle import write_trace
from mirrorpark.planner.decide import decide_and_park
from mirrorpark.evaluate.sweep import run_sweep, load_report
from mirrorpark.evaluate.report import emit_report
from mirrorpark.utils.visualize import display_trajectory, save_svg
from mirrorpark.selftest import run_selftest
import logging
log = logging.getLogger()

# flag name => config key
FLAGS = dict(kind="KIND", rw="RW", sl="SL", sw="SW", theta0="THETA0", y0="Y0", out="OUT",
             sample="SAMPLE", sampler="SAMPLER", cases="CASES_FILE", seed="SEED", jobs="JOBS")
FACTORS = ["RW", "SL", "SW", "THETA0", "Y0"]


class Parser(argparse.ArgumentParser):
    """ usage errors exit 1 """

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def build_parser():
    common = Parser(add_help=False)
    common.add_argument("--config", help="yaml file with Config attribute names as keys")
    common.add_argument("--out", help="output directory")
    common.add_argument("--literal-paper", action="store_true", default=None,
                        help="desired y left free, fixed linearizing angle and mirrored target")
    common.add_argument("-v", "--verbose", action="store_true")

    factors = Parser(add_help=False)
    factors.add_argument("--kind", help="parallel, reverse or angle. sweep also accepts all")
    factors.add_argument("--rw", type=float, help="road width (m)")
    factors.add_argument("--sl", type=float, help="slot length (m)")
    factors.add_argument("--sw", type=float, help="slot width (m)")
    factors.add_argument("--theta0", type=float, help="initial heading (degrees)")
    factors.add_argument("--y0", type=float,
                         help="initial distance from the slot side road edge (m)")

    parser = Parser(prog="mirrorpark", description="mirror target parking planner")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("plan", parents=[common, factors], help="park one scenario")
    sweep = sub.add_parser("sweep", parents=[common, factors], help="evaluate a case grid")
    sweep.add_argument("--sample", type=int, help="number of cases")
    sweep.add_argument("--sampler", choices=["full", "stratified", "list"])
    sweep.add_argument("--cases", help="case file for the list sampler")
    sweep.add_argument("--seed", type=int)
    sweep.add_argument("--jobs", type=int, help="worker processes. default is the core count")
    sub.add_parser("report", parents=[common], help="rebuild report files from outcomes.csv")
    selftest = sub.add_parser("selftest", parents=[common], help="run the oracle suites")
    selftest.add_argument("--tol", type=float, help="replace every suite tolerance")
    return parser


def make_config(args):
    """ Config from the file, then flags """
    config = Config.load(args.config) if args.config else Config()
    values = {key: getattr(args, flag) for flag, key in FLAGS.items()
              if getattr(args, flag, None) is not None}
    if args.literal_paper:
        values["LITERAL_PAPER"] = True
    config.update(**values)
    return config


##### commands #################################################################

def cmd_plan(config, args=None):
    """ park one scenario. write trace.csv, outcome.json and trajectory.svg """
    kind = config.KIND
    if kind == "all":
        raise ValueError("plan needs a single kind")
    nominal = config.NOMINAL[kind]
    f = {k: nominal[k] if getattr(config, k) is None else getattr(config, k) for k in FACTORS}
    scenario = build_scenario(kind, f["RW"], f["SL"], f["SW"], np.radians(f["THETA0"]), f["Y0"],
                              config=config)
    outcome = decide_and_park(scenario, config=config)

    os.makedirs(config.OUT, exist_ok=True)
    write_trace(join(config.OUT, "trace.csv"), outcome.executed_trace, outcome.commands,
                scenario.vehicle.dt)
    with open(join(config.OUT, "outcome.json"), "w") as fh:
        fh.write(outcome.to_json(scenario, config.RECORD_TIMING) + "\n")
    ax = display_trajectory(scenario, outcome.executed_trace,
                            title=f"{kind} {outcome.reason}")
    save_svg(ax.figure, join(config.OUT, "trajectory.svg"))

    print(f"{kind}: {outcome.reason} switches={outcome.switch_count} "
          f"duration_s={outcome.duration:.1f} replans={outcome.replans}")
    return 0 if outcome.success else 2


def _summary(aggregates):
    return (f"success_rate={aggregates['success_rate']:.2f} "
            f"mean_switches={aggregates['mean_switches']:.2f} "
            f"mean_duration_s={aggregates['mean_duration_s']:.2f} "
            f"mean_plan_ms={aggregates['mean_plan_ms']:.1f}")


def cmd_sweep(config, args=None):
    """ run the configured sampler and write cases.jsonl plus the report files """
    if config.SAMPLER == "list":
        if not config.CASES_FILE:
            raise ValueError("list sampler needs a case file")
        grid = read_cases(config.CASES_FILE, config)
    else:
        kind = None if config.KIND == "all" else config.KIND
        overrides = {k: getattr(config, k) for k in FACTORS if getattr(config, k) is not None}
        grid = grid_cases(kind, config, overrides)
    os.makedirs(config.OUT, exist_ok=True)
    write_cases(grid, join(config.OUT, "cases.jsonl"))
    report = run_sweep(grid, config, out=config.OUT)
    emit_report(report, config.OUT, config.FLAG_LIMIT)
    print(_summary(report.aggregates))
    return 0


def cmd_report(config, args=None):
    report = load_report(join(config.OUT, "outcomes.csv"))
    emit_report(report, config.OUT, config.FLAG_LIMIT)
    print(_summary(report.aggregates))
    return 0


def cmd_selftest(config, args=None):
    tol = getattr(args, "tol", None)
    ok = run_selftest(tol)
    print("selftest passed" if ok else "selftest FAILED")
    return 0 if ok else 1


COMMANDS = dict(plan=cmd_plan, sweep=cmd_sweep, report=cmd_report, selftest=cmd_selftest)


def main(argv=None):
    args = build_parser().parse_args(argv)
    setup_logging(verbose=args.verbose)
    try:
        config = make_config(args)
        if args.verbose:
            config.display()
        return COMMANDS[args.command](config, args)
    except ValueError as e:
        print(f"mirrorpark: error: {e}", file=sys.stderr)
        return 1
    except Exception as e:
        log.exception(e)
        return 1


if __name__ == "__main__":
    sys.exit(main())
