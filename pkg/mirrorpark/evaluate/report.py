"""
Report files: outcomes.csv, aggregates.json, odd.svg and one trajectory SVG per
flagged failure. Identical reports give identical files.
"""
import json
import os
from os.path import join
from mirrorpark.evaluate.sweep import OUTCOME_COLUMNS
from mirrorpark.evaluate.odd import plot_odd
from mirrorpark.utils.visualize import display_trajectory, save_svg
import logging
log = logging.getLogger()


def write_json(obj, path):
    with open(path, "w") as f:
        json.dump(obj, f, indent=2, sort_keys=True)
        f.write("\n")


def emit_report(report, directory, flag_limit=20):
    """ write report files and return their paths """
    os.makedirs(directory, exist_ok=True)
    paths = []

    path = join(directory, "outcomes.csv")
    report.outcomes[OUTCOME_COLUMNS].to_csv(path, index=False)
    paths.append(path)

    path = join(directory, "aggregates.json")
    write_json(dict(**report.aggregates, odd_cells=len(report.odd_set),
                    odd_set=[list(c) for c in report.odd_set]), path)
    paths.append(path)

    path = join(directory, "odd.svg")
    plot_odd(report.outcomes, path)
    paths.append(path)

    for index in sorted(report.traces)[:flag_limit]:
        scenario, states = report.traces[index]
        path = join(directory, "trajectories", f"{index}.svg")
        ax = display_trajectory(scenario, states, title=f"case {index} {scenario.key}")
        save_svg(ax.figure, path)
        paths.append(path)
    log.info(f"report written to {directory}")
    return paths
