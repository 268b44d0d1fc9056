"""
Batch evaluation over a case grid.

Outcomes are appended to outcomes.csv after every batch; a restarted sweep
skips the cases already recorded there.
"""
from dataclasses import dataclass, field
from concurrent.futures import ProcessPoolExecutor
import os
from os.path import join, exists
from typing import Dict
import numpy as np
import pandas as pd
from mirrorpark.scenario.grid import CASE_FIELDS
from mirrorpark.planner.decide import decide_and_park
from mirrorpark.utils.batch import batched
import logging
log = logging.getLogger()

OUTCOME_COLUMNS = CASE_FIELDS + ["success", "reason", "switches", "duration_s", "replans",
                                 "mean_plan_ms"]
KEY_COLUMNS = ["kind", "RW", "SL", "SW", "theta0", "y0"]


@dataclass
class SweepReport:
    outcomes: pd.DataFrame
    aggregates: dict = field(default_factory=dict)
    odd_set: list = field(default_factory=list)
    # (scenario, executed trace) of failed cases by case index
    traces: Dict[int, tuple] = field(default_factory=dict)
    total: int = 0
    excluded: int = 0


def case_key(record):
    return tuple(record[k] if k == "kind" else round(float(record[k]), 4) for k in KEY_COLUMNS)


def evaluate_case(scenario, config):
    """ return (outcome row, executed trace or None when parked) """
    outcome = decide_and_park(scenario, config=config)
    ms = outcome.plan_wall_ms
    row = dict(**scenario.record(), success=bool(outcome.success), reason=outcome.reason,
               switches=outcome.switch_count, duration_s=round(outcome.duration, 6),
               replans=outcome.replans,
               mean_plan_ms=round(float(np.mean(ms)), 3) if ms and config.RECORD_TIMING else 0.0)
    return row, None if outcome.success else outcome.executed_trace


def _evaluate(args):
    return evaluate_case(*args)


##### samplers #################################################################

def stratified(grid, size, seed=0):
    """ indices of a sample spread over (kind, RW, SL, SW) strata in proportion to their size """
    if size >= len(grid):
        return list(range(len(grid)))
    rng = np.random.default_rng(seed)
    df = grid.records()
    groups = list(df.groupby(["kind", "RW", "SL", "SW"], sort=True).indices.values())
    quota = np.array([len(g) for g in groups]) * size / len(df)
    counts = np.floor(quota).astype(int)
    # largest remainders get the leftover cases
    for i in np.argsort(-(quota - counts), kind="stable")[:size - counts.sum()]:
        counts[i] += 1
    chosen = []
    for g, c in zip(groups, counts):
        chosen.extend(rng.choice(g, size=c, replace=False).tolist())
    return sorted(chosen)


def select(grid, config):
    """ case indices for the configured sampler """
    if config.SAMPLER == "stratified":
        if not config.SAMPLE:
            raise ValueError("stratified sampler needs SAMPLE")
        return stratified(grid, int(config.SAMPLE), config.SEED)
    indices = list(range(len(grid)))
    if config.SAMPLE and config.SAMPLER == "full":
        indices = indices[:int(config.SAMPLE)]
    return indices


def aggregate(outcomes):
    """ success rate and mean MOEs """
    if len(outcomes) == 0:
        return dict(cases=0, passes=0, success_rate=0.0, mean_switches=0.0,
                    mean_duration_s=0.0, mean_plan_ms=0.0)
    success = outcomes["success"].astype(bool)
    return dict(cases=int(len(outcomes)), passes=int(success.sum()),
                success_rate=round(float(success.mean()), 6),
                mean_switches=round(float(outcomes["switches"].mean()), 6),
                mean_duration_s=round(float(outcomes["duration_s"].mean()), 6),
                mean_plan_ms=round(float(outcomes["mean_plan_ms"].mean()), 3))


def run_sweep(grid, config, out=None):
    """ return SweepReport for the configured sampler over grid

    out: directory holding outcomes.csv for resumption. None keeps results in memory
    """
    from mirrorpark.evaluate.odd import extract_odd
    if len(grid) == 0:
        raise ValueError("empty grid")
    indices = select(grid, config)
    progress = join(out, "outcomes.csv") if out else None
    done = {}
    if progress and exists(progress):
        previous = pd.read_csv(progress)
        done = {case_key(r): r for r in previous.to_dict("records")}
        log.info(f"resuming: {len(done)} cases already recorded")
    todo = [i for i in indices if case_key(grid[i].record()) not in done]

    jobs = max(1, int(config.JOBS or 1))
    traces = {}
    executor = ProcessPoolExecutor(max_workers=jobs) if jobs > 1 else None
    try:
        for batch in batched(todo, jobs * 4):
            args = [(grid[i], config) for i in batch]
            results = executor.map(_evaluate, args) if executor else map(_evaluate, args)
            rows = []
            for i, (row, trace) in zip(batch, results):
                rows.append(row)
                done[case_key(row)] = row
                if trace is not None:
                    traces[i] = (grid[i], trace)
            if progress:
                os.makedirs(out, exist_ok=True)
                pd.DataFrame(rows, columns=OUTCOME_COLUMNS).to_csv(
                    progress, mode="a", header=not exists(progress), index=False)
            log.info(f"sweep: {len(done)} of {len(indices)} cases")
    finally:
        if executor:
            executor.shutdown()

    outcomes = pd.DataFrame([done[case_key(grid[i].record())] for i in indices],
                            columns=OUTCOME_COLUMNS)
    report = SweepReport(outcomes=outcomes, aggregates=aggregate(outcomes), traces=traces,
                         total=grid.total, excluded=grid.excluded)
    report.aggregates.update(total=grid.total, excluded=grid.excluded)
    report.odd_set = extract_odd(report)
    return report


def load_report(path):
    """ SweepReport from an existing outcomes.csv """
    from mirrorpark.evaluate.odd import extract_odd
    outcomes = pd.read_csv(path)
    missing = set(OUTCOME_COLUMNS) - set(outcomes.columns)
    if missing:
        raise ValueError(f"{path} lacks {sorted(missing)}")
    report = SweepReport(outcomes=outcomes[OUTCOME_COLUMNS], aggregates=aggregate(outcomes))
    report.odd_set = extract_odd(report)
    return report
