"""
Case grid enumeration.

Enumeration order is kind, RW, SL or SW, theta0, y0. Cases whose start
footprint collides are excluded and counted.
"""
from dataclasses import dataclass, field
from typing import List
import numpy as np
import pandas as pd
from mirrorpark.scenario.layout import build_scenario, UnusableCase, KINDS
from mirrorpark.utils.batch import listify
import logging
log = logging.getLogger()

CASE_FIELDS = ["kind", "RW", "SL", "SW", "theta0", "y0", "y1"]


def levels(spec):
    """ return levels for a factor in the given order

    spec is a scalar, a list of values, or dict(low, high, step) inclusive of high
    """
    if isinstance(spec, dict):
        low, high, step = spec["low"], spec["high"], spec["step"]
        if step <= 0 or high < low:
            raise ValueError(f"empty range {spec}")
        count = int(np.floor((high - low) / step + 1e-9)) + 1
        return [round(low + i * step, 10) for i in range(count)]
    values = [float(v) for v in listify(spec)]
    if not values:
        raise ValueError("empty factor levels")
    return values


@dataclass
class CaseGrid:
    """ usable scenarios plus the counts of the full enumeration """
    scenarios: List = field(default_factory=list)
    total: int = 0
    excluded: int = 0

    def __len__(self):
        return len(self.scenarios)

    def __iter__(self):
        return iter(self.scenarios)

    def __getitem__(self, i):
        return self.scenarios[i]

    def records(self):
        return pd.DataFrame([s.record() for s in self.scenarios], columns=CASE_FIELDS)


def _factors(kind, spec, overrides):
    """ yield (RW, SL, SW, theta0 degrees, y0) in enumeration order """
    overrides = overrides or {}
    rws = levels(overrides.get("RW") if overrides.get("RW") is not None else spec["RW"])
    sls = levels(overrides.get("SL") if overrides.get("SL") is not None else spec["SL"])
    sws = levels(overrides.get("SW") if overrides.get("SW") is not None else spec["SW"])
    thetas = levels(overrides.get("THETA0") if overrides.get("THETA0") is not None
                    else spec["THETA0"])
    for rw in rws:
        y0s = (levels(overrides["Y0"]) if overrides.get("Y0") is not None
               else levels(dict(low=0.0, high=rw, step=spec["Y0_STEP"])))
        for sl in sls:
            for sw in sws:
                for theta in thetas:
                    for y0 in y0s:
                        yield rw, sl, sw, theta, y0


def grid_size(kind, config, overrides=None):
    """ number of cases before exclusion """
    return sum(1 for _ in _factors(kind, config.GRID[kind], overrides))


def grid_cases(kind, config, overrides=None):
    """ return CaseGrid for one kind, or for all kinds when kind is None

    overrides: dict of RW, SL, SW, THETA0, Y0 pinning factors to given levels
    """
    kinds = KINDS if kind is None else listify(kind)
    grid = CaseGrid()
    vehicle = config.vehicle()
    for k in kinds:
        if k not in config.GRID:
            raise ValueError(f"no grid for kind {k}")
        for rw, sl, sw, theta, y0 in _factors(k, config.GRID[k], overrides):
            grid.total += 1
            try:
                grid.scenarios.append(build_scenario(k, rw, sl, sw, np.radians(theta), y0,
                                                     vehicle=vehicle, config=config))
            except UnusableCase:
                grid.excluded += 1
    if grid.total == 0:
        raise ValueError("empty grid")
    log.info(f"grid {kind or 'all'}: {len(grid)} usable of {grid.total} cases")
    return grid


##### case files ###############################################################

def write_cases(grid, path):
    """ write one json record per line """
    grid.records().to_json(path, orient="records", lines=True)


def read_cases(path, config):
    """ return CaseGrid from a case file. unusable records are excluded """
    df = pd.read_json(path, orient="records", lines=True)
    missing = set(CASE_FIELDS) - set(df.columns)
    if missing:
        raise ValueError(f"case file {path} lacks {sorted(missing)}")
    grid = CaseGrid()
    vehicle = config.vehicle()
    for row in df.itertuples(index=False):
        grid.total += 1
        try:
            grid.scenarios.append(build_scenario(row.kind, row.RW, row.SL, row.SW,
                                                 np.radians(row.theta0), row.y0, row.y1,
                                                 vehicle=vehicle, config=config))
        except UnusableCase:
            grid.excluded += 1
    return grid
