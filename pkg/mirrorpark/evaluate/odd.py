"""
Operational design domain: the initial condition cells where parking succeeds
at least SUCCESS_RATE of the time.
"""
import numpy as np
from mirrorpark.utils.visualize import display_odd, save_svg
import logging
log = logging.getLogger()

SUCCESS_RATE = 0.95
# cell widths. defaults are the grid sampling steps
CELLS = dict(SL=0.1, SW=0.05, theta0=10.0, y0=0.1)


def _cell(values, width):
    """ lower cell edge for each value """
    return np.round(np.floor(np.asarray(values, dtype=float) / width + 1e-6) * width, 6)


def odd_table(outcomes, cells=None):
    """ DataFrame of cells with case count, passes and success rate """
    cells = {**CELLS, **(cells or {})}
    df = outcomes[["kind"]].copy()
    for k, width in cells.items():
        df[k] = _cell(outcomes[k], width)
    df["success"] = outcomes["success"].astype(bool)
    keys = ["kind"] + list(cells)
    table = df.groupby(keys, sort=True)["success"].agg(["size", "sum"]).reset_index()
    table = table.rename(columns={"size": "cases", "sum": "passes"})
    table["rate"] = table["passes"] / table["cases"]
    table["odd"] = table["rate"] >= SUCCESS_RATE
    return table


def extract_odd(report, cells=None):
    """ return (kind, SL, SW, theta0, y0) cells whose success rate is at least 95%

    report: SweepReport or outcomes DataFrame. empty cells never appear
    """
    outcomes = getattr(report, "outcomes", report)
    if len(outcomes) == 0:
        return []
    table = odd_table(outcomes, cells)
    keys = ["kind"] + list({**CELLS, **(cells or {})})
    odd = [tuple(r) for r in table.loc[table["odd"], keys].itertuples(index=False)]
    log.info(f"odd: {len(odd)} of {len(table)} cells")
    return odd


def plot_odd(outcomes, path, title="ODD"):
    ax = display_odd(outcomes, title=title)
    save_svg(ax.figure, path)
