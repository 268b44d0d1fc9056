"""
mirrorpark
Plots of scenarios, executed trajectories and ODD scatters.

SVG output is byte stable: the hash salt is fixed and no date is written.
"""

import os
import numpy as np
import matplotlib as mpl
import matplotlib.pyplot as plt
if "DISPLAY" not in os.environ:
    plt.switch_backend('agg')
from matplotlib.patches import Polygon
from mirrorpark.scenario.geometry import Pose2D, footprint
from mirrorpark.dynamics.bicycle import X, Y, THETA
import logging
log = logging.getLogger()

mpl.rcParams["svg.hashsalt"] = "mirrorpark"


def save_svg(fig, path):
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def draw_scenario(scenario, ax):
    """ regions in grey, slot outline dashed, target footprint green """
    for region in scenario.regions:
        ax.add_patch(Polygon(region.polygon, closed=True, facecolor="0.8", edgecolor="0.5"))
    ax.add_patch(Polygon(scenario.slot.rectangle, closed=True, fill=False,
                         linestyle="dashed", edgecolor="k"))
    ax.add_patch(Polygon(footprint(scenario.target_pose, scenario.vehicle), closed=True,
                         fill=False, edgecolor="g"))


def display_trajectory(scenario, states, title="", every=5, ax=None):
    """ draw regions, slot and footprint snapshots of an executed trace

    every: draw a footprint every n steps. the first and last are always drawn
    """
    states = np.atleast_2d(states)
    if ax is None:
        _, ax = plt.subplots(1, figsize=(10, 8))
    draw_scenario(scenario, ax)
    ax.plot(states[:, X], states[:, Y], "b-", linewidth=1)
    snapshots = sorted(set(range(0, len(states), every)) | {len(states) - 1})
    for i in snapshots:
        pose = Pose2D(states[i, X], states[i, Y], states[i, THETA])
        ax.add_patch(Polygon(footprint(pose, scenario.vehicle), closed=True, fill=False,
                             edgecolor="b", alpha=0.4))

    # frame around the slot and the road
    x0, y0 = scenario.slot.rectangle.min(axis=0)
    x1, y1 = scenario.slot.rectangle.max(axis=0)
    xs = np.concatenate([states[:, X], [x0, x1]])
    ax.set_xlim(xs.min() - 3, xs.max() + 3)
    ax.set_ylim(scenario.road_edge - 1, y1 + 1)
    ax.set_aspect("equal")
    ax.set_title(title)
    return ax


def display_odd(outcomes, x="theta0", y="y0", title="", ax=None):
    """ scatter of cases: green parked, red failed """
    if ax is None:
        _, ax = plt.subplots(1, figsize=(8, 6))
    success = outcomes["success"].astype(bool).to_numpy()
    ax.scatter(outcomes[x][success], outcomes[y][success], c="g", s=8, label="parked")
    ax.scatter(outcomes[x][~success], outcomes[y][~success], c="r", s=8, label="failed")
    ax.set_xlabel(x)
    ax.set_ylabel(y)
    ax.set_title(title)
    if len(outcomes):
        ax.legend(loc="upper right")
    return ax
