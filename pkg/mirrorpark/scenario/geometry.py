"""
Planar geometry for the vehicle footprint and the infeasible regions.

All regions are closed convex polygons. Touching counts as collision.
"""
from dataclasses import dataclass, field
from typing import List, Tuple
import numpy as np
from shapely.geometry import Polygon
import logging
log = logging.getLogger()

# separation smaller than this is contact
CONTACT_TOL = 1e-9


def wrap_angle(theta):
    """ normalize angle to (-pi, pi] """
    theta = np.mod(np.asarray(theta, dtype=float) + np.pi, 2 * np.pi) - np.pi
    theta = np.where(theta == -np.pi, np.pi, theta)
    return float(theta) if theta.ndim == 0 else theta


@dataclass(frozen=True)
class Pose2D:
    """ rear axle centre and heading """
    x: float
    y: float
    theta: float

    def __post_init__(self):
        object.__setattr__(self, "theta", wrap_angle(self.theta))

    @property
    def position(self):
        return np.array([self.x, self.y])

    def shifted(self, dx, dy):
        return Pose2D(self.x + dx, self.y + dy, self.theta)


@dataclass(frozen=True)
class ConvexRegion:
    """ intersection of half planes a*x + b*y + c <= 0 with unit (a, b)

    vertices: counter clockwise polygon. derived from the edges when not given
    """
    edges: Tuple[Tuple[float, float, float], ...]
    vertices: Tuple[Tuple[float, float], ...] = field(default=())

    def __post_init__(self):
        if len(self.edges) < 3:
            raise ValueError(f"region needs at least 3 edges not {len(self.edges)}")
        normals = np.asarray(self.edges, dtype=float)[:, :2]
        if not np.allclose(np.linalg.norm(normals, axis=1), 1.0):
            raise ValueError("region edges need unit normals")
        if not self.vertices:
            object.__setattr__(self, "vertices", _vertices_from_edges(self.array))

    @classmethod
    def from_vertices(cls, vertices):
        """ build from a convex polygon. any orientation """
        v = np.asarray(vertices, dtype=float)
        if len(v) < 3:
            raise ValueError("region needs at least 3 vertices")
        # make counter clockwise
        area = 0.5 * np.sum(v[:, 0] * np.roll(v[:, 1], -1) - np.roll(v[:, 0], -1) * v[:, 1])
        if area == 0:
            raise ValueError("degenerate region")
        if area < 0:
            v = v[::-1]
        edges = []
        for p, q in zip(v, np.roll(v, -1, axis=0)):
            d = q - p
            n = np.array([d[1], -d[0]]) / np.linalg.norm(d)
            edges.append((float(n[0]), float(n[1]), float(-n @ p)))
        return cls(edges=tuple(edges), vertices=tuple(map(tuple, v.tolist())))

    @property
    def array(self):
        """ edges as [L, 3] array """
        return np.asarray(self.edges, dtype=float)

    @property
    def polygon(self):
        return np.asarray(self.vertices, dtype=float)

    def contains(self, points, margin=0.0):
        """ return bool per point. closed region grown by margin """
        points = np.atleast_2d(points)
        e = self.array
        values = points @ e[:, :2].T + e[:, 2]
        return np.all(values <= margin, axis=1)

    def shifted(self, dx, dy):
        return ConvexRegion.from_vertices(self.polygon + [dx, dy])

    def shapely(self):
        return Polygon(self.vertices)


def _vertices_from_edges(edges, tol=1e-9):
    """ counter clockwise corners of a bounded intersection of half planes [L, 3] """
    points = []
    for i in range(len(edges)):
        for j in range(i + 1, len(edges)):
            A = edges[[i, j], :2]
            if abs(np.linalg.det(A)) < tol:
                continue
            points.append(np.linalg.solve(A, -edges[[i, j], 2]))
    points = np.array(points).reshape(-1, 2)
    if len(points):
        points = points[np.all(points @ edges[:, :2].T + edges[:, 2] <= 1e-7, axis=1)]
        points = np.unique(np.round(points, 9), axis=0)
    if len(points) < 3:
        raise ValueError("edges do not bound a region with area")
    centre = points.mean(axis=0)
    order = np.argsort(np.arctan2(points[:, 1] - centre[1], points[:, 0] - centre[0]))
    points = points[order]
    # drop corners on a straight run
    prev, nxt = np.roll(points, 1, axis=0), np.roll(points, -1, axis=0)
    turn = ((points - prev)[:, 0] * (nxt - points)[:, 1]
            - (points - prev)[:, 1] * (nxt - points)[:, 0])
    points = points[np.abs(turn) > tol]
    if len(points) < 3:
        raise ValueError("edges do not bound a region with area")
    return tuple(map(tuple, points.tolist()))


##### vehicle outline ##########################################################

def body_offsets(vehicle):
    """ feature point offsets in the body frame [6, 2]

    front right, front left, rear left, rear right, left middle, right middle
    """
    l1, l2, w = vehicle.l1, vehicle.l2, vehicle.l3 / 2
    mid = (l2 - l1) / 2
    return np.array([[l2, -w], [l2, w], [-l1, w], [-l1, -w], [mid, w], [mid, -w]])


def feature_points(pose, vehicle):
    """ return the 6 feature points [6, 2] in the world frame """
    c, s = np.cos(pose.theta), np.sin(pose.theta)
    rot = np.array([[c, -s], [s, c]])
    return pose.position + body_offsets(vehicle) @ rot.T


def footprint(pose, vehicle):
    """ return the 4 body corners [4, 2] counter clockwise """
    return feature_points(pose, vehicle)[:4]


def footprint_polygon(pose, vehicle):
    return Polygon(footprint(pose, vehicle))


##### collision ################################################################

def _axes(vertices):
    edges = np.roll(vertices, -1, axis=0) - vertices
    axes = np.stack([edges[:, 1], -edges[:, 0]], axis=1)
    return axes / np.linalg.norm(axes, axis=1, keepdims=True)


def polygons_overlap(vertices_a, vertices_b, clearance=0.0):
    """ separating axis test for two convex polygons [n, 2], [m, 2]

    Returns True when the closed polygons share at least one point, or when no
    polygon edge separates them by more than clearance
    """
    tol = CONTACT_TOL + clearance
    for axis in np.concatenate([_axes(vertices_a), _axes(vertices_b)]):
        pa = vertices_a @ axis
        pb = vertices_b @ axis
        if pa.min() > pb.max() + tol or pb.min() > pa.max() + tol:
            return False
    return True


def collision_free(pose, regions: List[ConvexRegion], vehicle):
    """ True if the exact footprint is disjoint from every region """
    body = footprint(pose, vehicle)
    return not any(polygons_overlap(body, r.polygon) for r in regions)
