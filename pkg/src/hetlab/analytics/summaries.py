"""Cluster glyph summaries: size, accuracy, convex hull, shared density grid."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import InputError
from .clustering import Dendrogram

DEFAULT_GRID = 16


def convex_hull(points: np.ndarray) -> np.ndarray:
    """Andrew monotone chain; degenerate inputs yield point or segment hulls."""
    pts = np.unique(np.asarray(points, dtype=np.float64), axis=0)
    if pts.shape[0] == 1:
        return pts
    order = np.lexsort((pts[:, 1], pts[:, 0]))
    pts = pts[order]
    if pts.shape[0] == 2:
        return pts

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower: list[np.ndarray] = []
    for p in pts:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper: list[np.ndarray] = []
    for p in pts[::-1]:
        while len(upper) >= 2 and cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    hull = np.asarray(lower[:-1] + upper[:-1])
    if hull.shape[0] < 3:  # collinear set collapses to its extreme segment
        return np.asarray([pts[0], pts[-1]])
    return hull


def density_grid(points: np.ndarray, grid: int = DEFAULT_GRID,
                 extent: tuple[float, float, float, float] | None = None) -> dict:
    """G x G occupancy counts of 2D points over the given (or own) extent."""
    if grid < 1:
        raise InputError("grid size must be at least 1")
    pts = np.asarray(points, dtype=np.float64)
    if extent is None:
        if pts.shape[0] == 0:
            extent = (0.0, 1.0, 0.0, 1.0)
        else:
            extent = (float(pts[:, 0].min()), float(pts[:, 0].max()),
                      float(pts[:, 1].min()), float(pts[:, 1].max()))
    x0, x1, y0, y1 = extent
    if x0 == x1:
        x1 = x0 + 1.0
    if y0 == y1:
        y1 = y0 + 1.0
    counts, _, _ = np.histogram2d(pts[:, 0], pts[:, 1], bins=grid,
                                  range=((x0, x1), (y0, y1)))
    return {"grid": grid, "extent": [x0, x1, y0, y1],
            "counts": counts.astype(np.int64).tolist()}


@dataclass
class ClusterSummary:
    cluster_id: int
    members: list[int]                # record ids
    size: int
    accuracy: float | None            # federated accuracy on members
    hull: np.ndarray                  # (h, 2) vertices in convex position
    density: dict                     # shared grid of all records

    def to_json(self, include_density: bool = False) -> dict:
        obj = {"id": self.cluster_id, "members": self.members, "size": self.size,
               "accuracy": self.accuracy, "hull": self.hull.tolist()}
        if include_density:
            obj["density"] = self.density
        return obj


def summarize_clusters(dendrogram: Dendrogram, k: int, inconsistent_ids,
                       projected_points: np.ndarray,
                       federated_predictions: np.ndarray,
                       labels: np.ndarray | None,
                       grid: int = DEFAULT_GRID) -> list[ClusterSummary]:
    """Cut the dendrogram and summarize each cluster, largest first.

    ``projected_points`` are the 2D coordinates of *all* records in the
    current projection; the density grid over them is shared by every glyph.
    Equal sizes order by cluster id.
    """
    ids = np.asarray(inconsistent_ids, dtype=np.int64)
    shared_density = density_grid(projected_points, grid)
    summaries: list[ClusterSummary] = []
    for cluster_id, positions in enumerate(dendrogram.cut(k)):
        members = ids[positions]
        if labels is not None:
            accuracy = float(np.mean(federated_predictions[members] == labels[members]))
        else:
            accuracy = None
        summaries.append(ClusterSummary(
            cluster_id=cluster_id,
            members=members.tolist(),
            size=int(len(members)),
            accuracy=accuracy,
            hull=convex_hull(projected_points[members]),
            density=shared_density))
    summaries.sort(key=lambda s: (-s.size, s.cluster_id))
    return summaries
