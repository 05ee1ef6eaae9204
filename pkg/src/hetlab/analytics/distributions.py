"""Per-dimension percentage distributions for the three record populations."""

from __future__ import annotations

import numpy as np

from ..data import Manifest
from ..errors import InputError


def _percent_histogram(values: np.ndarray, bins: int, lo: float, hi: float) -> dict:
    if len(values) == 0:
        return {"empty": True, "percentages": []}
    if lo == hi:
        hi = lo + 1.0  # degenerate range: one bin catches everything
    counts, _ = np.histogram(values, bins=bins, range=(lo, hi))
    return {"empty": False, "percentages": (counts / len(values) * 100.0).tolist()}


def dimension_distribution(records: np.ndarray, inconsistent_ids, manifest: Manifest,
                           dim: int, bins: int = 20, scale: str = "linear",
                           cluster_ids=None) -> dict:
    """Histograms of one dimension for overall / inconsistent / consistent records.

    Each histogram is normalized to percentages of its own population; when a
    cluster is given, all three populations are restricted to its members.
    The scale tag is carried through for the presentation layer.
    """
    records = np.asarray(records, dtype=np.float64)
    n, d_total = records.shape
    if not (0 <= dim < d_total):
        raise InputError(f"dimension {dim} out of range for {d_total}-dimensional records")
    if bins < 1:
        raise InputError("need at least one histogram bin")
    if scale not in ("linear", "log"):
        raise InputError(f"unknown scale {scale!r}")
    inconsistent = np.zeros(n, dtype=bool)
    inconsistent[np.asarray(inconsistent_ids, dtype=np.int64)] = True
    scope = np.ones(n, dtype=bool)
    if cluster_ids is not None:
        scope = np.zeros(n, dtype=bool)
        scope[np.asarray(cluster_ids, dtype=np.int64)] = True
    lo, hi = manifest.ranges[dim]
    column = records[:, dim]
    return {"dim": dim, "bins": bins, "lo": float(lo), "hi": float(hi), "scale": scale,
            "overall": _percent_histogram(column[scope], bins, lo, hi),
            "inconsistent": _percent_histogram(column[scope & inconsistent], bins, lo, hi),
            "consistent": _percent_histogram(column[scope & ~inconsistent], bins, lo, hi)}
