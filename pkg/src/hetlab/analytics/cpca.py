"""Contrastive PCA: directions enriched in a target set relative to a background.

The projection basis consists of the top eigenvectors of
``cov(target) - alpha * cov(background)``; alpha = 0 degenerates to plain PCA
of the target set.  The contrast parameter can be recommended by a
deterministic grid search maximizing a 2D separation score.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator

from ..errors import InputError

DEFAULT_ALPHA = 10.0
ALPHA_GRID = np.concatenate(([0.0], np.logspace(-3.0, 3.0, 40)))


def _fix_signs(components: np.ndarray) -> np.ndarray:
    """Flip each component so its largest-magnitude entry is positive."""
    out = components.copy()
    for row in out:
        pivot = np.argmax(np.abs(row))
        if row[pivot] < 0:
            row *= -1.0
    return out


@dataclass
class Projection2D:
    points: np.ndarray                # (n, 2)
    basis: np.ndarray                 # (2, D), orthonormal rows
    method: str                       # "pca" | "rpca" | "cpca"
    alpha: float | None = None

    def __post_init__(self):
        gram = self.basis @ self.basis.T
        if not np.allclose(gram, np.eye(self.basis.shape[0]), atol=1e-8):
            raise InputError("projection basis must be orthonormal")

    def to_json(self) -> dict:
        obj = {"points": self.points.tolist(), "basis": self.basis.tolist(),
               "method": self.method}
        if self.alpha is not None:
            obj["alpha"] = float(self.alpha)
        return obj


class ContrastivePCA(BaseEstimator):
    """Top-``n_components`` eigenvectors of cov(target) - alpha * cov(background)."""

    def __init__(self, n_components: int = 2, alpha: float = DEFAULT_ALPHA):
        self.n_components = n_components
        self.alpha = alpha

    def fit(self, target: np.ndarray, background: np.ndarray) -> "ContrastivePCA":
        if self.alpha < 0:
            raise InputError("contrast parameter must be non-negative")
        target = np.asarray(target, dtype=np.float64)
        background = np.asarray(background, dtype=np.float64)
        if target.shape[0] < 2 or background.shape[0] < 2:
            raise InputError("target and background each need at least two rows")
        if target.shape[1] != background.shape[1]:
            raise InputError("target and background dimensionality differs")
        c_t = np.cov(target, rowvar=False)
        c_b = np.cov(background, rowvar=False)
        diff = c_t - self.alpha * c_b
        diff = (diff + diff.T) / 2.0
        eigvals, eigvecs = np.linalg.eigh(diff)
        order = np.argsort(eigvals)[::-1][:self.n_components]
        self.components_ = _fix_signs(eigvecs[:, order].T)
        self.eigenvalues_ = eigvals[order]
        self.mean_ = target.mean(axis=0)
        return self

    def transform(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        return (X - self.mean_) @ self.components_.T

    def fit_transform(self, target: np.ndarray, background: np.ndarray,
                      X: np.ndarray | None = None) -> np.ndarray:
        self.fit(target, background)
        return self.transform(target if X is None else X)


def ccpca_project(target_ids, background_ids, records: np.ndarray,
                  alpha: float = DEFAULT_ALPHA) -> Projection2D:
    """Project every record onto the top-2 contrastive directions.

    All records are centered on the target mean before projection, so the
    target set sits around the origin.
    """
    records = np.asarray(records, dtype=np.float64)
    target_ids = np.asarray(target_ids, dtype=np.int64)
    background_ids = np.asarray(background_ids, dtype=np.int64)
    model = ContrastivePCA(n_components=2, alpha=alpha)
    model.fit(records[target_ids], records[background_ids])
    return Projection2D(points=model.transform(records), basis=model.components_,
                        method="cpca", alpha=float(alpha))


def separation_score(points_target: np.ndarray, points_background: np.ndarray) -> float:
    """Between-centroid distance squared over mean within-set 2D variance."""
    mean_t = points_target.mean(axis=0)
    mean_b = points_background.mean(axis=0)
    var_t = float(np.mean(np.sum((points_target - mean_t) ** 2, axis=1)))
    var_b = float(np.mean(np.sum((points_background - mean_b) ** 2, axis=1)))
    within = (var_t + var_b) / 2.0
    if within == 0.0:
        return float("-inf")
    return float(np.sum((mean_t - mean_b) ** 2)) / within


def recommend_alpha(target_ids, background_ids, records: np.ndarray) -> float:
    """Deterministic grid search for the contrast parameter.

    Evaluates {0} plus 40 log-spaced values in [1e-3, 1e3]; ties keep the
    earliest (smallest) grid point.
    """
    records = np.asarray(records, dtype=np.float64)
    target_ids = np.asarray(target_ids, dtype=np.int64)
    background_ids = np.asarray(background_ids, dtype=np.int64)
    if len(target_ids) == 0 or len(background_ids) == 0:
        raise InputError("target and background sets must be non-empty")
    best_alpha, best_score = float(ALPHA_GRID[0]), float("-inf")
    for alpha in ALPHA_GRID:
        try:
            proj = ccpca_project(target_ids, background_ids, records, alpha=float(alpha))
        except InputError:
            continue
        score = separation_score(proj.points[target_ids], proj.points[background_ids])
        if score > best_score:
            best_alpha, best_score = float(alpha), score
    return best_alpha


def dimension_weights(projection: Projection2D) -> np.ndarray:
    """Per-dimension |loading| of the first two contrastive components, (2, D)."""
    if projection.method != "cpca":
        raise InputError("dimension weights are defined for contrastive projections")
    return np.abs(projection.basis)
