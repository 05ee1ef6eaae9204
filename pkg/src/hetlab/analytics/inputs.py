"""Representative input generation for output comparison.

The data is assumed to occupy a low-dimensional PCA subspace.  Sampling is
stratified there: equal-frequency bins over the first few principal
coordinates define strata, samples are allocated proportionally to stratum
occupancy, drawn uniformly inside each stratum's bounding box, projected back
to the full space, and finally clipped into the per-dimension legal ranges.
"""

from __future__ import annotations

import warnings

import numpy as np
from sklearn.base import BaseEstimator

from ..data import Manifest
from ..errors import InputError

VARIANCE_TARGET = 0.85
MAX_SUBSPACE_DIMS = 8
DEFAULT_STRATA_PER_DIM = 4
MAX_STRATIFIED_AXES = 3


def pca_basis(records: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Mean, principal axes (rows), and explained variances via SVD."""
    X = np.asarray(records, dtype=np.float64)
    mean = X.mean(axis=0)
    _, s, vt = np.linalg.svd(X - mean, full_matrices=False)
    denom = max(X.shape[0] - 1, 1)
    return mean, vt, (s ** 2) / denom


def choose_subspace_dims(variances: np.ndarray) -> int:
    """Smallest rank explaining the variance target, capped."""
    total = variances.sum()
    if total <= 0:
        return 1
    cumulative = np.cumsum(variances) / total
    q = int(np.searchsorted(cumulative, VARIANCE_TARGET) + 1)
    return min(max(q, 1), MAX_SUBSPACE_DIMS, len(variances))


def _allocate(counts: np.ndarray, total: int, floor_one: bool) -> np.ndarray:
    """Largest-remainder proportional allocation; optional one-per-stratum floor."""
    weights = counts / counts.sum()
    if floor_one:
        alloc = np.ones_like(counts, dtype=np.int64)
        remaining = total - len(counts)
        quota = weights * remaining
    else:
        alloc = np.zeros_like(counts, dtype=np.int64)
        quota = weights * total
    alloc = alloc + np.floor(quota).astype(np.int64)
    leftover = total - int(alloc.sum())
    if leftover > 0:
        remainder = quota - np.floor(quota)
        order = np.lexsort((np.arange(len(counts)), -remainder))
        alloc[order[:leftover]] += 1
    return alloc


class SubspaceSampler(BaseEstimator):
    """Stratified sampler over the occupied PCA subspace of a dataset."""

    def __init__(self, subspace_dims: int | None = None,
                 strata_per_dim: int = DEFAULT_STRATA_PER_DIM, seed: int = 0):
        self.subspace_dims = subspace_dims
        self.strata_per_dim = strata_per_dim
        self.seed = seed

    def fit(self, records: np.ndarray) -> "SubspaceSampler":
        X = np.asarray(records, dtype=np.float64)
        if X.ndim != 2 or X.shape[0] < 1:
            raise InputError("records must form an n x D matrix")
        mean, axes, variances = pca_basis(X)
        q = self.subspace_dims or choose_subspace_dims(variances)
        if not (1 <= q <= min(X.shape)):
            raise InputError(f"subspace dimension {q} out of range for {X.shape} data")
        if self.strata_per_dim < 1:
            raise InputError("need at least one stratum per axis")
        self.mean_ = mean
        self.components_ = axes[:q]
        self.coords_ = (X - mean) @ self.components_.T
        return self

    def _strata(self) -> dict[tuple[int, ...], np.ndarray]:
        """Stratum key -> member row indices; equal-frequency bins per axis."""
        coords = self.coords_
        b = self.strata_per_dim
        axes = min(coords.shape[1], MAX_STRATIFIED_AXES)
        if b == 1 or axes == 0:
            return {(): np.arange(coords.shape[0])}
        keys = np.zeros((coords.shape[0], axes), dtype=np.int64)
        for a in range(axes):
            edges = np.quantile(coords[:, a], np.linspace(0, 1, b + 1)[1:-1])
            keys[:, a] = np.searchsorted(edges, coords[:, a], side="right")
        strata: dict[tuple[int, ...], list[int]] = {}
        for i, key in enumerate(map(tuple, keys)):
            strata.setdefault(key, []).append(i)
        return {k: np.asarray(v) for k, v in sorted(strata.items())}

    def sample_subspace(self, sample_count: int) -> np.ndarray:
        """Low-dimensional samples before back-projection, (S, q)."""
        if sample_count < 1:
            raise InputError("sample count must be at least 1")
        strata = self._strata()
        counts = np.asarray([len(v) for v in strata.values()], dtype=np.int64)
        if sample_count < len(strata):
            warnings.warn(f"{sample_count} samples cannot cover all {len(strata)} "
                          "occupied strata; dropping the one-per-stratum floor",
                          stacklevel=2)
            alloc = _allocate(counts, sample_count, floor_one=False)
        else:
            alloc = _allocate(counts, sample_count, floor_one=True)
        rng = np.random.default_rng(self.seed)
        chunks = []
        for (key, members), take in zip(strata.items(), alloc):
            if take == 0:
                continue
            box = self.coords_[members]
            lo, hi = box.min(axis=0), box.max(axis=0)
            chunks.append(rng.uniform(lo, hi, size=(int(take), box.shape[1])))
        return np.concatenate(chunks, axis=0)

    def inverse_transform(self, coords: np.ndarray) -> np.ndarray:
        return coords @ self.components_ + self.mean_

    def sample(self, sample_count: int, manifest: Manifest | None = None) -> np.ndarray:
        """Back-projected samples; clipped into the manifest ranges when given."""
        raw = self.inverse_transform(self.sample_subspace(sample_count))
        if manifest is None:
            return raw
        ranges = manifest.range_array()
        return np.clip(raw, ranges[:, 0], ranges[:, 1])


def generate_inputs(records: np.ndarray, manifest: Manifest, sample_count: int,
                    subspace_dims: int | None = None,
                    strata_per_dim: int = DEFAULT_STRATA_PER_DIM,
                    seed: int = 0) -> np.ndarray:
    """One-call wrapper: fit the sampler and draw clipped inputs."""
    sampler = SubspaceSampler(subspace_dims=subspace_dims,
                              strata_per_dim=strata_per_dim, seed=seed)
    return sampler.fit(records).sample(sample_count, manifest)
