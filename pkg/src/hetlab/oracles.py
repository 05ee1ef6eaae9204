"""Brute-force reference implementations for cross-validation.

These deliberately avoid the vectorized code paths: ranks come from explicit
sorts, the dendrogram re-averages every cross-cluster pair from scratch each
step, PCA goes through a plain SVD, and gradients through central finite
differences.  They ship with the package (not test-only) so the acceptance
checks can run identically in CI and at user sites via ``hetlab oracle``.
"""

from __future__ import annotations

import math

import numpy as np

from .analytics.clustering import Dendrogram, Merge
from .models import ModelSpec, ParamVector, build_network


def rank_matrix_bruteforce(records: np.ndarray, inconsistent_ids) -> np.ndarray:
    X = np.asarray(records, dtype=np.float64)
    ids = [int(i) for i in inconsistent_ids]
    n = X.shape[0]
    m = len(ids)

    def rank_of(j: int, k: int) -> int:
        entries = []
        for i in range(n):
            if i == j:
                continue
            d = math.sqrt(float(((X[j] - X[i]) ** 2).sum()))
            entries.append((d, i))
        entries.sort()
        for pos, (_, i) in enumerate(entries, start=1):
            if i == k:
                return pos
        raise AssertionError("unreachable")

    matrix = np.zeros((m, m), dtype=np.int64)
    for a in range(m):
        for b in range(m):
            if a == b:
                continue
            matrix[a, b] = rank_of(ids[a], ids[b]) * rank_of(ids[b], ids[a])
    return matrix


def dendrogram_bruteforce(matrix: np.ndarray) -> Dendrogram:
    """Naive O(m^3) average-linkage agglomeration with the same tie rule."""
    D = np.asarray(matrix, dtype=np.float64)
    m = D.shape[0]
    clusters: dict[int, list[int]] = {i: [i] for i in range(m)}
    merges: list[Merge] = []
    for t in range(m - 1):
        best = None
        for a in sorted(clusters):
            for b in sorted(clusters):
                if a >= b:
                    continue
                total = 0.0
                for p in clusters[a]:
                    for q in clusters[b]:
                        total += D[p, q]
                avg = total / (len(clusters[a]) * len(clusters[b]))
                key = (avg, a, b)
                if best is None or key < best:
                    best = key
        avg, a, b = best
        joined = clusters.pop(a) + clusters.pop(b)
        clusters[m + t] = joined
        merges.append(Merge(a, b, float(avg), len(joined)))
    return Dendrogram(merges=tuple(merges), leaf_count=m)


def exact_pca_basis(records: np.ndarray, components: int = 2) -> np.ndarray:
    """Top right-singular directions of the centered data by full SVD."""
    X = np.asarray(records, dtype=np.float64)
    centered = X - X.mean(axis=0)
    _, _, vt = np.linalg.svd(centered, full_matrices=False)
    return vt[:components]


def principal_angle_cosines(basis_a: np.ndarray, basis_b: np.ndarray) -> np.ndarray:
    """Cosines of the principal angles between two row-spanned subspaces."""
    qa, _ = np.linalg.qr(np.asarray(basis_a, dtype=np.float64).T)
    qb, _ = np.linalg.qr(np.asarray(basis_b, dtype=np.float64).T)
    return np.linalg.svd(qa.T @ qb, compute_uv=False)


def fedavg_bruteforce(updates: list[tuple[np.ndarray, float]]) -> np.ndarray:
    total = sum(w for _, w in updates)
    acc = np.zeros_like(updates[0][0], dtype=np.float64)
    for values, w in updates:
        acc = acc + (w / total) * values
    return acc


def finite_difference_gradient(spec: ModelSpec, params: ParamVector, records: np.ndarray,
                               labels: np.ndarray, h: float = 1e-4) -> np.ndarray:
    """Central finite differences of the cross-entropy loss over every parameter."""
    net = build_network(spec)
    base = params.values
    grad = np.zeros_like(base)
    for p in range(base.size):
        bumped = base.copy()
        bumped[p] = base[p] + h
        plus = net.loss(params.with_values(bumped), records, labels)
        bumped[p] = base[p] - h
        minus = net.loss(params.with_values(bumped), records, labels)
        grad[p] = (plus - minus) / (2.0 * h)
    return grad


def relative_error(analytic: np.ndarray, reference: np.ndarray, floor: float = 1e-4) -> float:
    """Max elementwise |a - b| / max(|a|, |b|, floor)."""
    denom = np.maximum(np.maximum(np.abs(analytic), np.abs(reference)), floor)
    return float(np.max(np.abs(analytic - reference) / denom))
