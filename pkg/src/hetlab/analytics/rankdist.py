"""Context-aware rank-based distance between inconsistent records.

For inconsistent records j and k the distance is the product of their mutual
neighbor ranks, taken over the full record set: if k is the r-th closest
record to j among all n records (self excluded, distance ties broken by the
smaller record index), and j is the r'-th closest to k, then the distance is
r * r'.  Consistent records between a pair push both ranks up, so pairs with
little consistent context aggregate first even when they are far apart in
Euclidean terms.
"""

from __future__ import annotations

import numpy as np

from ..errors import InputError


def pairwise_distances_to_all(records: np.ndarray, ids: np.ndarray) -> np.ndarray:
    """Euclidean distances from each selected record to every record, (m, n)."""
    X = np.asarray(records, dtype=np.float64)
    sel = X[ids]
    sq = (sel[:, None, :] - X[None, :, :]) ** 2
    return np.sqrt(sq.sum(axis=-1))


def neighbor_ranks(records: np.ndarray, ids: np.ndarray) -> np.ndarray:
    """1-based neighbor rank of every record as seen from each selected record.

    ``ranks[j_pos, i]`` is the rank of record ``i`` in the ascending distance
    order around ``ids[j_pos]``, computed over all records except the anchor
    itself.  The anchor's own cell is set to 0.
    """
    X = np.asarray(records, dtype=np.float64)
    n = X.shape[0]
    dists = pairwise_distances_to_all(X, ids)
    ranks = np.zeros((len(ids), n), dtype=np.int64)
    index_row = np.arange(n)
    for pos, j in enumerate(ids):
        row = dists[pos].copy()
        row[j] = np.inf  # exclude self; ordering is over i != j
        order = np.lexsort((index_row, row))
        ranks[pos, order] = index_row + 1
        ranks[pos, j] = 0
    return ranks


def rank_distance_matrix(records: np.ndarray, inconsistent_ids) -> np.ndarray:
    """The m x m rank-product distance matrix over ``inconsistent_ids``.

    Entries are exact integer products in [1, (n-1)^2]; the diagonal is 0.
    """
    ids = np.asarray(inconsistent_ids, dtype=np.int64)
    if ids.ndim != 1 or len(ids) < 2:
        raise InputError("need at least two inconsistent records")
    if len(np.unique(ids)) != len(ids):
        raise InputError("duplicate record ids in the inconsistent set")
    X = np.asarray(records, dtype=np.float64)
    if ids.min() < 0 or ids.max() >= X.shape[0]:
        raise InputError("inconsistent id out of range")
    ranks = neighbor_ranks(X, ids)
    mutual = ranks[:, ids]           # mutual[j_pos, k_pos] = r_j(k)
    matrix = mutual * mutual.T
    np.fill_diagonal(matrix, 0)
    return matrix
