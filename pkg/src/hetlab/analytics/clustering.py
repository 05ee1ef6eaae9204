"""Agglomerative average-linkage clustering with exact, reproducible tie rules.

The merge loop keeps cross-cluster distance *sums* instead of averages: with
the integer-valued rank-product distances those sums stay exactly
representable, so merge decisions (and the tie rule: smallest cluster-id pair
first) are bit-reproducible and match a naive re-computation oracle.

Follows the scipy id convention: leaves are 0..m-1, the cluster created by
merge t gets id m+t.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import InputError


@dataclass(frozen=True)
class Merge:
    cluster_a: int
    cluster_b: int
    height: float
    size: int


@dataclass
class Dendrogram:
    """Full merge history; cuttable at any cluster count."""

    merges: tuple[Merge, ...]
    leaf_count: int

    def __post_init__(self):
        if len(self.merges) != self.leaf_count - 1:
            raise InputError("a dendrogram over m leaves has exactly m-1 merges")

    def cut(self, k: int) -> list[list[int]]:
        """Partition the leaves into k clusters, each a sorted member list.

        Clusters are ordered by their smallest member, which also defines the
        cluster id (the list index).
        """
        if not (1 <= k <= self.leaf_count):
            raise InputError(f"cannot cut {self.leaf_count} leaves into {k} clusters")
        members: dict[int, list[int]] = {i: [i] for i in range(self.leaf_count)}
        for t in range(self.leaf_count - k):
            merge = self.merges[t]
            joined = members.pop(merge.cluster_a) + members.pop(merge.cluster_b)
            members[self.leaf_count + t] = joined
        clusters = [sorted(v) for v in members.values()]
        clusters.sort(key=lambda c: c[0])
        return clusters

    def merge_pair_sizes(self) -> list[tuple[int, int]]:
        """Sizes of the two clusters joined at each merge, in merge order."""
        sizes = {i: 1 for i in range(self.leaf_count)}
        out = []
        for t, merge in enumerate(self.merges):
            sa, sb = sizes.pop(merge.cluster_a), sizes.pop(merge.cluster_b)
            out.append((sa, sb))
            sizes[self.leaf_count + t] = sa + sb
        return out

    def to_json(self) -> dict:
        return {"leaf_count": self.leaf_count,
                "merges": [[m.cluster_a, m.cluster_b, m.height, m.size] for m in self.merges]}

    @staticmethod
    def from_json(obj: dict) -> "Dendrogram":
        merges = tuple(Merge(int(a), int(b), float(h), int(s))
                       for a, b, h, s in obj["merges"])
        return Dendrogram(merges=merges, leaf_count=int(obj["leaf_count"]))


def _check_matrix(matrix: np.ndarray) -> np.ndarray:
    D = np.asarray(matrix, dtype=np.float64)
    if D.ndim != 2 or D.shape[0] != D.shape[1]:
        raise InputError("distance matrix must be square")
    if D.shape[0] < 2:
        raise InputError("need at least two points to cluster")
    if not np.allclose(D, D.T):
        raise InputError("distance matrix must be symmetric")
    if np.any(np.diag(D) != 0):
        raise InputError("distance matrix must have a zero diagonal")
    return D


def average_linkage(matrix: np.ndarray) -> Dendrogram:
    """Agglomerate with average linkage; ties pick the smallest (id_a, id_b) pair."""
    D = _check_matrix(matrix)
    m = D.shape[0]
    # cross-cluster distance sums; averages are sums / (size_a * size_b)
    S = D.copy()
    sizes = np.ones(m, dtype=np.int64)
    ids = np.arange(m, dtype=np.int64)
    merges: list[Merge] = []
    for t in range(m - 1):
        k = S.shape[0]
        avg = S / np.outer(sizes, sizes)
        iu = np.triu_indices(k, 1)
        flat = avg[iu]
        best = flat.min()
        cand = np.nonzero(flat == best)[0]
        # resolve ties on the (smaller id, larger id) pair
        pairs = sorted((int(min(ids[iu[0][c]], ids[iu[1][c]])),
                        int(max(ids[iu[0][c]], ids[iu[1][c]])), c) for c in cand)
        a_id, b_id, c = pairs[0]
        i, j = int(iu[0][c]), int(iu[1][c])
        merges.append(Merge(a_id, b_id, float(avg[i, j]), int(sizes[i] + sizes[j])))
        # fold j into i, then drop j
        S[i, :] += S[j, :]
        S[:, i] = S[i, :]
        sizes[i] += sizes[j]
        ids[i] = m + t
        keep = np.ones(k, dtype=bool)
        keep[j] = False
        S = S[np.ix_(keep, keep)]
        np.fill_diagonal(S, 0.0)
        sizes = sizes[keep]
        ids = ids[keep]
    return Dendrogram(merges=tuple(merges), leaf_count=m)


def cluster_inconsistent(rank_matrix: np.ndarray) -> Dendrogram:
    """Hierarchical clustering of inconsistent records under the rank distance."""
    return average_linkage(rank_matrix)


def within_cluster_mean(dendrogram: Dendrogram, k: int) -> float:
    """Mean distance over all within-cluster pairs at cut(k).

    Every within-cluster pair is accounted for by exactly one merge (at that
    merge's average height), so the pooled mean follows from the merge list
    alone; k = leaf_count (all singletons) gives 0, k = 1 the whole-set mean.
    """
    applied = dendrogram.leaf_count - k
    pair_sum = 0.0
    pair_count = 0
    for merge, (sa, sb) in zip(dendrogram.merges[:applied],
                               dendrogram.merge_pair_sizes()[:applied]):
        pair_sum += merge.height * sa * sb
        pair_count += sa * sb
    return pair_sum / pair_count if pair_count else 0.0


def recommend_cluster_count(dendrogram: Dendrogram, k_max: int) -> int:
    """Maximum-difference elbow over the within-cluster mean distance profile.

    Rank-product distances are multiplicative, so the difference is taken on
    the log of the profile (the largest relative drop); the raw-difference
    variant systematically favors the first split.  Returns the k in
    [2, k_max] with the largest drop value(k-1) - value(k) on that scale;
    ties resolve to the smallest k.
    """
    m = dendrogram.leaf_count
    if m < 3:
        return m
    if not (2 <= k_max <= m):
        raise InputError(f"k_max must lie in [2, {m}]")
    # within-cluster means are >= 1 for any cut with a surviving pair (the
    # rank-product floor); the all-singleton cut is floored to that value
    values = {k: max(within_cluster_mean(dendrogram, k), 1.0)
              for k in range(1, k_max + 1)}
    best_k, best_drop = 2, -np.inf
    for k in range(2, k_max + 1):
        drop = np.log(values[k - 1]) - np.log(values[k])
        if drop > best_drop:
            best_k, best_drop = k, drop
    return best_k
