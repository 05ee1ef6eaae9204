import numpy as np

from hetlab.analytics import (average_linkage, convex_hull, density_grid,
                              rank_distance_matrix, summarize_clusters)


def is_convex_position(hull):
    if len(hull) < 3:
        return True
    n = len(hull)
    for i in range(n):
        o, a, b = hull[i], hull[(i + 1) % n], hull[(i + 2) % n]
        cross = (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
        if cross <= 0:
            return False
    return True


class TestConvexHull:
    def test_single_point(self):
        hull = convex_hull(np.array([[1.0, 2.0], [1.0, 2.0]]))
        assert hull.shape == (1, 2)

    def test_collinear_yields_segment(self):
        pts = np.array([[0.0, 0.0], [1.0, 1.0], [2.0, 2.0], [3.0, 3.0]])
        hull = convex_hull(pts)
        assert hull.shape == (2, 2)
        assert np.array_equal(hull[0], [0.0, 0.0]) and np.array_equal(hull[1], [3.0, 3.0])

    def test_square_with_interior_points(self, rng):
        corners = np.array([[0, 0], [0, 1], [1, 0], [1, 1.0]])
        inside = rng.uniform(0.2, 0.8, (50, 2))
        hull = convex_hull(np.vstack([corners, inside]))
        assert len(hull) == 4
        assert is_convex_position(hull)

    def test_random_hulls_convex(self, rng):
        for _ in range(20):
            hull = convex_hull(rng.normal(0, 1, (30, 2)))
            assert is_convex_position(hull)


class TestDensityGrid:
    def test_counts_sum_to_points(self, rng):
        pts = rng.normal(0, 1, (500, 2))
        grid = density_grid(pts, grid=8)
        assert np.asarray(grid["counts"]).sum() == 500

    def test_fixed_extent(self, rng):
        pts = rng.uniform(0, 1, (100, 2))
        grid = density_grid(pts, grid=4, extent=(0.0, 1.0, 0.0, 1.0))
        assert grid["extent"] == [0.0, 1.0, 0.0, 1.0]


class TestSummaries:
    def _setup(self, rng, n=40, m=12):
        records = rng.normal(0, 1, (n, 3))
        ids = np.arange(m)
        dend = average_linkage(rank_distance_matrix(records, ids))
        points = rng.normal(0, 1, (n, 2))
        preds = rng.integers(0, 3, n)
        labels = rng.integers(0, 3, n)
        return dend, ids, points, preds, labels

    def test_full_cut_gives_singleton_point_hulls(self, rng):
        dend, ids, points, preds, labels = self._setup(rng)
        out = summarize_clusters(dend, len(ids), ids, points, preds, labels)
        assert len(out) == len(ids)
        assert all(s.size == 1 and s.hull.shape == (1, 2) for s in out)

    def test_order_size_desc_then_id(self, rng):
        dend, ids, points, preds, labels = self._setup(rng)
        out = summarize_clusters(dend, 4, ids, points, preds, labels)
        keys = [(-s.size, s.cluster_id) for s in out]
        assert keys == sorted(keys)

    def test_members_partition_inconsistent_set(self, rng):
        dend, ids, points, preds, labels = self._setup(rng)
        out = summarize_clusters(dend, 5, ids, points, preds, labels)
        seen = sorted(i for s in out for i in s.members)
        assert seen == list(ids)

    def test_accuracy_matches_direct_count(self, rng):
        dend, ids, points, preds, labels = self._setup(rng)
        for s in summarize_clusters(dend, 3, ids, points, preds, labels):
            members = np.asarray(s.members)
            assert s.accuracy == np.mean(preds[members] == labels[members])

    def test_unlabeled_accuracy_is_none(self, rng):
        dend, ids, points, preds, _ = self._setup(rng)
        out = summarize_clusters(dend, 3, ids, points, preds, labels=None)
        assert all(s.accuracy is None for s in out)

    def test_density_shared_across_glyphs(self, rng):
        dend, ids, points, preds, labels = self._setup(rng)
        out = summarize_clusters(dend, 4, ids, points, preds, labels, grid=6)
        assert all(s.density is out[0].density for s in out)
        assert np.asarray(out[0].density["counts"]).sum() == points.shape[0]
