import numpy as np
import pytest

from hetlab.analytics import SubspaceSampler, choose_subspace_dims, generate_inputs
from hetlab.data import Manifest
from hetlab.errors import InputError


def flat_manifest(dim, lo=0.0, hi=255.0):
    return Manifest(shape=(dim,), ranges=tuple((lo, hi) for _ in range(dim)))


def test_outputs_respect_ranges(rng):
    X = rng.uniform(0, 255, (200, 12))
    out = generate_inputs(X, flat_manifest(12), 500, seed=3)
    assert out.shape == (500, 12)
    assert out.min() >= 0.0 and out.max() <= 255.0


def test_rank2_plane_recovered_before_clipping(rng):
    basis = np.linalg.qr(rng.normal(0, 1, (10, 2)))[0].T
    X = 5.0 + rng.normal(0, 2, (150, 2)) @ basis
    sampler = SubspaceSampler(subspace_dims=2, seed=1).fit(X)
    raw = sampler.sample(400, manifest=None)
    centered = raw - X.mean(axis=0)
    residual = centered - (centered @ basis.T) @ basis
    assert np.abs(residual).max() <= 1e-6


def test_single_stratum_is_uniform_box(rng):
    X = rng.uniform(-1, 1, (100, 3))
    sampler = SubspaceSampler(subspace_dims=2, strata_per_dim=1, seed=5).fit(X)
    coords = sampler.sample_subspace(2000)
    lo, hi = sampler.coords_.min(axis=0), sampler.coords_.max(axis=0)
    assert np.all(coords >= lo - 1e-12) and np.all(coords <= hi + 1e-12)
    # roughly uniform: each quartile of the box holds ~25%
    for axis in range(2):
        edges = np.linspace(lo[axis], hi[axis], 5)
        counts, _ = np.histogram(coords[:, axis], bins=edges)
        assert np.all(np.abs(counts / 2000 - 0.25) < 0.08)


def test_undersampling_warns_and_drops_floor(rng):
    X = rng.normal(0, 1, (300, 5))
    sampler = SubspaceSampler(subspace_dims=3, strata_per_dim=4, seed=2).fit(X)
    with pytest.warns(UserWarning, match="strata"):
        out = sampler.sample_subspace(5)
    assert out.shape[0] == 5


def test_sample_count_exact(rng):
    import warnings

    X = rng.normal(0, 1, (120, 4))
    for count in (1, 7, 120, 333):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", UserWarning)  # undersampling path
            out = generate_inputs(X, flat_manifest(4, -10, 10), count, seed=9)
        assert out.shape[0] == count


def test_choose_subspace_dims_caps():
    variances = np.array([100.0, 1.0, 0.5, 0.1])
    assert choose_subspace_dims(variances) == 1
    assert choose_subspace_dims(np.ones(20)) == 8  # capped


def test_bad_sample_count(rng):
    X = rng.normal(0, 1, (10, 3))
    with pytest.raises(InputError):
        generate_inputs(X, flat_manifest(3, -10, 10), 0, seed=0)


def test_deterministic(rng):
    X = rng.uniform(0, 1, (80, 6))
    a = generate_inputs(X, flat_manifest(6, 0, 1), 50, seed=4)
    b = generate_inputs(X, flat_manifest(6, 0, 1), 50, seed=4)
    assert np.array_equal(a, b)
