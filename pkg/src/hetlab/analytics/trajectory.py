"""Parameter-exchange trajectory: randomized 2D projection plus angle cosines.

Federated parameters and the client's local updates over a round window are
stacked as rows, centered, and projected onto a top-2 basis found by a
randomized range finder (Gaussian test matrix, oversampling, power
iterations) followed by an exact SVD of the small sketch.  Per-round
disagreement is the cosine between the local step and the federated step,
computed in the original parameter space so projection distortion cannot
mislead.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import InputError
from ..federation import RoundSnapshot

OVERSAMPLING = 10
POWER_ITERATIONS = 2


def randomized_top_basis(X: np.ndarray, k: int = 2, oversampling: int = OVERSAMPLING,
                         power_iterations: int = POWER_ITERATIONS, seed: int = 0) -> np.ndarray:
    """Top-k right-singular directions of X via the randomized range finder."""
    X = np.asarray(X, dtype=np.float64)
    n, d = X.shape
    sketch = min(k + oversampling, n, d)
    rng = np.random.default_rng(seed)
    omega = rng.standard_normal((d, sketch))
    Y = X @ omega
    for _ in range(power_iterations):
        Y, _ = np.linalg.qr(Y)
        Y = X @ (X.T @ Y)
    Q, _ = np.linalg.qr(Y)
    _, _, vt = np.linalg.svd(Q.T @ X, full_matrices=False)
    basis = vt[:k]
    if basis.shape[0] < k:  # degenerate: pad with arbitrary orthonormal completions
        pad = np.zeros((k - basis.shape[0], d))
        for r, row in enumerate(pad):
            row[(basis.shape[0] + r) % d] = 1.0
        basis = np.vstack([basis, pad])
        basis, _ = np.linalg.qr(basis.T)
        basis = basis.T[:k]
    return _fix_signs(basis)


def _fix_signs(basis: np.ndarray) -> np.ndarray:
    out = basis.copy()
    for row in out:
        pivot = np.argmax(np.abs(row))
        if row[pivot] < 0:
            row *= -1.0
    return out


def _cosine(u: np.ndarray, v: np.ndarray) -> float | None:
    nu, nv = np.linalg.norm(u), np.linalg.norm(v)
    if nu == 0.0 or nv == 0.0:
        return None
    return float(np.dot(u, v) / (nu * nv))


@dataclass
class ParamTrajectory:
    rounds: list[int]
    federated_points: np.ndarray       # (R, 2)
    local_points: np.ndarray           # (R, 2)
    cosines: list[float | None]        # per round; None where undefined
    layer: str
    basis: np.ndarray                  # (2, D_restricted)

    def to_json(self) -> dict:
        return {"rounds": self.rounds,
                "federated": self.federated_points.tolist(),
                "local": self.local_points.tolist(),
                "cosines": self.cosines,
                "layer": self.layer,
                "basis": self.basis.tolist()}


def project_parameters(snapshots: list[RoundSnapshot], start: int, end: int,
                       layer: str = "all", oversampling: int = OVERSAMPLING,
                       power_iterations: int = POWER_ITERATIONS,
                       seed: int = 0) -> ParamTrajectory:
    """Project the [start, end] window of a run; snapshot list covers rounds 1..R."""
    if not snapshots:
        raise InputError("no snapshots to project")
    by_round = {s.round_index: s for s in snapshots}
    last = max(by_round)
    if not (1 <= start <= end <= last):
        raise InputError(f"round window [{start}, {end}] outside recorded rounds [1, {last}]")
    window = [by_round[i] for i in range(start, end + 1)]
    sel = window[0].federated.selector_slice(layer)
    fed = np.stack([s.federated.values[sel] for s in window])
    loc = np.stack([s.local_update.values[sel] for s in window])
    stacked = np.vstack([fed, loc])
    center = stacked.mean(axis=0)
    basis = randomized_top_basis(stacked - center, k=2, oversampling=oversampling,
                                 power_iterations=power_iterations, seed=seed)
    cosines: list[float | None] = []
    for s in window:
        i = s.round_index
        if i - 1 not in by_round:
            cosines.append(None)  # round 1: no previous federated state
            continue
        prev = by_round[i - 1].federated.values[sel]
        cosines.append(_cosine(s.local_update.values[sel] - prev,
                               s.federated.values[sel] - prev))
    return ParamTrajectory(rounds=[s.round_index for s in window],
                           federated_points=(fed - center) @ basis.T,
                           local_points=(loc - center) @ basis.T,
                           cosines=cosines, layer=layer, basis=basis)


def round_metrics(snapshots: list[RoundSnapshot]) -> dict[str, list]:
    """The three performance series, one value per recorded round."""
    ordered = sorted(snapshots, key=lambda s: s.round_index)
    return {"rounds": [s.round_index for s in ordered],
            "train_loss": [s.metrics["train_loss"] for s in ordered],
            "test_acc": [s.metrics["test_acc"] for s in ordered],
            "total_acc": [s.metrics["total_acc"] for s in ordered]}
