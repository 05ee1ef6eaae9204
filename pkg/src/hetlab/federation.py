"""FedAvg training loop: clients, server aggregation, and the stand-alone baseline.

Clients are simulated in one process but the information boundary of the real
protocol is preserved: the snapshots handed to the analysis side carry only
the federated parameters, the analyzed client's own updates, and its own
metrics.  Other clients' raw data never leaves this module.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import Dataset
from .errors import AggregationError, HetlabError, InputError
from .models import ModelSpec, ParamVector, build_network


@dataclass
class ClientConfig:
    client_id: str
    dataset: Dataset
    split_fraction: float = 0.8
    local_epochs: int = 1
    batch_size: int = 32
    learning_rate: float = 0.1
    # (first_round, last_round, labels) overrides for training labels,
    # used by scenario injections with phases; rounds are inclusive.
    label_schedule: tuple[tuple[int, int, np.ndarray], ...] = ()
    # seed-stream tag; defaults to the client's position so streams are
    # independent, but twins can be forced onto one stream
    rng_tag: int | None = None

    def __post_init__(self):
        if not (0.0 < self.split_fraction < 1.0):
            raise InputError(f"split fraction must be in (0, 1), got {self.split_fraction}")
        if self.dataset.labels is None:
            raise InputError(f"client {self.client_id!r} needs a labeled dataset")
        if self.local_epochs < 0:
            raise InputError("local epochs must be non-negative")
        if self.learning_rate <= 0:
            raise InputError("learning rate must be positive")
        n = self.dataset.n
        n_train = int(round(n * self.split_fraction))
        self.train_count = min(max(n_train, 1), max(n - 1, 1))

    @property
    def n_k(self) -> int:
        """FedAvg weight: the client's training-record count."""
        return self.train_count

    def split_indices(self, base_seed: int, client_index: int):
        """Deterministic train/test permutation split."""
        rng = np.random.default_rng(np.random.SeedSequence((base_seed, 0xA11, client_index)))
        perm = rng.permutation(self.dataset.n)
        return perm[:self.train_count], perm[self.train_count:]

    def labels_for_round(self, round_i: int) -> np.ndarray:
        for lo, hi, labels in self.label_schedule:
            if lo <= round_i <= hi:
                return labels
        return self.dataset.labels


@dataclass
class RoundSnapshot:
    round_index: int
    federated: ParamVector
    local_update: ParamVector
    metrics: dict[str, float]

    def __post_init__(self):
        if self.round_index < 1:
            raise InputError("round index starts at 1")
        if not self.federated.same_layout(self.local_update):
            raise InputError("federated and local parameter layouts differ")
        for key, value in self.metrics.items():
            if not np.isfinite(value):
                raise InputError(f"metric {key!r} is not finite")
        for key in ("test_acc", "total_acc"):
            if not (0.0 <= self.metrics[key] <= 1.0):
                raise InputError(f"{key} must lie in [0, 1]")


def train_local(spec: ModelSpec, params: ParamVector, records: np.ndarray,
                labels: np.ndarray, epochs: int, batch_size: int, lr: float,
                seed: int) -> ParamVector:
    """Mini-batch SGD on cross-entropy; shuffling is seeded, so runs repeat exactly."""
    if labels is None:
        raise InputError("training needs labels")
    records = np.asarray(records, dtype=np.float64)
    labels = np.asarray(labels)
    if records.shape[0] == 0:
        raise InputError("empty training set")
    if lr <= 0:
        raise InputError("learning rate must be positive")
    if batch_size < 1:
        raise InputError("batch size must be at least 1")
    net = build_network(spec)
    values = params.values.copy()
    pv = params.with_values(values)
    rng = np.random.default_rng(seed)
    n = records.shape[0]
    for _ in range(epochs):
        perm = rng.permutation(n)
        for start in range(0, n, batch_size):
            idx = perm[start:start + batch_size]
            _, grad = net.loss_and_grad(pv, records[idx], labels[idx])
            values -= lr * grad
    if not np.all(np.isfinite(values)):
        raise HetlabError("training diverged to non-finite parameters")
    return pv


def fed_avg(updates: list[tuple[ParamVector, float]]) -> ParamVector:
    """Sample-count-weighted mean of client updates.

    Computed in deviation form around the first update, so aggregating k
    copies of one vector returns it bit-exactly; the result is clipped to the
    element-wise input envelope to keep the convex-combination bound under
    floating-point rounding.
    """
    if not updates:
        raise AggregationError("need at least one update")
    first, _ = updates[0]
    total = 0.0
    for pv, n_k in updates:
        if n_k <= 0:
            raise AggregationError(f"aggregation weight must be positive, got {n_k}")
        if pv.layout != first.layout:
            for a, b in zip(pv.layout, first.layout):
                if a != b:
                    raise AggregationError(f"layout mismatch at layer {a.name!r}")
            raise AggregationError("layout mismatch: differing tensor counts")
        total += float(n_k)
    acc = np.zeros_like(first.values)
    for pv, n_k in updates:
        acc += (n_k / total) * (pv.values - first.values)
    result = first.values + acc
    lo = np.min([pv.values for pv, _ in updates], axis=0)
    hi = np.max([pv.values for pv, _ in updates], axis=0)
    return first.with_values(np.clip(result, lo, hi))


def _round_seed(base_seed: int, client_index: int, round_i: int) -> int:
    return int(np.random.SeedSequence((base_seed, client_index, round_i)).generate_state(1)[0])


def _client_metrics(spec: ModelSpec, params: ParamVector, client: ClientConfig,
                    train_idx: np.ndarray, test_idx: np.ndarray) -> dict[str, float]:
    net = build_network(spec)
    records, labels = client.dataset.records, client.dataset.labels
    train_loss = net.loss(params, records[train_idx], labels[train_idx])
    total_pred = net.predict(params, records)
    total_acc = float(np.mean(total_pred == labels))
    if len(test_idx):
        test_acc = float(np.mean(net.predict(params, records[test_idx]) == labels[test_idx]))
    else:
        test_acc = total_acc
    return {"train_loss": float(train_loss), "test_acc": test_acc, "total_acc": total_acc}


def run_federation(spec: ModelSpec, clients: list[ClientConfig], rounds: int,
                   analyzed_client: int = 0, base_seed: int = 0,
                   initial: ParamVector | None = None) -> list[RoundSnapshot]:
    """Run R communication rounds (receive, local-train, submit, aggregate, broadcast).

    Returns the analyzed client's view only.
    """
    if rounds < 1:
        raise InputError("need at least one round")
    if not clients:
        raise InputError("need at least one client")
    if not (0 <= analyzed_client < len(clients)):
        raise InputError(f"analyzed client index {analyzed_client} out of range")
    net = build_network(spec)
    params = initial.copy() if initial is not None else net.init_params()
    splits = [c.split_indices(base_seed, k if c.rng_tag is None else c.rng_tag)
              for k, c in enumerate(clients)]
    snapshots: list[RoundSnapshot] = []
    for round_i in range(1, rounds + 1):
        updates: list[tuple[ParamVector, float]] = []
        own_update = None
        for k, client in enumerate(clients):
            train_idx, _ = splits[k]
            labels = client.labels_for_round(round_i)
            tag = k if client.rng_tag is None else client.rng_tag
            try:
                update = train_local(spec, params, client.dataset.records[train_idx],
                                     labels[train_idx], client.local_epochs,
                                     client.batch_size, client.learning_rate,
                                     seed=_round_seed(base_seed, tag, round_i))
            except HetlabError as exc:
                raise HetlabError(f"round {round_i} aborted: client "
                                  f"{client.client_id!r} failed: {exc}") from exc
            updates.append((update, float(client.n_k)))
            if k == analyzed_client:
                own_update = update
        params = fed_avg(updates)
        metrics = _client_metrics(spec, params, clients[analyzed_client],
                                  *splits[analyzed_client])
        snapshots.append(RoundSnapshot(round_index=round_i, federated=params.copy(),
                                       local_update=own_update, metrics=metrics))
    return snapshots


def train_standalone(spec: ModelSpec, client: ClientConfig, total_epochs: int,
                     base_seed: int = 0, client_index: int = 0) -> ParamVector:
    """The comparison baseline: same architecture and init seed, local data only.

    Epochs are consumed in blocks of ``local_epochs`` with the same per-round
    seed stream the federation would use, so a one-client federation with a
    matching epoch budget reproduces it exactly.
    """
    if total_epochs < 0:
        raise InputError("epoch budget must be non-negative")
    net = build_network(spec)
    params = net.init_params()
    train_idx, _ = client.split_indices(base_seed, client_index)
    records = client.dataset.records[train_idx]
    labels = client.dataset.labels[train_idx]
    done = 0
    round_i = 1
    block = max(client.local_epochs, 1)
    while done < total_epochs:
        epochs = min(block, total_epochs - done)
        params = train_local(spec, params, records, labels, epochs,
                             client.batch_size, client.learning_rate,
                             seed=_round_seed(base_seed, client_index, round_i))
        done += epochs
        round_i += 1
    return params
