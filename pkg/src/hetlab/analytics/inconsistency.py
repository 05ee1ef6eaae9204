"""Finding records on which the stand-alone and federated models disagree."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import InputError
from ..models import ModelSpec, ParamVector, build_network


@dataclass
class InconsistencyReport:
    round_index: int
    ids: np.ndarray                   # strictly increasing record ids
    standalone_labels: np.ndarray     # per id
    federated_labels: np.ndarray      # per id

    def __post_init__(self):
        self.ids = np.asarray(self.ids, dtype=np.int64)
        if len(self.ids) and np.any(np.diff(self.ids) <= 0):
            raise InputError("inconsistent ids must be strictly increasing")
        if np.any(self.standalone_labels == self.federated_labels):
            raise InputError("a reported record must carry two different labels")

    @property
    def m(self) -> int:
        return int(len(self.ids))

    def to_json(self) -> dict:
        return {"round": self.round_index,
                "m": self.m,
                "ids": self.ids.tolist(),
                "standalone_labels": self.standalone_labels.tolist(),
                "federated_labels": self.federated_labels.tolist()}


def find_inconsistent(spec: ModelSpec, standalone: ParamVector, federated: ParamVector,
                      records: np.ndarray, round_index: int = 0) -> InconsistencyReport:
    """Records whose argmax labels differ between the two models.

    Argmax ties resolve to the lowest class index (numpy convention), so the
    comparison is deterministic.
    """
    net = build_network(spec)
    pred_standalone = net.predict(standalone, records)
    pred_federated = net.predict(federated, records)
    mask = pred_standalone != pred_federated
    ids = np.nonzero(mask)[0]
    return InconsistencyReport(round_index=round_index, ids=ids,
                               standalone_labels=pred_standalone[ids],
                               federated_labels=pred_federated[ids])
