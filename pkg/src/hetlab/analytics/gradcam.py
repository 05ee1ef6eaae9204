"""Average class activation maps for the stand-alone / federated model pair.

Per record and model, the target class is that model's own prediction; channel
weights are the spatial mean of the class-score gradient at the chosen conv
layer's rectified output, and the map is the rectified weighted channel sum.
Maps are averaged over the record set and normalized to max 1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import InputError
from ..models import ModelSpec, ParamVector, require_cnn


@dataclass
class GradCAMPair:
    standalone_map: np.ndarray        # (H', W') in [0, 1]
    federated_map: np.ndarray
    layer: str

    def to_json(self) -> dict:
        return {"layer": self.layer,
                "maps": [self.standalone_map.tolist(), self.federated_map.tolist()]}


def class_activation_map(net, params: ParamVector, records: np.ndarray, layer: str) -> np.ndarray:
    """Averaged, max-normalized Grad-CAM over ``records`` (all-zero maps stay zero)."""
    features = net.conv_features(params, records, layer)       # (N, H', W', C)
    preds = net.predict(params, records)
    grads = net.logit_grad_wrt_features(params, records, layer, preds)
    weights = grads.mean(axis=(1, 2))                          # (N, C)
    maps = np.einsum("nxyc,nc->nxy", features, weights)
    maps = np.maximum(maps, 0.0)
    mean_map = maps.mean(axis=0)
    peak = mean_map.max()
    return mean_map / peak if peak > 0 else mean_map


def grad_cam_pair(spec: ModelSpec, standalone: ParamVector, federated: ParamVector,
                  records: np.ndarray, layer: str | None = None) -> GradCAMPair:
    net = require_cnn(spec)
    records = np.asarray(records, dtype=np.float64)
    if records.ndim == 1:
        records = records[None, :]
    if records.shape[0] < 1:
        raise InputError("need at least one record for an activation map")
    if layer is None:
        layer = net.conv_layer_names()[-1]
    return GradCAMPair(standalone_map=class_activation_map(net, standalone, records, layer),
                       federated_map=class_activation_map(net, federated, records, layer),
                       layer=layer)
