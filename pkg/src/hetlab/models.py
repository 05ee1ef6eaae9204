"""From-scratch differentiable models and the flat parameter vectors they exchange.

Two architectures are supported:

* ``mlp`` -- dense layers with ReLU hidden activations and a softmax output.
* ``cnn-min`` -- valid-padding stride-1 convolutions with ReLU, one pooling
  stage (flatten or global average), and a single dense softmax head.  The
  smallest shape that still admits class activation maps.

All parameters live in a :class:`ParamVector`: a flat float64 array plus a
layout describing how layer tensors tile it.  That vector is the unit clients
submit and the server aggregates.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import InputError, NumericError, SpecError, UnsupportedArchitectureError

RELU = "relu"
SOFTMAX_OUT = "softmax-output"


@dataclass(frozen=True)
class LayoutEntry:
    name: str
    offset: int
    length: int
    shape: tuple[int, ...]

    def to_json(self) -> dict:
        return {"name": self.name, "offset": self.offset, "length": self.length,
                "shape": list(self.shape)}

    @staticmethod
    def from_json(obj: dict) -> "LayoutEntry":
        return LayoutEntry(obj["name"], int(obj["offset"]), int(obj["length"]),
                           tuple(int(s) for s in obj["shape"]))


@dataclass
class ParamVector:
    """Flat parameter vector with a tensor layout map."""

    values: np.ndarray
    layout: tuple[LayoutEntry, ...]

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.ndim != 1:
            raise InputError("parameter values must be a flat vector")
        offset = 0
        for entry in self.layout:
            if entry.offset != offset:
                raise InputError(f"layout entry {entry.name!r} starts at {entry.offset}, "
                                 f"expected {offset}")
            if entry.length != int(np.prod(entry.shape)):
                raise InputError(f"layout entry {entry.name!r} length does not match its shape")
            offset += entry.length
        if offset != self.values.size:
            raise InputError(f"layout covers {offset} values, vector has {self.values.size}")
        if not np.all(np.isfinite(self.values)):
            raise NumericError("parameter vector contains non-finite values")

    @property
    def size(self) -> int:
        return self.values.size

    def tensor(self, name: str) -> np.ndarray:
        for entry in self.layout:
            if entry.name == name:
                return self.values[entry.offset:entry.offset + entry.length].reshape(entry.shape)
        raise InputError(f"no tensor named {name!r} in layout")

    def with_values(self, values: np.ndarray) -> "ParamVector":
        return ParamVector(np.asarray(values, dtype=np.float64), self.layout)

    def copy(self) -> "ParamVector":
        return ParamVector(self.values.copy(), self.layout)

    def layer_names(self) -> list[str]:
        """Layer group names (tensor names without the /W,/b suffix), in order."""
        seen: list[str] = []
        for entry in self.layout:
            group = entry.name.split("/")[0]
            if group not in seen:
                seen.append(group)
        return seen

    def selector_slice(self, layer: str) -> np.ndarray:
        """Index array selecting one layer group, or everything for ``all``."""
        if layer == "all":
            return np.arange(self.size)
        idx: list[np.ndarray] = []
        for entry in self.layout:
            if entry.name.split("/")[0] == layer:
                idx.append(np.arange(entry.offset, entry.offset + entry.length))
        if not idx:
            raise InputError(f"unknown layer {layer!r}; known: {self.layer_names()}")
        return np.concatenate(idx)

    def same_layout(self, other: "ParamVector") -> bool:
        return self.layout == other.layout


@dataclass(frozen=True)
class ModelSpec:
    """Architecture description shared by every participant of a federation."""

    kind: str                       # "mlp" | "cnn-min"
    input_shape: tuple[int, ...]    # (D,) or (H, W, C)
    classes: int
    layers: tuple[dict, ...]
    seed: int = 0

    def __post_init__(self):
        if self.kind not in ("mlp", "cnn-min"):
            raise SpecError(f"unknown model kind {self.kind!r}")
        if self.classes < 2:
            raise SpecError("class count must be at least 2")
        if self.kind == "mlp":
            self._validate_mlp()
        else:
            self._validate_cnn()

    def _validate_mlp(self):
        if len(self.input_shape) != 1:
            raise SpecError("mlp expects a flat input shape (D,)")
        if not self.layers:
            raise SpecError("mlp needs at least the softmax output layer")
        for layer in self.layers[:-1]:
            if layer.get("activation") != RELU or "width" not in layer:
                raise SpecError(f"hidden mlp layers must be {{width, activation: relu}}, got {layer}")
        last = self.layers[-1]
        if last.get("activation") != SOFTMAX_OUT:
            raise SpecError("the last mlp layer must carry the softmax output")
        if last.get("width") != self.classes:
            raise SpecError(f"output width {last.get('width')} != class count {self.classes}")

    def _validate_cnn(self):
        if len(self.input_shape) != 3:
            raise SpecError("cnn-min expects an image input shape (H, W, C)")
        convs = [l for l in self.layers if "conv" in l]
        if not convs:
            raise SpecError("cnn-min needs at least one conv layer (required for Grad-CAM)")
        expected = convs + [{"pool": self.pool_mode()}, self.layers[-1]]
        if list(self.layers) != expected:
            raise SpecError("cnn-min layers must be conv..., pool, dense")
        for layer in convs:
            if layer.get("activation") != RELU:
                raise SpecError("conv layers must use relu")
        h, w, _ = self.input_shape
        for layer in convs:
            k = int(layer["kernel"])
            h, w = h - k + 1, w - k + 1
            if h < 1 or w < 1:
                raise SpecError(f"kernel size {k} does not fit the remaining {h + k - 1}x{w + k - 1} map")
        dense = self.layers[-1]
        if dense.get("activation") != SOFTMAX_OUT or "dense" not in dense:
            raise SpecError("cnn-min must end with one dense softmax layer")
        if int(dense["dense"]) != self.classes:
            raise SpecError(f"dense width {dense['dense']} != class count {self.classes}")

    def pool_mode(self) -> str:
        for layer in self.layers:
            if "pool" in layer:
                if layer["pool"] not in ("flat", "global-avg"):
                    raise SpecError(f"unknown pooling {layer['pool']!r}")
                return layer["pool"]
        raise SpecError("cnn-min needs a pooling stage (flat or global-avg)")

    @property
    def input_dim(self) -> int:
        return int(np.prod(self.input_shape))

    def to_json(self) -> dict:
        return {"kind": self.kind, "input": list(self.input_shape), "classes": self.classes,
                "layers": [dict(l) for l in self.layers], "seed": self.seed}

    @staticmethod
    def from_json(obj: dict) -> "ModelSpec":
        try:
            return ModelSpec(kind=obj["kind"], input_shape=tuple(int(v) for v in obj["input"]),
                             classes=int(obj["classes"]),
                             layers=tuple(dict(l) for l in obj["layers"]),
                             seed=int(obj.get("seed", 0)))
        except KeyError as exc:
            raise SpecError(f"model spec missing field {exc}") from exc


def _glorot(rng: np.random.Generator, shape: tuple[int, ...], fan_in: int, fan_out: int) -> np.ndarray:
    s = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-s, s, size=shape)


def _softmax(z: np.ndarray) -> np.ndarray:
    z = z - z.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def _check_finite(arr: np.ndarray, layer: str):
    if not np.all(np.isfinite(arr)):
        raise NumericError(f"non-finite activations in layer {layer!r}")


class MLPNetwork:
    def __init__(self, spec: ModelSpec):
        self.spec = spec
        dims = [spec.input_dim] + [int(l["width"]) for l in spec.layers]
        self.dims = dims
        layout: list[LayoutEntry] = []
        offset = 0
        for i in range(len(dims) - 1):
            name = f"dense{i + 1}"
            for suffix, shape in (("W", (dims[i], dims[i + 1])), ("b", (dims[i + 1],))):
                length = int(np.prod(shape))
                layout.append(LayoutEntry(f"{name}/{suffix}", offset, length, shape))
                offset += length
        self.layout = tuple(layout)

    def init_params(self) -> ParamVector:
        rng = np.random.default_rng(self.spec.seed)
        values = np.zeros(sum(e.length for e in self.layout))
        pv = ParamVector(values, self.layout)
        for i in range(len(self.dims) - 1):
            fan_in, fan_out = self.dims[i], self.dims[i + 1]
            w = _glorot(rng, (fan_in, fan_out), fan_in, fan_out)
            entry = next(e for e in self.layout if e.name == f"dense{i + 1}/W")
            values[entry.offset:entry.offset + entry.length] = w.ravel()
        return pv

    def _flatten_input(self, batch: np.ndarray) -> np.ndarray:
        batch = np.asarray(batch, dtype=np.float64)
        if batch.ndim == 1:
            batch = batch[None, :]
        if batch.shape[1] != self.spec.input_dim:
            raise InputError(f"batch has {batch.shape[1]} features, model expects {self.spec.input_dim}")
        return batch

    def _cached_forward(self, params: ParamVector, X: np.ndarray, check: bool = False):
        a = X
        acts = [a]
        n_layers = len(self.dims) - 1
        for i in range(n_layers):
            w = params.tensor(f"dense{i + 1}/W")
            b = params.tensor(f"dense{i + 1}/b")
            z = a @ w + b
            if check:
                _check_finite(z, f"dense{i + 1}")
            a = _softmax(z) if i == n_layers - 1 else np.maximum(z, 0.0)
            acts.append(a)
        return acts

    def forward(self, params: ParamVector, batch: np.ndarray) -> np.ndarray:
        X = self._flatten_input(batch)
        return self._cached_forward(params, X, check=True)[-1]

    def predict(self, params: ParamVector, batch: np.ndarray) -> np.ndarray:
        return np.argmax(self.forward(params, batch), axis=1)

    def loss(self, params: ParamVector, batch: np.ndarray, labels: np.ndarray) -> float:
        probs = self.forward(params, batch)
        return float(-np.mean(np.log(probs[np.arange(len(labels)), labels] + 1e-300)))

    def loss_and_grad(self, params: ParamVector, batch: np.ndarray, labels: np.ndarray):
        X = self._flatten_input(batch)
        y = np.asarray(labels)
        acts = self._cached_forward(params, X)
        probs = acts[-1]
        n = X.shape[0]
        loss = float(-np.mean(np.log(probs[np.arange(n), y] + 1e-300)))
        grad = np.zeros_like(params.values)
        gpv = ParamVector(grad, params.layout)

        delta = probs.copy()
        delta[np.arange(n), y] -= 1.0
        delta /= n
        for i in reversed(range(len(self.dims) - 1)):
            a_prev = acts[i]
            gpv.tensor(f"dense{i + 1}/W")[...] = a_prev.T @ delta
            gpv.tensor(f"dense{i + 1}/b")[...] = delta.sum(axis=0)
            if i > 0:
                delta = (delta @ params.tensor(f"dense{i + 1}/W").T) * (acts[i] > 0)
        return loss, grad


def _conv_forward(a: np.ndarray, w: np.ndarray, b: np.ndarray) -> np.ndarray:
    # a: (N, H, W, C), w: (kh, kw, C, O) -> (N, H-kh+1, W-kw+1, O), valid, stride 1
    kh, kw = w.shape[0], w.shape[1]
    windows = sliding_window_view(a, (kh, kw), axis=(1, 2))  # (N, Ho, Wo, C, kh, kw)
    return np.einsum("nxyckl,klco->nxyo", windows, w, optimize=True) + b


def _conv_backward(a: np.ndarray, w: np.ndarray, delta: np.ndarray):
    # grads of z = conv(a, w) + b wrt w, b, a
    kh, kw = w.shape[0], w.shape[1]
    windows = sliding_window_view(a, (kh, kw), axis=(1, 2))
    dw = np.einsum("nxyckl,nxyo->klco", windows, delta, optimize=True)
    db = delta.sum(axis=(0, 1, 2))
    padded = np.pad(delta, ((0, 0), (kh - 1, kh - 1), (kw - 1, kw - 1), (0, 0)))
    dwindows = sliding_window_view(padded, (kh, kw), axis=(1, 2))  # (N, H, W, O, kh, kw)
    w_flip = w[::-1, ::-1]
    da = np.einsum("nxyokl,klco->nxyc", dwindows, w_flip, optimize=True)
    return dw, db, da


class CNNNetwork:
    def __init__(self, spec: ModelSpec):
        self.spec = spec
        self.convs = [l for l in spec.layers if "conv" in l]
        self.pool = spec.pool_mode()
        h, w, c = spec.input_shape
        self.conv_shapes = []  # output (H, W, C) per conv layer
        layout: list[LayoutEntry] = []
        offset = 0
        for i, layer in enumerate(self.convs):
            k, out_ch = int(layer["kernel"]), int(layer["conv"])
            wshape = (k, k, c, out_ch)
            for suffix, shape in (("W", wshape), ("b", (out_ch,))):
                length = int(np.prod(shape))
                layout.append(LayoutEntry(f"conv{i + 1}/{suffix}", offset, length, shape))
                offset += length
            h, w, c = h - k + 1, w - k + 1, out_ch
            self.conv_shapes.append((h, w, c))
        self.feature_dim = h * w * c if self.pool == "flat" else c
        for suffix, shape in (("W", (self.feature_dim, spec.classes)), ("b", (spec.classes,))):
            length = int(np.prod(shape))
            layout.append(LayoutEntry(f"dense/{suffix}", offset, length, shape))
            offset += length
        self.layout = tuple(layout)

    def conv_layer_names(self) -> list[str]:
        return [f"conv{i + 1}" for i in range(len(self.convs))]

    def init_params(self) -> ParamVector:
        rng = np.random.default_rng(self.spec.seed)
        values = np.zeros(sum(e.length for e in self.layout))
        pv = ParamVector(values, self.layout)
        for i, layer in enumerate(self.convs):
            entry = next(e for e in self.layout if e.name == f"conv{i + 1}/W")
            k, _, cin, cout = entry.shape
            fan = k * k
            w = _glorot(rng, entry.shape, fan * cin, fan * cout)
            values[entry.offset:entry.offset + entry.length] = w.ravel()
        entry = next(e for e in self.layout if e.name == "dense/W")
        w = _glorot(rng, entry.shape, entry.shape[0], entry.shape[1])
        values[entry.offset:entry.offset + entry.length] = w.ravel()
        return pv

    def _to_images(self, batch: np.ndarray) -> np.ndarray:
        batch = np.asarray(batch, dtype=np.float64)
        h, w, c = self.spec.input_shape
        if batch.ndim == 1:
            batch = batch[None, :]
        if batch.ndim == 2:
            if batch.shape[1] != h * w * c:
                raise InputError(f"batch has {batch.shape[1]} features, model expects {h * w * c}")
            return batch.reshape(-1, h, w, c)
        if batch.shape[1:] != (h, w, c):
            raise InputError(f"batch images are {batch.shape[1:]}, model expects {(h, w, c)}")
        return batch

    def _cached_forward(self, params: ParamVector, X: np.ndarray, check: bool = False):
        a = X
        conv_acts = []  # post-relu conv outputs
        for i in range(len(self.convs)):
            z = _conv_forward(a, params.tensor(f"conv{i + 1}/W"), params.tensor(f"conv{i + 1}/b"))
            if check:
                _check_finite(z, f"conv{i + 1}")
            a = np.maximum(z, 0.0)
            conv_acts.append(a)
        pooled = a.reshape(a.shape[0], -1) if self.pool == "flat" else a.mean(axis=(1, 2))
        logits = pooled @ params.tensor("dense/W") + params.tensor("dense/b")
        if check:
            _check_finite(logits, "dense")
        return conv_acts, pooled, logits

    def forward(self, params: ParamVector, batch: np.ndarray) -> np.ndarray:
        X = self._to_images(batch)
        return _softmax(self._cached_forward(params, X, check=True)[2])

    def predict(self, params: ParamVector, batch: np.ndarray) -> np.ndarray:
        return np.argmax(self.forward(params, batch), axis=1)

    def loss(self, params: ParamVector, batch: np.ndarray, labels: np.ndarray) -> float:
        probs = self.forward(params, batch)
        return float(-np.mean(np.log(probs[np.arange(len(labels)), labels] + 1e-300)))

    def loss_and_grad(self, params: ParamVector, batch: np.ndarray, labels: np.ndarray):
        X = self._to_images(batch)
        y = np.asarray(labels)
        conv_acts, pooled, logits = self._cached_forward(params, X)
        probs = _softmax(logits)
        n = X.shape[0]
        loss = float(-np.mean(np.log(probs[np.arange(n), y] + 1e-300)))
        grad = np.zeros_like(params.values)
        gpv = ParamVector(grad, params.layout)

        delta = probs.copy()
        delta[np.arange(n), y] -= 1.0
        delta /= n
        gpv.tensor("dense/W")[...] = pooled.T @ delta
        gpv.tensor("dense/b")[...] = delta.sum(axis=0)
        dpooled = delta @ params.tensor("dense/W").T
        da = self._unpool(dpooled, conv_acts[-1].shape)
        for i in reversed(range(len(self.convs))):
            dz = da * (conv_acts[i] > 0)
            a_prev = X if i == 0 else conv_acts[i - 1]
            w = params.tensor(f"conv{i + 1}/W")
            dw, db, da = _conv_backward(a_prev, w, dz)
            gpv.tensor(f"conv{i + 1}/W")[...] = dw
            gpv.tensor(f"conv{i + 1}/b")[...] = db
        return loss, grad

    def _unpool(self, dpooled: np.ndarray, feature_shape: tuple) -> np.ndarray:
        if self.pool == "flat":
            return dpooled.reshape(feature_shape)
        n, h, w, c = feature_shape
        return np.broadcast_to(dpooled[:, None, None, :] / (h * w), feature_shape).copy()

    # --- hooks for class activation maps ---------------------------------

    def conv_features(self, params: ParamVector, batch: np.ndarray, layer: str) -> np.ndarray:
        """Post-ReLU activation map of one conv layer, shape (N, H', W', C')."""
        idx = self._conv_index(layer)
        X = self._to_images(batch)
        return self._cached_forward(params, X)[0][idx]

    def logit_grad_wrt_features(self, params: ParamVector, batch: np.ndarray, layer: str,
                                target_classes: np.ndarray) -> np.ndarray:
        """d(logit of each record's target class) / d(conv feature map of ``layer``)."""
        idx = self._conv_index(layer)
        X = self._to_images(batch)
        conv_acts, pooled, logits = self._cached_forward(params, X)
        n = X.shape[0]
        dlogits = np.zeros_like(logits)
        dlogits[np.arange(n), target_classes] = 1.0
        dpooled = dlogits @ params.tensor("dense/W").T
        da = self._unpool(dpooled, conv_acts[-1].shape)
        for i in reversed(range(idx + 1, len(self.convs))):
            dz = da * (conv_acts[i] > 0)
            a_prev = conv_acts[i - 1]
            _, _, da = _conv_backward(a_prev, params.tensor(f"conv{i + 1}/W"), dz)
        return da

    def forward_from_features(self, params: ParamVector, features: np.ndarray, layer: str) -> np.ndarray:
        """Recompute logits from a (possibly perturbed) conv feature map."""
        idx = self._conv_index(layer)
        a = features
        for i in range(idx + 1, len(self.convs)):
            z = _conv_forward(a, params.tensor(f"conv{i + 1}/W"), params.tensor(f"conv{i + 1}/b"))
            a = np.maximum(z, 0.0)
        pooled = a.reshape(a.shape[0], -1) if self.pool == "flat" else a.mean(axis=(1, 2))
        return pooled @ params.tensor("dense/W") + params.tensor("dense/b")

    def _conv_index(self, layer: str) -> int:
        names = self.conv_layer_names()
        if layer not in names:
            raise InputError(f"unknown conv layer {layer!r}; known: {names}")
        return names.index(layer)


def build_network(spec: ModelSpec):
    if spec.kind == "mlp":
        return MLPNetwork(spec)
    if spec.kind == "cnn-min":
        return CNNNetwork(spec)
    raise SpecError(f"unknown model kind {spec.kind!r}")


def init_model(spec: ModelSpec) -> ParamVector:
    """Deterministic Glorot-uniform weights, zero biases."""
    return build_network(spec).init_params()


def forward(spec: ModelSpec, params: ParamVector, batch: np.ndarray) -> np.ndarray:
    return build_network(spec).forward(params, batch)


def require_cnn(spec: ModelSpec) -> CNNNetwork:
    net = build_network(spec)
    if not isinstance(net, CNNNetwork):
        raise UnsupportedArchitectureError(
            "class activation maps need a cnn-min model; use the contrastive entrance instead")
    return net
