import numpy as np
import pytest

from hetlab.models import ModelSpec
from hetlab.scenario import run_scenario
from hetlab.storage import DataStore


def mlp_spec(input_dim=4, classes=2, hidden=(3,), seed=7):
    layers = tuple({"width": w, "activation": "relu"} for w in hidden)
    layers += ({"width": classes, "activation": "softmax-output"},)
    return ModelSpec(kind="mlp", input_shape=(input_dim,), classes=classes,
                     layers=layers, seed=seed)


def cnn_spec(h=8, w=8, c=1, classes=4, conv=((4, 3),), pool="flat", seed=3):
    layers = tuple({"conv": ch, "kernel": k, "activation": "relu"} for ch, k in conv)
    layers += ({"pool": pool}, {"dense": classes, "activation": "softmax-output"})
    return ModelSpec(kind="cnn-min", input_shape=(h, w, c), classes=classes,
                     layers=layers, seed=seed)


def flip_scenario(per_class=50, rounds=8, seed=11, phase=None, lr=0.1,
                  classes=4, width=32):
    injection = {"label-flip": {"from": 1, "to": 2, "fraction": 1.0, "client": "c2"}}
    if phase is not None:
        injection["label-flip"]["phase-rounds"] = list(phase)
    return {
        "name": "label-flip", "seed": seed, "rounds": rounds,
        "model": {"kind": "mlp", "input": [64], "classes": classes, "seed": seed,
                  "layers": [{"width": width, "activation": "relu"},
                             {"width": classes, "activation": "softmax-output"}]},
        "clients": [
            {"id": "c1", "dataset": {"blobs": {"shape": [8, 8, 1], "classes": classes,
                                               "per_class": per_class, "seed": 5,
                                               "center_seed": 99}},
             "split": 0.8, "epochs": 1, "batch": 32, "lr": lr},
            {"id": "c2", "dataset": {"blobs": {"shape": [8, 8, 1], "classes": classes,
                                               "per_class": per_class, "seed": 6,
                                               "center_seed": 99}},
             "split": 0.8, "epochs": 1, "batch": 32, "lr": lr},
        ],
        "analyzed_client": "c1",
        "injections": [injection],
    }


def one_client_scenario(per_class=60, rounds=6, seed=4):
    return {
        "name": "solo", "seed": seed, "rounds": rounds,
        "model": {"kind": "mlp", "input": [16], "classes": 3, "seed": seed,
                  "layers": [{"width": 16, "activation": "relu"},
                             {"width": 3, "activation": "softmax-output"}]},
        "clients": [
            {"id": "solo", "dataset": {"blobs": {"shape": [16], "classes": 3,
                                                 "per_class": per_class, "seed": 21}},
             "split": 0.8, "epochs": 1, "batch": 16, "lr": 0.1},
        ],
    }


@pytest.fixture(scope="session")
def small_flip_run(tmp_path_factory):
    """A finished small label-flip run, loaded back through the store."""
    root = tmp_path_factory.mktemp("flipstore")
    store = DataStore(root)
    record = run_scenario(flip_scenario())
    store.save_run(record)
    return store, store.load_run(record.run_id)


@pytest.fixture(scope="session")
def solo_run(tmp_path_factory):
    root = tmp_path_factory.mktemp("solostore")
    store = DataStore(root)
    record = run_scenario(one_client_scenario())
    store.save_run(record)
    return store, store.load_run(record.run_id)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
