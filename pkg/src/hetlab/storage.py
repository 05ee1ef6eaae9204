"""On-disk layout: datasets, run snapshots, session state, annotations.

Everything is a JSON file under one data directory, written atomically
(temp + rename) with sorted keys so fixtures diff cleanly:

    <data-dir>/
      datasets/<id>/data.csv, manifest.json
      runs/<id>/run.json, metrics.csv, status.json, dataset.csv, manifest.json
      session.json
      annotations.json

Parameter vectors are persisted as base64-encoded little-endian 32-bit floats.
"""

from __future__ import annotations

import base64
import hashlib
import json
import os
import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .data import Dataset, Manifest, dataset_checksum, load_csv
from .errors import InputError, NotFoundError
from .federation import RoundSnapshot
from .models import LayoutEntry, ModelSpec, ParamVector


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def atomic_write_text(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".tmp-", suffix=path.suffix)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def atomic_write_json(path: Path, obj):
    atomic_write_text(path, canonical_json(obj))


def read_json(path: Path):
    if not path.exists():
        raise NotFoundError(f"no such file: {path}")
    with open(path, "r", encoding="utf-8") as fh:
        try:
            return json.load(fh)
        except json.JSONDecodeError as exc:
            raise InputError(f"{path.name}: invalid JSON at line {exc.lineno}, "
                             f"column {exc.colno}: {exc.msg}") from exc


def encode_params(values: np.ndarray) -> str:
    return base64.b64encode(np.asarray(values, dtype="<f4").tobytes()).decode("ascii")


def decode_params(text: str, expected_length: int | None = None) -> np.ndarray:
    values = np.frombuffer(base64.b64decode(text), dtype="<f4").astype(np.float64)
    if expected_length is not None and values.size != expected_length:
        raise InputError(f"parameter blob has {values.size} values, expected {expected_length}")
    return values


@dataclass
class RunRecord:
    """Everything persisted about one federation run, from the analyzed client's view."""

    run_id: str
    scenario: dict                      # resolved scenario document
    spec: ModelSpec
    rounds: int
    seed: int
    analyzed_client: str
    clients_meta: list[dict]            # id, n_k, epochs, batch, lr, split (no foreign data)
    dataset: Dataset                    # analyzed client's local data only
    layout: tuple[LayoutEntry, ...]
    initial: np.ndarray
    standalone: np.ndarray
    snapshots: list[RoundSnapshot]
    standalone_epochs: int = 0

    def param_vector(self, values: np.ndarray) -> ParamVector:
        return ParamVector(values, self.layout)

    def snapshot(self, round_index: int) -> RoundSnapshot:
        for snap in self.snapshots:
            if snap.round_index == round_index:
                return snap
        raise NotFoundError(f"run {self.run_id} has no round {round_index}")

    def metrics_csv(self) -> str:
        lines = ["round,train_loss,test_acc,total_acc"]
        for snap in sorted(self.snapshots, key=lambda s: s.round_index):
            m = snap.metrics
            lines.append(f"{snap.round_index},{m['train_loss']!r},{m['test_acc']!r},{m['total_acc']!r}")
        return "\n".join(lines) + "\n"

    def to_json(self) -> dict:
        return {
            "id": self.run_id,
            "scenario": self.scenario,
            "spec": self.spec.to_json(),
            "rounds": self.rounds,
            "seed": self.seed,
            "analyzed_client": self.analyzed_client,
            "clients": self.clients_meta,
            "layout": [e.to_json() for e in self.layout],
            "initial": encode_params(self.initial),
            "standalone": encode_params(self.standalone),
            "standalone_epochs": self.standalone_epochs,
            "snapshots": [{
                "round": s.round_index,
                "federated": encode_params(s.federated.values),
                "local_update": encode_params(s.local_update.values),
                "metrics": {k: float(v) for k, v in s.metrics.items()},
            } for s in sorted(self.snapshots, key=lambda s: s.round_index)],
        }

    @staticmethod
    def from_json(obj: dict, dataset: Dataset) -> "RunRecord":
        spec = ModelSpec.from_json(obj["spec"])
        layout = tuple(LayoutEntry.from_json(e) for e in obj["layout"])
        length = sum(e.length for e in layout)
        snapshots = []
        for s in obj["snapshots"]:
            federated = ParamVector(decode_params(s["federated"], length), layout)
            local = ParamVector(decode_params(s["local_update"], length), layout)
            snapshots.append(RoundSnapshot(round_index=int(s["round"]), federated=federated,
                                           local_update=local, metrics=dict(s["metrics"])))
        return RunRecord(
            run_id=obj["id"], scenario=obj["scenario"], spec=spec,
            rounds=int(obj["rounds"]), seed=int(obj["seed"]),
            analyzed_client=obj["analyzed_client"], clients_meta=list(obj["clients"]),
            dataset=dataset, layout=layout,
            initial=decode_params(obj["initial"], length),
            standalone=decode_params(obj["standalone"], length),
            snapshots=snapshots,
            standalone_epochs=int(obj.get("standalone_epochs", 0)))


class DataStore:
    """Single-writer store rooted at one directory."""

    def __init__(self, root):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self._run_cache: dict[str, RunRecord] = {}

    # --- datasets --------------------------------------------------------

    def dataset_dir(self, dataset_id: str) -> Path:
        return self.root / "datasets" / dataset_id

    def add_dataset(self, csv_text: str, manifest_obj: dict) -> str:
        manifest = Manifest.from_json(manifest_obj)
        load_csv(csv_text, manifest)  # validate before persisting
        manifest_text = canonical_json(manifest.to_json())
        dataset_id = dataset_checksum(csv_text.encode("utf-8"),
                                      manifest_text.encode("utf-8"))[:16]
        target = self.dataset_dir(dataset_id)
        if not target.exists():
            atomic_write_text(target / "data.csv", csv_text)
            atomic_write_text(target / "manifest.json", manifest_text)
        return dataset_id

    def get_dataset(self, dataset_id: str) -> Dataset:
        target = self.dataset_dir(dataset_id)
        if not target.exists():
            raise NotFoundError(f"no dataset {dataset_id!r}")
        manifest = Manifest.from_json(read_json(target / "manifest.json"))
        return load_csv((target / "data.csv").read_text(encoding="utf-8"), manifest)

    def list_datasets(self) -> list[str]:
        base = self.root / "datasets"
        return sorted(p.name for p in base.iterdir() if p.is_dir()) if base.exists() else []

    # --- runs ------------------------------------------------------------

    def run_dir(self, run_id: str) -> Path:
        return self.root / "runs" / run_id

    def save_run(self, record: RunRecord):
        target = self.run_dir(record.run_id)
        from .data import save_dataset_files
        target.mkdir(parents=True, exist_ok=True)
        save_dataset_files(record.dataset, target / "dataset.csv", target / "manifest.json")
        doc = record.to_json()
        atomic_write_json(target / "run.json", doc)
        for snap in doc["snapshots"]:
            atomic_write_json(target / "snapshots" / f"round-{snap['round']:04d}.json", snap)
        atomic_write_text(target / "metrics.csv", record.metrics_csv())
        self.set_status(record.run_id, {"state": "done", "round": record.rounds,
                                        "rounds": record.rounds})
        # analysis must see the float32-round-tripped parameters, same as a
        # fresh process would; never serve the in-memory record
        self._run_cache.pop(record.run_id, None)

    def load_run(self, run_id: str) -> RunRecord:
        if run_id in self._run_cache:
            return self._run_cache[run_id]
        target = self.run_dir(run_id)
        if not (target / "run.json").exists():
            raise NotFoundError(f"no run {run_id!r}")
        from .data import load_dataset_files
        dataset = load_dataset_files(target / "dataset.csv", target / "manifest.json")
        record = RunRecord.from_json(read_json(target / "run.json"), dataset)
        self._run_cache[run_id] = record
        return record

    def list_runs(self) -> list[str]:
        base = self.root / "runs"
        return sorted(p.name for p in base.iterdir() if p.is_dir()) if base.exists() else []

    def set_status(self, run_id: str, status: dict):
        atomic_write_json(self.run_dir(run_id) / "status.json", status)

    def get_status(self, run_id: str) -> dict:
        path = self.run_dir(run_id) / "status.json"
        if not path.exists():
            raise NotFoundError(f"no run {run_id!r}")
        return read_json(path)


def scenario_run_id(resolved_scenario: dict) -> str:
    text = json.dumps(resolved_scenario, sort_keys=True, separators=(",", ":"))
    return "r" + hashlib.sha256(text.encode("utf-8")).hexdigest()[:12]
