"""Reproducible federation scenarios: datasets per client, model, injections.

A scenario JSON names the participating clients with their datasets (CSV path
pairs, a stored dataset id, or a synthetic blob description), the shared
model, the round budget, and optional heterogeneity injections:

* ``{"label-flip": {"from": c1, "to": c2, "fraction": f, "client": id,
  "phase-rounds": [a, b]}}`` -- relabel a (seeded) fraction of one class
  during the given rounds (whole run when omitted).
* ``{"class-drop": {"class": c, "client": id}}`` -- remove a class entirely.
* ``{"imbalance": {"class": c, "client": id, "keep-fraction": f}}`` -- keep a
  seeded fraction of one class.

Identical scenario content resolves to the same run id, so reruns are
byte-reproducible.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .data import Dataset, dataset_checksum, load_dataset_files, make_blobs
from .errors import InputError
from .federation import ClientConfig, run_federation, train_standalone
from .models import ModelSpec, build_network
from .storage import DataStore, RunRecord, scenario_run_id


def _resolve_dataset(entry: dict, base_dir: Path, store: DataStore | None) -> tuple[Dataset, dict]:
    """Load a client dataset; returns (dataset, resolved-reference-json)."""
    if "csv" in entry:
        csv_path = (base_dir / entry["csv"]).resolve()
        manifest_path = (base_dir / entry["manifest"]).resolve()
        checksum = dataset_checksum(csv_path.read_bytes(), manifest_path.read_bytes())
        return load_dataset_files(csv_path, manifest_path), {
            "csv": str(csv_path), "manifest": str(manifest_path),
            "checksum": checksum[:16]}
    if "id" in entry:
        if store is None:
            raise InputError("dataset ids need a data store")
        return store.get_dataset(entry["id"]), {"id": entry["id"]}
    if "blobs" in entry:
        blob = entry["blobs"]
        try:
            resolved = {"shape": [int(v) for v in blob["shape"]],
                        "classes": int(blob["classes"]),
                        "per_class": int(blob["per_class"]),
                        "seed": int(blob["seed"]),
                        "spread": float(blob.get("spread", 0.05)),
                        "center_seed": (int(blob["center_seed"])
                                        if "center_seed" in blob else None)}
        except KeyError as exc:
            raise InputError(f"blobs dataset missing field {exc}") from exc
        dataset = make_blobs(shape=tuple(resolved["shape"]), classes=resolved["classes"],
                             per_class=resolved["per_class"], seed=resolved["seed"],
                             spread=resolved["spread"], center_seed=resolved["center_seed"])
        return dataset, {"blobs": resolved}
    raise InputError("client dataset must give csv+manifest paths, a dataset id, or blobs")


def _injection_rng(seed: int, tag: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence((seed, 0x1283, tag)))


def _apply_injections(client_ids: list[str], datasets: dict[str, Dataset],
                      injections: list[dict], rounds: int, classes: int, seed: int):
    """Returns per-client label schedules and mutates datasets for drops/imbalance."""
    schedules: dict[str, list[tuple[int, int, np.ndarray]]] = {cid: [] for cid in client_ids}
    for tag, injection in enumerate(injections):
        if len(injection) != 1:
            raise InputError("each injection is a single-key object")
        kind, body = next(iter(injection.items()))
        client = body.get("client")
        if client not in datasets:
            raise InputError(f"injection references unknown client {client!r}")
        dataset = datasets[client]
        if kind == "label-flip":
            src, dst = int(body["from"]), int(body["to"])
            for cls in (src, dst):
                if not (0 <= cls < classes):
                    raise InputError(f"injection class {cls} outside [0, {classes})")
            fraction = float(body.get("fraction", 1.0))
            if not (0.0 < fraction <= 1.0):
                raise InputError("flip fraction must be in (0, 1]")
            lo, hi = body.get("phase-rounds", [1, rounds])
            lo, hi = int(lo), int(hi)
            if not (1 <= lo <= hi <= rounds):
                raise InputError(f"phase rounds [{lo}, {hi}] outside [1, {rounds}]")
            members = np.nonzero(dataset.labels == src)[0]
            if len(members) == 0:
                raise InputError(f"client {client!r} has no records of class {src}")
            take = max(1, int(round(fraction * len(members))))
            chosen = _injection_rng(seed, tag).choice(members, size=take, replace=False)
            flipped = dataset.labels.copy()
            flipped[np.sort(chosen)] = dst
            schedules[client].append((lo, hi, flipped))
        elif kind == "class-drop":
            cls = int(body["class"])
            if not (0 <= cls < classes):
                raise InputError(f"injection class {cls} outside [0, {classes})")
            keep = dataset.labels != cls
            if not keep.any():
                raise InputError(f"class-drop would empty client {client!r}")
            datasets[client] = Dataset(records=dataset.records[keep],
                                       labels=dataset.labels[keep],
                                       manifest=dataset.manifest)
        elif kind == "imbalance":
            cls = int(body["class"])
            frac = float(body["keep-fraction"])
            if not (0.0 < frac <= 1.0):
                raise InputError("keep-fraction must be in (0, 1]")
            members = np.nonzero(dataset.labels == cls)[0]
            keep_count = max(1, int(round(frac * len(members))))
            chosen = set(_injection_rng(seed, tag).choice(members, size=keep_count,
                                                          replace=False).tolist())
            mask = np.asarray([lab != cls or i in chosen
                               for i, lab in enumerate(dataset.labels)])
            datasets[client] = Dataset(records=dataset.records[mask],
                                       labels=dataset.labels[mask],
                                       manifest=dataset.manifest)
        else:
            raise InputError(f"unknown injection kind {kind!r}")
    return schedules


def run_scenario(scenario: dict, base_dir=".", store: DataStore | None = None) -> RunRecord:
    """Execute a scenario end to end: federation, stand-alone baseline, snapshots."""
    try:
        rounds = int(scenario["rounds"])
        spec = ModelSpec.from_json(scenario["model"])
        client_docs = list(scenario["clients"])
    except KeyError as exc:
        raise InputError(f"scenario missing field {exc}") from exc
    if rounds < 1:
        raise InputError("scenario needs at least one round")
    if not client_docs:
        raise InputError("scenario needs at least one client")
    seed = int(scenario.get("seed", 0))
    base_dir = Path(base_dir)

    client_ids = []
    datasets: dict[str, Dataset] = {}
    resolved_clients = []
    for doc in client_docs:
        cid = str(doc.get("id", f"client-{len(client_ids)}"))
        if cid in datasets:
            raise InputError(f"duplicate client id {cid!r}")
        dataset, ref = _resolve_dataset(doc.get("dataset", doc), base_dir, store)
        client_ids.append(cid)
        datasets[cid] = dataset
        resolved_clients.append({
            "id": cid, "dataset": ref,
            "split": float(doc.get("split", 0.8)),
            "epochs": int(doc.get("epochs", 1)),
            "batch": int(doc.get("batch", 32)),
            "lr": float(doc.get("lr", 0.1)),
        })

    analyzed = str(scenario.get("analyzed_client", client_ids[0]))
    if analyzed not in client_ids:
        raise InputError(f"analyzed client {analyzed!r} is not a scenario client")

    injections = list(scenario.get("injections", []))
    schedules = _apply_injections(client_ids, datasets, injections, rounds,
                                  spec.classes, seed)
    if schedules[analyzed]:
        raise InputError("label injections on the analyzed client would corrupt "
                         "its ground truth; inject on a peer client")

    clients = []
    for doc in resolved_clients:
        cid = doc["id"]
        clients.append(ClientConfig(client_id=cid, dataset=datasets[cid],
                                    split_fraction=doc["split"], local_epochs=doc["epochs"],
                                    batch_size=doc["batch"], learning_rate=doc["lr"],
                                    label_schedule=tuple(schedules[cid])))
    analyzed_index = client_ids.index(analyzed)

    resolved = {"name": scenario.get("name", "run"), "seed": seed, "rounds": rounds,
                "model": spec.to_json(), "clients": resolved_clients,
                "analyzed_client": analyzed, "injections": injections,
                "standalone_epochs": scenario.get("standalone_epochs")}
    run_id = scenario_run_id(resolved)

    net = build_network(spec)
    initial = net.init_params()
    snapshots = run_federation(spec, clients, rounds, analyzed_client=analyzed_index,
                               base_seed=seed, initial=initial)
    budget = resolved["standalone_epochs"]
    if budget is None:
        budget = rounds * max(clients[analyzed_index].local_epochs, 1)
    standalone = train_standalone(spec, clients[analyzed_index], int(budget),
                                  base_seed=seed, client_index=analyzed_index)

    return RunRecord(run_id=run_id, scenario=resolved, spec=spec, rounds=rounds,
                     seed=seed, analyzed_client=analyzed,
                     clients_meta=[{**doc, "n_k": clients[i].n_k}
                                   for i, doc in enumerate(resolved_clients)],
                     dataset=datasets[analyzed], layout=initial.layout,
                     initial=initial.values, standalone=standalone.values,
                     snapshots=snapshots, standalone_epochs=int(budget))
