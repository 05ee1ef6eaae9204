"""Analysis state and provenance: annotations tracked across rounds.

Annotations freeze a set of suspicious record ids at the round where they
were found; tracking re-evaluates both models on those records at any later
round to judge whether the heterogeneity effect persists.  Unknown JSON
fields survive a load/save round-trip so newer writers stay compatible.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from .errors import InputError, NotFoundError
from .storage import atomic_write_json, read_json


@dataclass
class Annotation:
    annotation_id: int
    round_index: int
    record_ids: list[int]
    note: str = ""
    source_cluster: int | None = None
    extras: dict = field(default_factory=dict)

    def __post_init__(self):
        ids = sorted(set(int(i) for i in self.record_ids))
        if not ids:
            raise InputError("an annotation needs at least one record id")
        self.record_ids = ids

    def to_json(self) -> dict:
        obj = dict(self.extras)
        obj.update({"id": self.annotation_id, "round": self.round_index,
                    "record_ids": self.record_ids, "note": self.note,
                    "source_cluster": self.source_cluster})
        return obj

    @staticmethod
    def from_json(obj: dict) -> "Annotation":
        known = {"id", "round", "record_ids", "note", "source_cluster"}
        _expect(obj, "id", int, "/id")
        _expect(obj, "round", int, "/round")
        _expect(obj, "record_ids", list, "/record_ids")
        return Annotation(annotation_id=obj["id"], round_index=obj["round"],
                          record_ids=obj["record_ids"], note=str(obj.get("note", "")),
                          source_cluster=obj.get("source_cluster"),
                          extras={k: v for k, v in obj.items() if k not in known})


@dataclass
class SessionState:
    dataset_id: str | None = None
    run_id: str | None = None
    selected_round: int | None = None
    cluster_count: int | None = None
    alpha: float | None = None
    source: str = "local"
    extras: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        obj = dict(self.extras)
        obj.update({"dataset_id": self.dataset_id, "run_id": self.run_id,
                    "selected_round": self.selected_round,
                    "cluster_count": self.cluster_count, "alpha": self.alpha,
                    "source": self.source})
        return obj

    @staticmethod
    def from_json(obj: dict) -> "SessionState":
        known = {"dataset_id", "run_id", "selected_round", "cluster_count",
                 "alpha", "source"}
        if obj.get("selected_round") is not None:
            _expect(obj, "selected_round", int, "/selected_round")
        if obj.get("cluster_count") is not None:
            _expect(obj, "cluster_count", int, "/cluster_count")
        if obj.get("alpha") is not None and not isinstance(obj["alpha"], (int, float)):
            raise InputError("schema violation at /alpha: expected number")
        return SessionState(dataset_id=obj.get("dataset_id"), run_id=obj.get("run_id"),
                            selected_round=obj.get("selected_round"),
                            cluster_count=obj.get("cluster_count"),
                            alpha=obj.get("alpha"), source=obj.get("source", "local"),
                            extras={k: v for k, v in obj.items() if k not in known})


def _expect(obj: dict, key: str, kind: type, pointer: str):
    if key not in obj:
        raise InputError(f"schema violation at {pointer}: missing")
    value = obj[key]
    if kind is int and isinstance(value, bool):
        raise InputError(f"schema violation at {pointer}: expected {kind.__name__}")
    if not isinstance(value, kind):
        raise InputError(f"schema violation at {pointer}: expected {kind.__name__}, "
                         f"got {type(value).__name__}")


class SessionStore:
    """Single-writer persistence for the session state and its annotations."""

    def __init__(self, root):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)

    @property
    def session_path(self) -> Path:
        return self.root / "session.json"

    @property
    def annotations_path(self) -> Path:
        return self.root / "annotations.json"

    # --- session state ---------------------------------------------------

    def load_state(self) -> SessionState:
        if not self.session_path.exists():
            return SessionState()
        obj = read_json(self.session_path)
        if not isinstance(obj, dict):
            raise InputError("schema violation at /: expected object")
        return SessionState.from_json(obj)

    def save_state(self, state: SessionState):
        atomic_write_json(self.session_path, state.to_json())

    # --- annotations -----------------------------------------------------

    def _load_annotation_doc(self) -> dict:
        if not self.annotations_path.exists():
            return {"next_id": 1, "annotations": []}
        obj = read_json(self.annotations_path)
        _expect(obj, "next_id", int, "/next_id")
        _expect(obj, "annotations", list, "/annotations")
        return obj

    def list_annotations(self) -> list[Annotation]:
        doc = self._load_annotation_doc()
        return [Annotation.from_json(a) for a in doc["annotations"]]

    def get_annotation(self, annotation_id: int) -> Annotation:
        for ann in self.list_annotations():
            if ann.annotation_id == annotation_id:
                return ann
        raise NotFoundError(f"no annotation {annotation_id}")

    def annotate(self, record_ids, note: str, round_index: int,
                 source_cluster: int | None = None,
                 dataset_size: int | None = None) -> Annotation:
        ids = sorted(set(int(i) for i in record_ids))
        if dataset_size is not None:
            bad = [i for i in ids if not (0 <= i < dataset_size)]
            if bad:
                raise InputError(f"unknown record id {bad[0]}")
        doc = self._load_annotation_doc()
        ann = Annotation(annotation_id=doc["next_id"], round_index=round_index,
                         record_ids=ids, note=note, source_cluster=source_cluster)
        doc["annotations"].append(ann.to_json())
        doc["next_id"] += 1
        atomic_write_json(self.annotations_path, doc)
        return ann

    def delete_annotation(self, annotation_id: int):
        doc = self._load_annotation_doc()
        kept = [a for a in doc["annotations"] if a["id"] != annotation_id]
        if len(kept) == len(doc["annotations"]):
            raise NotFoundError(f"no annotation {annotation_id}")
        doc["annotations"] = kept
        atomic_write_json(self.annotations_path, doc)


def set_combine(operand_sets: list[list[int]], mode: str) -> list[int]:
    """Intersection or union of record-id sets, sorted ascending."""
    if not operand_sets:
        raise InputError("need at least one operand set")
    if mode == "union":
        out: set[int] = set()
        for ids in operand_sets:
            out |= set(ids)
    elif mode == "intersection":
        out = set(operand_sets[0])
        for ids in operand_sets[1:]:
            out &= set(ids)
    else:
        raise InputError(f"unknown set mode {mode!r}; use intersection or union")
    return sorted(out)
