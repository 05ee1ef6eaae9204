"""Datasets: flat feature records, per-dimension legal ranges, optional labels.

Ingestion formats:

* CSV with a header row, feature columns first, then an optional ``label``
  column.
* A JSON manifest ``{"shape": [H, W, C] | [D], "ranges": [[lo, hi], ...],
  "labels": ["name", ...]}``.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
from dataclasses import dataclass, field

import numpy as np

from .errors import InputError


@dataclass(frozen=True)
class Manifest:
    shape: tuple[int, ...]              # (D,) or (H, W, C)
    ranges: tuple[tuple[float, float], ...]
    label_names: tuple[str, ...] = ()

    def __post_init__(self):
        if len(self.shape) not in (1, 3):
            raise InputError("manifest shape must be [D] or [H, W, C]")
        if len(self.ranges) != self.dim:
            raise InputError(f"manifest has {len(self.ranges)} ranges for {self.dim} dimensions")
        for d, (lo, hi) in enumerate(self.ranges):
            if not (np.isfinite(lo) and np.isfinite(hi) and lo <= hi):
                raise InputError(f"bad range [{lo}, {hi}] for dimension {d}")

    @property
    def dim(self) -> int:
        return int(np.prod(self.shape))

    def range_array(self) -> np.ndarray:
        return np.asarray(self.ranges, dtype=np.float64)

    def to_json(self) -> dict:
        return {"shape": list(self.shape),
                "ranges": [[lo, hi] for lo, hi in self.ranges],
                "labels": list(self.label_names)}

    @staticmethod
    def from_json(obj: dict) -> "Manifest":
        try:
            return Manifest(shape=tuple(int(v) for v in obj["shape"]),
                            ranges=tuple((float(lo), float(hi)) for lo, hi in obj["ranges"]),
                            label_names=tuple(obj.get("labels", [])))
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"bad manifest: {exc}") from exc


@dataclass
class Dataset:
    records: np.ndarray                 # (n, D) float64
    labels: np.ndarray | None           # (n,) int64 or None
    manifest: Manifest
    extras: dict = field(default_factory=dict)

    def __post_init__(self):
        self.records = np.asarray(self.records, dtype=np.float64)
        if self.records.ndim != 2 or self.records.shape[0] < 1:
            raise InputError("records must form an n x D matrix with n >= 1")
        if self.records.shape[1] != self.manifest.dim:
            raise InputError(f"records have {self.records.shape[1]} dimensions, "
                             f"manifest declares {self.manifest.dim}")
        ranges = self.manifest.range_array()
        low_bad = self.records < ranges[:, 0]
        high_bad = self.records > ranges[:, 1]
        if low_bad.any() or high_bad.any():
            rows, cols = np.nonzero(low_bad | high_bad)
            r, c = int(rows[0]), int(cols[0])
            raise InputError(f"record value out of range at row {r + 1}, column f{c}: "
                             f"{self.records[r, c]} not in "
                             f"[{ranges[c, 0]}, {ranges[c, 1]}]")
        if self.labels is not None:
            self.labels = np.asarray(self.labels, dtype=np.int64)
            if self.labels.shape != (self.records.shape[0],):
                raise InputError("labels must be one integer per record")
            if self.labels.min() < 0:
                raise InputError("label indices must be non-negative")

    @property
    def n(self) -> int:
        return int(self.records.shape[0])

    @property
    def dim(self) -> int:
        return int(self.records.shape[1])

    def label_classes(self) -> np.ndarray:
        """Distinct ground-truth classes present, ascending."""
        if self.labels is None:
            raise InputError("dataset has no ground-truth labels")
        return np.unique(self.labels)

    def label_name(self, cls: int) -> str:
        names = self.manifest.label_names
        return names[cls] if cls < len(names) else f"class-{cls}"


def load_csv(text: str, manifest: Manifest) -> Dataset:
    """Parse dataset CSV; the first violation is reported with its row and column."""
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise InputError("empty CSV") from None
    header = [h.strip() for h in header]
    has_label = bool(header) and header[-1] == "label"
    feature_cols = header[:-1] if has_label else header
    if len(feature_cols) != manifest.dim:
        raise InputError(f"CSV has {len(feature_cols)} feature columns, "
                         f"manifest declares {manifest.dim}")
    rows: list[list[float]] = []
    labels: list[int] = []
    for i, row in enumerate(reader, start=1):
        if not row:
            continue
        if len(row) != len(header):
            raise InputError(f"row {i} has {len(row)} fields, header has {len(header)}")
        try:
            rows.append([float(v) for v in row[:len(feature_cols)]])
        except ValueError:
            bad = next(j for j, v in enumerate(row[:len(feature_cols)])
                       if not _is_float(v))
            raise InputError(f"row {i}, column {header[bad]}: {row[bad]!r} is not a number") from None
        if has_label:
            try:
                labels.append(int(row[-1]))
            except ValueError:
                raise InputError(f"row {i}, column label: {row[-1]!r} is not an integer") from None
    if not rows:
        raise InputError("CSV contains no records")
    return Dataset(records=np.asarray(rows, dtype=np.float64),
                   labels=np.asarray(labels, dtype=np.int64) if has_label else None,
                   manifest=manifest)


def _is_float(v: str) -> bool:
    try:
        float(v)
        return True
    except ValueError:
        return False


def to_csv(dataset: Dataset) -> str:
    cols = [f"f{d}" for d in range(dataset.dim)]
    if dataset.labels is not None:
        cols.append("label")
    lines = [",".join(cols)]
    for i in range(dataset.n):
        cells = [repr(float(v)) for v in dataset.records[i]]
        if dataset.labels is not None:
            cells.append(str(int(dataset.labels[i])))
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def dataset_checksum(csv_bytes: bytes, manifest_bytes: bytes) -> str:
    h = hashlib.sha256()
    h.update(csv_bytes)
    h.update(b"\x00")
    h.update(manifest_bytes)
    return h.hexdigest()


def load_dataset_files(csv_path, manifest_path) -> Dataset:
    with open(manifest_path, "r", encoding="utf-8") as fh:
        manifest = Manifest.from_json(json.load(fh))
    with open(csv_path, "r", encoding="utf-8") as fh:
        return load_csv(fh.read(), manifest)


def save_dataset_files(dataset: Dataset, csv_path, manifest_path):
    with open(csv_path, "w", encoding="utf-8", newline="") as fh:
        fh.write(to_csv(dataset))
    with open(manifest_path, "w", encoding="utf-8") as fh:
        json.dump(dataset.manifest.to_json(), fh, sort_keys=True, indent=2)
        fh.write("\n")


def make_blobs(shape: tuple[int, ...], classes: int, per_class: int, seed: int,
               spread: float = 0.05, center_margin: float = 0.25,
               center_seed: int | None = None,
               label_names: tuple[str, ...] = ()) -> Dataset:
    """Gaussian class blobs clipped into [0, 1] per dimension.

    Synthetic desk-scale stand-in for the image datasets: blob centers are
    drawn uniformly inside the margin box so classes stay linearly separable
    for small ``spread``.  A shared ``center_seed`` with different ``seed``
    values yields clients that hold similar instances (same class regions)
    with independent record noise.
    """
    dim = int(np.prod(shape))
    center_rng = np.random.default_rng(seed if center_seed is None else center_seed)
    rng = np.random.default_rng(seed)
    centers = center_rng.uniform(center_margin, 1.0 - center_margin, size=(classes, dim))
    records = []
    labels = []
    for cls in range(classes):
        pts = centers[cls] + rng.normal(0.0, spread, size=(per_class, dim))
        records.append(np.clip(pts, 0.0, 1.0))
        labels.append(np.full(per_class, cls, dtype=np.int64))
    manifest = Manifest(shape=tuple(shape), ranges=tuple((0.0, 1.0) for _ in range(dim)),
                        label_names=label_names or tuple(f"class-{c}" for c in range(classes)))
    return Dataset(records=np.concatenate(records), labels=np.concatenate(labels),
                   manifest=manifest)
