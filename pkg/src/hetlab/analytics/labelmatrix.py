"""Label exploration matrix: federated output label vs. ground-truth label.

Rows are federated output labels with ground-truth classes first and extra
labels (model outputs outside the ground-truth set) appended after; columns
are ground-truth classes.  Cells carry their member ids, the count of
selected-cluster inconsistent members, the local-data count, and member
scatter coordinates from the current contrastive projection.  All cells of a
column share one background density grid of that ground-truth class.
"""

from __future__ import annotations

import numpy as np

from ..errors import InputError
from .summaries import DEFAULT_GRID, density_grid


def label_matrix(labels: np.ndarray | None, federated_predictions: np.ndarray,
                 projected_points: np.ndarray, selected_cluster_ids=None,
                 local_mask: np.ndarray | None = None, grid: int = DEFAULT_GRID,
                 label_names=None) -> dict:
    if labels is None:
        raise InputError("the label matrix needs ground-truth labels; "
                         "analyze an unlabeled source without it")
    labels = np.asarray(labels, dtype=np.int64)
    preds = np.asarray(federated_predictions, dtype=np.int64)
    if labels.shape != preds.shape:
        raise InputError("labels and predictions must align")
    n = len(labels)
    truth_classes = np.unique(labels)
    extra_classes = np.setdiff1d(np.unique(preds), truth_classes)
    rows = list(map(int, truth_classes)) + list(map(int, extra_classes))
    cols = list(map(int, truth_classes))

    selected = np.zeros(n, dtype=bool)
    if selected_cluster_ids is not None:
        selected[np.asarray(selected_cluster_ids, dtype=np.int64)] = True
    local = np.ones(n, dtype=bool) if local_mask is None else np.asarray(local_mask, dtype=bool)

    # one shared extent keeps per-column backgrounds comparable
    extent = density_grid(projected_points, grid)["extent"]
    column_density = [density_grid(projected_points[labels == c], grid, tuple(extent))
                      for c in cols]

    cells = []
    for r in rows:
        row_cells = []
        for c in cols:
            member_ids = np.nonzero((preds == r) & (labels == c))[0]
            row_cells.append({
                "members": member_ids.tolist(),
                "cluster_count": int(selected[member_ids].sum()),
                "local_count": int(local[member_ids].sum()),
                "scatter": projected_points[member_ids].tolist(),
            })
        cells.append(row_cells)

    def name(cls: int) -> str:
        if label_names is not None and cls < len(label_names):
            return label_names[cls]
        return f"class-{cls}"

    return {"grid": grid,
            "rows": rows,
            "columns": cols,
            "row_names": [name(r) for r in rows],
            "column_names": [name(c) for c in cols],
            "extra_rows_start": len(cols),
            "cells": cells,
            "column_density": column_density}
