"""The analysis pipeline shared by the CLI and the HTTP API.

Every view is computed from a persisted run record (so both entry points see
the same float32-round-tripped parameters) and serialized through
``canonical_json``, which makes repeated analyses byte-identical.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import analytics
from .errors import InputError, NotFoundError, NumericError
from .models import build_network, require_cnn
from .session import Annotation
from .storage import RunRecord

SOURCES = ("local", "generated-dense", "generated-sparse")
SPARSE_DIVISOR = 10


def assert_finite_payload(obj, path: str = "$"):
    """Reject NaN/Inf anywhere in a JSON-ready payload."""
    if isinstance(obj, dict):
        for key, value in obj.items():
            assert_finite_payload(value, f"{path}.{key}")
    elif isinstance(obj, (list, tuple)):
        for i, value in enumerate(obj):
            assert_finite_payload(value, f"{path}[{i}]")
    elif isinstance(obj, float) and not math.isfinite(obj):
        raise NumericError(f"non-finite value at {path}")


def comparison_records(run: RunRecord, source: str) -> tuple[np.ndarray, np.ndarray | None]:
    """The record set compared by the two models, plus labels when it has any."""
    dataset = run.dataset
    if source == "local":
        return dataset.records, dataset.labels
    if source not in SOURCES:
        raise InputError(f"unknown input source {source!r}; one of {SOURCES}")
    count = dataset.n if source == "generated-dense" else max(1, dataset.n // SPARSE_DIVISOR)
    seed = int(np.random.SeedSequence(
        (run.seed, 0xD5, SOURCES.index(source))).generate_state(1)[0])
    generated = analytics.generate_inputs(dataset.records, dataset.manifest, count, seed=seed)
    return generated, None


@dataclass
class AnalysisContext:
    """Arrays behind one analyze() result, kept for the follow-up views."""

    run: RunRecord
    round_index: int
    source: str
    k: int
    alpha: float
    records: np.ndarray
    labels: np.ndarray | None
    standalone_pred: np.ndarray
    federated_pred: np.ndarray
    report: analytics.InconsistencyReport
    dendrogram: analytics.Dendrogram | None
    projection: analytics.Projection2D | None
    summaries: list[analytics.ClusterSummary]

    def cluster(self, cluster_id: int) -> analytics.ClusterSummary:
        for summary in self.summaries:
            if summary.cluster_id == cluster_id:
                return summary
        raise NotFoundError(f"no cluster {cluster_id} in the current analysis")


def analyze_round(run: RunRecord, round_index: int, source: str = "local",
                  k: int | None = None, alpha: float | None = None,
                  grid: int = analytics.DEFAULT_GRID) -> tuple[dict, AnalysisContext]:
    snapshot = run.snapshot(round_index)
    records, labels = comparison_records(run, source)
    net = build_network(run.spec)
    standalone = run.param_vector(run.standalone)
    federated = snapshot.federated
    report = analytics.find_inconsistent(run.spec, standalone, federated, records,
                                         round_index=round_index)
    standalone_pred = net.predict(standalone, records)
    federated_pred = net.predict(federated, records)
    m = report.m

    k_defaulted = k is None
    alpha_defaulted = alpha is None
    if not k_defaulted:
        if k < 1:
            raise InputError("cluster count must be at least 1")
        if m and k > m:
            raise InputError(f"cannot cut {m} inconsistent records into {k} clusters")
    if alpha is None:
        alpha = analytics.DEFAULT_ALPHA
    if alpha < 0:
        raise InputError("contrast parameter must be non-negative")
    k_eff = min(analytics.DEFAULT_CLUSTER_COUNT if k_defaulted else k, m) if m else 0

    dendrogram = None
    projection = None
    summaries: list[analytics.ClusterSummary] = []
    recommended_k = None
    recommended_alpha = None
    inconsistent_ids = report.ids
    consistent_ids = np.setdiff1d(np.arange(records.shape[0]), inconsistent_ids)

    if m >= 2:
        matrix = analytics.rank_distance_matrix(records, inconsistent_ids)
        dendrogram = analytics.cluster_inconsistent(matrix)
        recommended_k = analytics.recommend_cluster_count(
            dendrogram, k_max=max(2, min(m - 1, 30))) if m >= 3 else m
        if len(consistent_ids) >= 2:
            projection = analytics.ccpca_project(inconsistent_ids, consistent_ids,
                                                 records, alpha=alpha)
            recommended_alpha = analytics.recommend_alpha(inconsistent_ids,
                                                          consistent_ids, records)
        else:
            # nothing to contrast against: plain PCA of the inconsistent set
            projection = analytics.ccpca_project(inconsistent_ids, inconsistent_ids,
                                                 records, alpha=0.0)
            projection.method = "pca"
        summaries = analytics.summarize_clusters(dendrogram, k_eff, inconsistent_ids,
                                                 projection.points, federated_pred,
                                                 labels, grid=grid)

    payload = {
        "run": run.run_id,
        "round": round_index,
        "source": source,
        "k": k_eff,
        "alpha": float(alpha),
        "defaults": {"k": k_defaulted, "alpha": alpha_defaulted},
        "labels_available": labels is not None,
        "inconsistency": report.to_json(),
        "projection": projection.to_json() if projection is not None else None,
        "clusters": [s.to_json() for s in summaries],
        "density": summaries[0].density if summaries else None,
        "recommended": {"k": recommended_k, "alpha": recommended_alpha},
    }
    assert_finite_payload(payload)
    ctx = AnalysisContext(run=run, round_index=round_index, source=source, k=k_eff,
                          alpha=float(alpha), records=records, labels=labels,
                          standalone_pred=standalone_pred, federated_pred=federated_pred,
                          report=report, dendrogram=dendrogram, projection=projection,
                          summaries=summaries)
    return payload, ctx


def dimensions_view(ctx: AnalysisContext, cluster_id: int, entrance: str = "ccpca",
                    channel: int | None = None, layer: str | None = None) -> dict:
    summary = ctx.cluster(cluster_id)
    members = np.asarray(summary.members, dtype=np.int64)
    shape = ctx.run.dataset.manifest.shape
    if entrance == "ccpca":
        if len(members) < 2:
            raise InputError("the contrastive entrance needs a cluster with at "
                             "least two records")
        others = np.setdiff1d(np.arange(ctx.records.shape[0]), members)
        if len(others) < 2:
            raise InputError("not enough background records to contrast the cluster")
        projection = analytics.ccpca_project(members, others, ctx.records, alpha=ctx.alpha)
        weights = analytics.dimension_weights(projection)
        payload = {"entrance": "ccpca", "cluster": cluster_id, "alpha": ctx.alpha,
                   "shape": list(shape), "weights": weights.tolist()}
        if len(shape) == 3:
            h, w, c = shape
            ch = 0 if channel is None else int(channel)
            if not (0 <= ch < c):
                raise InputError(f"channel {ch} out of range for {c}-channel records")
            grids = weights.reshape(2, h, w, c)[:, :, :, ch]
            payload["channel"] = ch
            payload["maps"] = grids.tolist()
    elif entrance == "gradcam":
        require_cnn(ctx.run.spec)
        snapshot = ctx.run.snapshot(ctx.round_index)
        pair = analytics.grad_cam_pair(ctx.run.spec, ctx.run.param_vector(ctx.run.standalone),
                                       snapshot.federated, ctx.records[members], layer=layer)
        payload = {"entrance": "gradcam", "cluster": cluster_id, **pair.to_json()}
    else:
        raise InputError(f"unknown entrance {entrance!r}; use ccpca or gradcam")
    assert_finite_payload(payload)
    return payload


def label_matrix_view(ctx: AnalysisContext, grid: int = analytics.DEFAULT_GRID,
                      cluster_id: int | None = None) -> dict:
    selected = ctx.cluster(cluster_id).members if cluster_id is not None else None
    if ctx.projection is None:
        raise InputError("no projection available; run an analysis with "
                         "at least two inconsistent records first")
    payload = analytics.label_matrix(ctx.labels, ctx.federated_pred,
                                     ctx.projection.points,
                                     selected_cluster_ids=selected,
                                     grid=grid,
                                     label_names=ctx.run.dataset.manifest.label_names)
    payload["cluster"] = cluster_id
    assert_finite_payload(payload)
    return payload


def dimension_distribution_view(ctx: AnalysisContext, dim: int, bins: int = 20,
                                scale: str = "linear",
                                cluster_id: int | None = None) -> dict:
    cluster_ids = ctx.cluster(cluster_id).members if cluster_id is not None else None
    payload = analytics.dimension_distribution(ctx.records, ctx.report.ids,
                                               ctx.run.dataset.manifest, dim,
                                               bins=bins, scale=scale,
                                               cluster_ids=cluster_ids)
    assert_finite_payload(payload)
    return payload


def record_view(ctx: AnalysisContext, record_id: int) -> dict:
    n = ctx.records.shape[0]
    if not (0 <= record_id < n):
        raise NotFoundError(f"no record {record_id} in the analyzed input set")
    payload = {
        "id": record_id,
        "features": ctx.records[record_id].tolist(),
        "shape": list(ctx.run.dataset.manifest.shape),
        "true_label": int(ctx.labels[record_id]) if ctx.labels is not None else None,
        "standalone_label": int(ctx.standalone_pred[record_id]),
        "federated_label": int(ctx.federated_pred[record_id]),
        "inconsistent": bool(record_id in set(ctx.report.ids.tolist())),
    }
    assert_finite_payload(payload)
    return payload


def metrics_view(run: RunRecord) -> dict:
    payload = analytics.round_metrics(run.snapshots)
    assert_finite_payload(payload)
    return payload


def param_projection_view(run: RunRecord, start: int | None = None, end: int | None = None,
                          layer: str = "all") -> dict:
    start = 1 if start is None else start
    end = run.rounds if end is None else end
    trajectory = analytics.project_parameters(run.snapshots, start, end, layer=layer,
                                              seed=run.seed)
    payload = trajectory.to_json()
    payload["layers"] = run.param_vector(run.initial).layer_names()
    assert_finite_payload(payload)
    return payload


def track_view(run: RunRecord, annotation: Annotation, round_index: int) -> dict:
    """Both models' labels on the annotated records at the given round.

    Flags equal membership in that round's inconsistency report: the same
    prediction path decides both.
    """
    report = analytics.find_inconsistent(run.spec, run.param_vector(run.standalone),
                                         run.snapshot(round_index).federated,
                                         run.dataset.records, round_index=round_index)
    net = build_network(run.spec)
    ids = np.asarray(annotation.record_ids, dtype=np.int64)
    if len(ids) and ids.max() >= run.dataset.n:
        raise InputError(f"annotation references record {int(ids.max())} outside the dataset")
    standalone_labels = net.predict(run.param_vector(run.standalone), run.dataset.records[ids])
    federated_labels = net.predict(run.snapshot(round_index).federated,
                                   run.dataset.records[ids])
    inconsistent = set(report.ids.tolist())
    rows = [{"record": int(r),
             "standalone_label": int(standalone_labels[i]),
             "federated_label": int(federated_labels[i]),
             "still_inconsistent": bool(int(r) in inconsistent)}
            for i, r in enumerate(ids)]
    payload = {"annotation": annotation.annotation_id, "round": round_index,
               "records": rows,
               "inconsistent_count": sum(r["still_inconsistent"] for r in rows)}
    assert_finite_payload(payload)
    return payload
