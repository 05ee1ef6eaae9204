"""Frozen JSON fixtures for UI tests and offline inspection.

``export_fixtures`` renders every analytical view of a finished run through
the same serializers the HTTP API uses and writes them with canonical
formatting, so reruns with fixed seeds are byte-identical.  ``index.json``
maps API routes to fixture files for replay against a stubbed client.
"""

from __future__ import annotations

from pathlib import Path

from . import workflow
from .errors import HetlabError
from .models import CNNNetwork, build_network
from .storage import RunRecord, atomic_write_json


def export_fixtures(run: RunRecord, out_dir, round_index: int | None = None,
                    source: str = "local") -> dict:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    round_index = run.rounds if round_index is None else round_index
    index: dict[str, str] = {}

    def emit(route: str, filename: str, payload):
        atomic_write_json(out / filename, payload)
        index[route] = filename

    rid = run.run_id
    emit("/v1/runs", "runs.json", {"runs": [rid]})
    emit(f"/v1/runs/{rid}/status", "status.json",
         {"state": "done", "round": run.rounds, "rounds": run.rounds})
    emit(f"/v1/runs/{rid}/metrics", "metrics.json", workflow.metrics_view(run))
    emit(f"/v1/runs/{rid}/param-projection", "param_projection.json",
         workflow.param_projection_view(run))

    analysis, ctx = workflow.analyze_round(run, round_index, source=source)
    emit(f"/v1/runs/{rid}/rounds/{round_index}/analyze", "analyze.json", analysis)

    if ctx.summaries:
        top = ctx.summaries[0]
        try:
            dims = workflow.dimensions_view(ctx, top.cluster_id, entrance="ccpca")
            emit(f"/v1/analysis/cluster/{top.cluster_id}/dimensions?entrance=ccpca",
                 "dimensions_ccpca.json", dims)
            first_dim = int(max(range(len(dims["weights"][0])),
                                key=lambda d: dims["weights"][0][d]))
            emit(f"/v1/analysis/dimension/{first_dim}/distribution",
                 "dimension_distribution.json",
                 workflow.dimension_distribution_view(ctx, first_dim))
        except HetlabError:
            pass
        if isinstance(build_network(run.spec), CNNNetwork):
            emit(f"/v1/analysis/cluster/{top.cluster_id}/dimensions?entrance=gradcam",
                 "dimensions_gradcam.json",
                 workflow.dimensions_view(ctx, top.cluster_id, entrance="gradcam"))
        if ctx.labels is not None:
            emit(f"/v1/analysis/label-matrix?cluster={top.cluster_id}",
                 "label_matrix.json",
                 workflow.label_matrix_view(ctx, cluster_id=top.cluster_id))
        if ctx.report.m:
            first = int(ctx.report.ids[0])
            emit(f"/v1/analysis/record/{first}", "record.json",
                 workflow.record_view(ctx, first))

    emit("/v1/annotations", "annotations.json", {"annotations": []})
    atomic_write_json(out / "index.json", index)
    return index


def fixture_bytes(out_dir) -> dict[str, str]:
    """filename -> exact text of every fixture, for byte-stability checks."""
    out = Path(out_dir)
    return {p.name: p.read_text(encoding="utf-8") for p in sorted(out.glob("*.json"))}
