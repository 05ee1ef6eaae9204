import json
import time

import pytest
from fastapi.testclient import TestClient

from hetlab.api import create_app
from hetlab.scenario import run_scenario
from hetlab.storage import DataStore

from conftest import flip_scenario

MANIFEST = {"shape": [2], "ranges": [[0.0, 1.0], [0.0, 1.0]], "labels": ["a", "b"]}
CSV = "f0,f1,label\n0.1,0.2,0\n0.9,0.8,1\n0.4,0.5,0\n"


@pytest.fixture(scope="module")
def client(tmp_path_factory):
    root = tmp_path_factory.mktemp("apistore")
    store = DataStore(root)
    record = run_scenario(flip_scenario())
    store.save_run(record)
    app = create_app(root)
    with TestClient(app) as c:
        c.run_id = record.run_id
        c.rounds = record.rounds
        c.store_root = root
        yield c


def analyze(client, **overrides):
    body = {"input-source": "local"}
    body.update(overrides)
    r = client.post(f"/v1/runs/{client.run_id}/rounds/{client.rounds}/analyze", json=body)
    assert r.status_code == 200, r.text
    return r


class TestMetrics:
    def test_three_series_of_length_r(self, client):
        r = client.get(f"/v1/runs/{client.run_id}/metrics")
        body = r.json()
        assert len(body["train_loss"]) == client.rounds
        assert len(body["test_acc"]) == client.rounds
        assert len(body["total_acc"]) == client.rounds

    def test_accuracies_in_unit_interval(self, client):
        body = client.get(f"/v1/runs/{client.run_id}/metrics").json()
        for key in ("test_acc", "total_acc"):
            assert all(0.0 <= v <= 1.0 for v in body[key])

    def test_json_reconstructs_metrics_csv_exactly(self, client):
        body = client.get(f"/v1/runs/{client.run_id}/metrics").json()
        lines = ["round,train_loss,test_acc,total_acc"]
        for i, r in enumerate(body["rounds"]):
            lines.append(f"{r},{body['train_loss'][i]!r},"
                         f"{body['test_acc'][i]!r},{body['total_acc'][i]!r}")
        csv_path = DataStore(client.store_root).run_dir(client.run_id) / "metrics.csv"
        assert "\n".join(lines) + "\n" == csv_path.read_text(encoding="utf-8")

    def test_unknown_run_404(self, client):
        r = client.get("/v1/runs/nope/metrics")
        assert r.status_code == 404
        assert r.json()["code"] == "not-found"


class TestParamProjection:
    def test_full_window(self, client):
        r = client.get(f"/v1/runs/{client.run_id}/param-projection")
        body = r.json()
        assert len(body["federated"]) == client.rounds
        assert len(body["local"]) == client.rounds
        assert body["cosines"][0] is None
        assert "dense1" in body["layers"]

    def test_layer_restriction_same_round_count(self, client):
        full = client.get(f"/v1/runs/{client.run_id}/param-projection").json()
        layer = client.get(f"/v1/runs/{client.run_id}/param-projection",
                           params={"layer": "dense1"}).json()
        assert len(layer["federated"]) == len(full["federated"])
        assert len(layer["basis"][0]) < len(full["basis"][0])

    def test_unknown_layer_bad_input(self, client):
        r = client.get(f"/v1/runs/{client.run_id}/param-projection",
                       params={"layer": "zz"})
        assert r.status_code == 400
        assert r.json()["code"] == "bad-input"

    def test_window_params(self, client):
        r = client.get(f"/v1/runs/{client.run_id}/param-projection",
                       params={"from": 2, "to": 4})
        assert r.json()["rounds"] == [2, 3, 4]


class TestAnalyze:
    def test_defaults_applied_when_omitted(self, client):
        body = analyze(client).json()
        assert body["alpha"] == 10.0
        assert body["defaults"] == {"k": True, "alpha": True}
        m = body["inconsistency"]["m"]
        assert body["k"] == min(8, m)

    def test_identical_requests_identical_bytes(self, client):
        a = analyze(client, k=4, alpha=2.0).content
        b = analyze(client, k=4, alpha=2.0).content
        assert a == b

    def test_offline_workflow_matches_api(self, client):
        from hetlab import workflow
        run = DataStore(client.store_root).load_run(client.run_id)
        offline, _ = workflow.analyze_round(run, client.rounds, source="local")
        api = analyze(client).json()
        assert api["inconsistency"] == offline["inconsistency"]
        assert api["projection"]["points"] == offline["projection"]["points"]

    def test_k_larger_than_m_rejected(self, client):
        m = analyze(client).json()["inconsistency"]["m"]
        r = client.post(f"/v1/runs/{client.run_id}/rounds/{client.rounds}/analyze",
                        json={"k": m + 1})
        assert r.status_code == 400

    def test_snake_case_source_accepted(self, client):
        r = client.post(f"/v1/runs/{client.run_id}/rounds/{client.rounds}/analyze",
                        json={"input_source": "generated-sparse"})
        assert r.status_code == 200
        assert r.json()["labels_available"] is False


class TestDimensions:
    def top_cluster(self, client):
        return analyze(client).json()["clusters"][0]["id"]

    def test_gradcam_on_mlp_is_422(self, client):
        cid = self.top_cluster(client)
        r = client.get(f"/v1/analysis/cluster/{cid}/dimensions",
                       params={"entrance": "gradcam"})
        assert r.status_code == 422
        assert r.json()["code"] == "unsupported-architecture"

    def test_ccpca_weights_unit_norm(self, client):
        cid = self.top_cluster(client)
        r = client.get(f"/v1/analysis/cluster/{cid}/dimensions",
                       params={"entrance": "ccpca"})
        body = r.json()
        for w in body["weights"]:
            assert abs(sum(v * v for v in w) - 1.0) <= 1e-8
        assert body["maps"], "image-shaped records expose channel maps"

    def test_unknown_cluster_404(self, client):
        analyze(client)
        r = client.get("/v1/analysis/cluster/999/dimensions")
        assert r.status_code == 404


class TestLabelMatrix:
    def test_counts_sum_to_n(self, client):
        analyze(client)
        r = client.get("/v1/analysis/label-matrix", params={"grid": 8})
        body = r.json()
        run = DataStore(client.store_root).load_run(client.run_id)
        total = sum(len(cell["members"]) for row in body["cells"] for cell in row)
        assert total == run.dataset.n

    def test_extra_rows_listed_after_ground_truth(self, client):
        analyze(client)
        body = client.get("/v1/analysis/label-matrix").json()
        cols = body["columns"]
        assert body["rows"][:len(cols)] == cols

    def test_generated_source_has_no_matrix(self, client):
        analyze(client, **{"input-source": "generated-sparse"})
        r = client.get("/v1/analysis/label-matrix")
        assert r.status_code == 400
        analyze(client)  # restore local analysis for later tests


class TestRecordsAndDistribution:
    def test_record_details(self, client):
        body = analyze(client).json()
        rid = body["inconsistency"]["ids"][0]
        r = client.get(f"/v1/analysis/record/{rid}")
        rec = r.json()
        assert rec["inconsistent"] is True
        assert rec["standalone_label"] != rec["federated_label"]
        assert len(rec["features"]) == 64

    def test_distribution_percentages(self, client):
        analyze(client)
        r = client.get("/v1/analysis/dimension/3/distribution", params={"bins": 12})
        body = r.json()
        assert abs(sum(body["overall"]["percentages"]) - 100.0) <= 1e-9


class TestAnnotations:
    def test_create_list_track_delete(self, client):
        body = analyze(client).json()
        ids = body["inconsistency"]["ids"][:5]
        r = client.post("/v1/annotations", json={"record_ids": ids, "note": "suspicious",
                                                 "round": client.rounds})
        assert r.status_code == 201
        ann = r.json()
        listed = client.get("/v1/annotations").json()["annotations"]
        assert any(a["id"] == ann["id"] for a in listed)

        track = client.get(f"/v1/annotations/{ann['id']}/track",
                           params={"round": client.rounds}).json()
        flags = {row["record"]: row["still_inconsistent"] for row in track["records"]}
        inconsistent = set(body["inconsistency"]["ids"])
        for rid, flag in flags.items():
            assert flag == (rid in inconsistent)

        assert client.delete(f"/v1/annotations/{ann['id']}").status_code == 200
        r = client.get(f"/v1/annotations/{ann['id']}/track", params={"round": 1})
        assert r.status_code == 404

    def test_set_combine_cross_check(self, client):
        body = analyze(client).json()
        top = body["clusters"][0]
        ann = client.post("/v1/annotations",
                          json={"record_ids": top["members"][:3] + [0],
                                "note": "", "round": client.rounds}).json()
        combined = client.post("/v1/analysis/set-combine",
                               json={"annotation_ids": [ann["id"]],
                                     "cluster": top["id"],
                                     "mode": "intersection"}).json()
        assert combined["record_ids"] == sorted(top["members"][:3])
        union = client.post("/v1/analysis/set-combine",
                            json={"annotation_ids": [ann["id"]], "cluster": top["id"],
                                  "mode": "union"}).json()
        assert set(union["record_ids"]) == set(top["members"]) | {0}
        client.delete(f"/v1/annotations/{ann['id']}")


class TestDatasetsAndRuns:
    def test_upload_validates_and_dedupes(self, client):
        files = {"csv": ("d.csv", CSV), "manifest": ("m.json", json.dumps(MANIFEST))}
        a = client.post("/v1/datasets", files=files)
        assert a.status_code == 200
        b = client.post("/v1/datasets", files=files)
        assert a.json()["id"] == b.json()["id"]

    def test_out_of_range_value_names_row(self, client):
        bad = "f0,f1,label\n0.1,3.3,0\n"
        files = {"csv": ("d.csv", bad), "manifest": ("m.json", json.dumps(MANIFEST))}
        r = client.post("/v1/datasets", files=files)
        assert r.status_code == 400
        assert "row 1" in r.json()["message"]

    def test_background_run_reaches_done(self, client):
        files = {"csv": ("d.csv", CSV), "manifest": ("m.json", json.dumps(MANIFEST))}
        dataset_id = client.post("/v1/datasets", files=files).json()["id"]
        request = {
            "name": "tiny", "seed": 3, "rounds": 2,
            "model": {"kind": "mlp", "input": [2], "classes": 2, "seed": 3,
                      "layers": [{"width": 4, "activation": "relu"},
                                 {"width": 2, "activation": "softmax-output"}]},
            "clients": [{"id": "u", "dataset": {"id": dataset_id},
                         "split": 0.7, "epochs": 1, "batch": 2, "lr": 0.1}],
        }
        run_id = client.post("/v1/runs", json=request).json()["id"]
        deadline = time.time() + 30
        status = None
        while time.time() < deadline:
            status = client.get(f"/v1/runs/{run_id}/status").json()
            if status["state"] in ("done", "failed"):
                break
            time.sleep(0.1)
        assert status and status["state"] == "done", status
        metrics = client.get(f"/v1/runs/{run_id}/metrics").json()
        assert len(metrics["rounds"]) == 2
        assert run_id in client.get("/v1/runs").json()["runs"]
