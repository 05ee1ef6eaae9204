import json

import numpy as np
import pytest

from hetlab.cli import main
from hetlab.storage import canonical_json, read_json

from conftest import flip_scenario


@pytest.fixture(scope="module")
def run_dir(tmp_path_factory):
    base = tmp_path_factory.mktemp("cli")
    scenario_path = base / "scenario.json"
    scenario_path.write_text(canonical_json(flip_scenario(per_class=30, rounds=4)))
    out = base / "store"
    assert main(["run", str(scenario_path), "--out", str(out)]) == 0
    runs = list((out / "runs").iterdir())
    assert len(runs) == 1
    return base, scenario_path, runs[0]


class TestRun:
    def test_artifacts_present(self, run_dir):
        _, _, rdir = run_dir
        assert (rdir / "run.json").exists()
        assert (rdir / "metrics.csv").exists()
        run = read_json(rdir / "run.json")
        assert len(run["snapshots"]) == 4
        assert len(list((rdir / "snapshots").glob("round-*.json"))) == 4

    def test_rerun_identical_metrics_csv(self, run_dir, tmp_path):
        base, scenario_path, rdir = run_dir
        out2 = tmp_path / "store2"
        assert main(["run", str(scenario_path), "--out", str(out2)]) == 0
        other = next((out2 / "runs").iterdir())
        assert other.name == rdir.name
        assert (other / "metrics.csv").read_bytes() == (rdir / "metrics.csv").read_bytes()
        assert (other / "run.json").read_bytes() == (rdir / "run.json").read_bytes()


class TestAnalyze:
    def test_report_shape_and_defaults(self, run_dir, tmp_path, capsys):
        _, _, rdir = run_dir
        out = tmp_path / "report.json"
        assert main(["analyze", str(rdir), "--round", "4", "--out", str(out)]) == 0
        report = read_json(out)
        assert report["alpha"] == 10.0
        assert report["k"] == min(8, report["inconsistency"]["m"])
        assert report["matrix"] is not None
        assert {"inconsistency", "clusters", "projection", "matrix"} <= set(report)

    def test_k_larger_than_m_is_exit_2(self, run_dir):
        _, _, rdir = run_dir
        assert main(["analyze", str(rdir), "--round", "4", "--k", "100000"]) == 2

    def test_matches_api_analysis(self, run_dir):
        from fastapi.testclient import TestClient

        from hetlab.api import create_app

        base, _, rdir = run_dir
        app = create_app(rdir.parent.parent)
        with TestClient(app) as client:
            api = client.post(f"/v1/runs/{rdir.name}/rounds/4/analyze", json={}).json()
        import io
        from contextlib import redirect_stdout

        buf = io.StringIO()
        with redirect_stdout(buf):
            assert main(["analyze", str(rdir), "--round", "4"]) == 0
        cli = json.loads(buf.getvalue())
        assert cli["inconsistency"] == api["inconsistency"]
        assert cli["clusters"] == api["clusters"]


class TestOracles:
    def test_rank_matrix_oracle_matches_analytics(self, tmp_path, rng, capsys):
        from hetlab.analytics import rank_distance_matrix

        X = rng.normal(0, 1, (20, 3))
        problem = tmp_path / "p.json"
        problem.write_text(json.dumps({"records": X.tolist(), "ids": [0, 3, 7, 11]}))
        assert main(["oracle", "rank-matrix", "--input", str(problem)]) == 0
        out = json.loads(capsys.readouterr().out)
        assert np.array_equal(np.asarray(out["matrix"]),
                              rank_distance_matrix(X, [0, 3, 7, 11]))

    def test_dendrogram_oracle_matches_analytics(self, tmp_path, rng, capsys):
        from hetlab.analytics import average_linkage

        M = rng.integers(1, 30, (7, 7)).astype(float)
        M = (M + M.T) / 2
        np.fill_diagonal(M, 0)
        problem = tmp_path / "p.json"
        problem.write_text(json.dumps({"matrix": M.tolist()}))
        assert main(["oracle", "dendrogram", "--input", str(problem)]) == 0
        out = json.loads(capsys.readouterr().out)
        ours = average_linkage(M).to_json()
        assert out == json.loads(json.dumps(ours))

    def test_exact_pca_oracle_angles(self, tmp_path, rng, capsys):
        from hetlab.analytics import randomized_top_basis
        from hetlab.oracles import principal_angle_cosines

        # planted top-2 structure: the randomized basis must recover it
        U = np.linalg.qr(rng.normal(0, 1, (50, 2)))[0]
        V = np.linalg.qr(rng.normal(0, 1, (20, 2)))[0]
        X = U @ np.diag([40.0, 25.0]) @ V.T + rng.normal(0, 0.1, (50, 20))
        problem = tmp_path / "p.json"
        problem.write_text(json.dumps({"records": X.tolist(), "components": 2}))
        assert main(["oracle", "exact-pca", "--input", str(problem)]) == 0
        exact = np.asarray(json.loads(capsys.readouterr().out)["basis"])
        rand = randomized_top_basis(X - X.mean(axis=0), k=2, seed=0)
        assert principal_angle_cosines(exact, rand).min() >= 0.999


class TestFixtures:
    def test_byte_stable_and_schema(self, run_dir, tmp_path):
        _, _, rdir = run_dir
        out1, out2 = tmp_path / "f1", tmp_path / "f2"
        assert main(["export-fixtures", str(rdir), "--out", str(out1)]) == 0
        assert main(["export-fixtures", str(rdir), "--out", str(out2)]) == 0
        from hetlab.fixtures import fixture_bytes

        a, b = fixture_bytes(out1), fixture_bytes(out2)
        assert a.keys() == b.keys()
        assert a == b

        index = json.loads((out1 / "index.json").read_text())
        analyze_file = next(v for k, v in index.items() if k.endswith("/analyze"))
        body = json.loads((out1 / analyze_file).read_text())
        assert {"inconsistency", "clusters", "projection", "k", "alpha"} <= set(body)
        metrics = json.loads((out1 / index[next(k for k in index if k.endswith('/metrics'))]).read_text())
        assert {"rounds", "train_loss", "test_acc", "total_acc"} <= set(metrics)


class TestSynth:
    def test_writes_loadable_dataset(self, tmp_path):
        out = tmp_path / "blobs"
        assert main(["synth", "--shape", "4", "--classes", "3", "--per-class", "5",
                     "--seed", "2", "--out", str(out)]) == 0
        from hetlab.data import load_dataset_files

        ds = load_dataset_files(out / "data.csv", out / "manifest.json")
        assert ds.n == 15 and ds.labels is not None


def test_unknown_scenario_file_is_exit_2(tmp_path):
    assert main(["run", str(tmp_path / "missing.json"), "--out", str(tmp_path)]) == 2
