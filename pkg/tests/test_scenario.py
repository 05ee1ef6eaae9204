import numpy as np
import pytest

from hetlab.errors import InputError
from hetlab.scenario import run_scenario
from hetlab.storage import scenario_run_id

from conftest import flip_scenario, one_client_scenario


def test_unknown_injection_client_rejected():
    scenario = flip_scenario()
    scenario["injections"][0]["label-flip"]["client"] = "ghost"
    with pytest.raises(InputError, match="ghost"):
        run_scenario(scenario)


def test_injection_class_range_checked():
    scenario = flip_scenario()
    scenario["injections"][0]["label-flip"]["from"] = 9
    with pytest.raises(InputError):
        run_scenario(scenario)


def test_phase_must_fit_round_range():
    scenario = flip_scenario(phase=(1, 99))
    with pytest.raises(InputError):
        run_scenario(scenario)


def test_flip_on_analyzed_client_rejected():
    scenario = flip_scenario()
    scenario["injections"][0]["label-flip"]["client"] = "c1"
    with pytest.raises(InputError, match="analyzed"):
        run_scenario(scenario)


def test_run_id_depends_only_on_content():
    a = scenario_run_id({"seed": 1, "rounds": 2})
    b = scenario_run_id({"rounds": 2, "seed": 1})
    c = scenario_run_id({"rounds": 3, "seed": 1})
    assert a == b and a != c


def test_class_drop_removes_class(tmp_path):
    scenario = one_client_scenario(per_class=20, rounds=1)
    scenario["clients"].append({
        "id": "peer",
        "dataset": {"blobs": {"shape": [16], "classes": 3, "per_class": 20, "seed": 8}},
        "split": 0.8, "epochs": 1, "batch": 8, "lr": 0.1})
    scenario["injections"] = [{"class-drop": {"class": 0, "client": "peer"}}]
    record = run_scenario(scenario)
    assert record.rounds == 1  # ran through


def test_imbalance_keep_fraction_bounds():
    scenario = one_client_scenario(rounds=1)
    scenario["injections"] = [{"imbalance": {"class": 0, "client": "solo",
                                             "keep-fraction": 0.0}}]
    with pytest.raises(InputError):
        run_scenario(scenario)


def test_two_phase_schedule_changes_training_labels():
    scenario = flip_scenario(per_class=20, rounds=4, phase=(1, 2))
    record = run_scenario(scenario)
    assert record.rounds == 4


def test_standalone_budget_defaults_to_rounds_times_epochs():
    record = run_scenario(flip_scenario(per_class=15, rounds=3))
    assert record.standalone_epochs == 3 * 1


def test_rerun_is_bit_identical():
    a = run_scenario(flip_scenario(per_class=15, rounds=3))
    b = run_scenario(flip_scenario(per_class=15, rounds=3))
    assert a.run_id == b.run_id
    assert a.metrics_csv() == b.metrics_csv()
    assert np.array_equal(a.standalone, b.standalone)
    for sa, sb in zip(a.snapshots, b.snapshots):
        assert np.array_equal(sa.federated.values, sb.federated.values)
