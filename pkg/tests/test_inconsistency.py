import numpy as np
import pytest

from hetlab.analytics import find_inconsistent
from hetlab.analytics.inconsistency import InconsistencyReport
from hetlab.errors import InputError
from hetlab.models import init_model

from conftest import mlp_spec


def test_identical_models_have_no_inconsistency(rng):
    spec = mlp_spec()
    pv = init_model(spec)
    report = find_inconsistent(spec, pv, pv, rng.normal(0, 1, (30, 4)))
    assert report.m == 0 and report.ids.tolist() == []


def test_opposite_constant_models_disagree_everywhere(rng):
    spec = mlp_spec(input_dim=4, classes=2, hidden=(3,))
    base = init_model(spec).with_values(np.zeros(23))
    a = base.copy()
    a.tensor("dense2/b")[...] = np.array([10.0, 0.0])
    b = base.copy()
    b.tensor("dense2/b")[...] = np.array([0.0, 10.0])
    report = find_inconsistent(spec, a, b, rng.normal(0, 1, (25, 4)))
    assert report.m == 25
    assert np.all(report.standalone_labels == 0)
    assert np.all(report.federated_labels == 1)


def test_ids_strictly_increasing_and_labels_differ(rng):
    spec = mlp_spec(input_dim=4, classes=3, hidden=(5,), seed=2)
    a = init_model(spec)
    b = a.with_values(a.values + rng.normal(0, 0.8, a.size))
    report = find_inconsistent(spec, a, b, rng.normal(0, 1, (200, 4)))
    if report.m:
        assert np.all(np.diff(report.ids) > 0)
        assert np.all(report.standalone_labels != report.federated_labels)


def test_report_invariant_enforced():
    with pytest.raises(InputError):
        InconsistencyReport(round_index=1, ids=np.array([3]),
                            standalone_labels=np.array([1]),
                            federated_labels=np.array([1]))
    with pytest.raises(InputError):
        InconsistencyReport(round_index=1, ids=np.array([3, 3]),
                            standalone_labels=np.array([0, 0]),
                            federated_labels=np.array([1, 1]))


def test_analytics_never_imports_training_or_storage():
    """Information boundary: analytics consumes (federated parameters, own
    updates, own dataset) only; auditable from its import statements."""
    import re
    from pathlib import Path

    import hetlab.analytics as pkg

    # trajectory legitimately types against RoundSnapshot; everything else in
    # the training loop and all stores are off limits
    forbidden = re.compile(
        r"^\s*(from|import)\s+(hetlab\.)?\.?\.?(scenario|storage|session|api|cli)\b",
        re.MULTILINE)
    run_state = re.compile(r"run_federation|train_local|train_standalone|DataStore")
    for source in Path(pkg.__file__).parent.glob("*.py"):
        text = source.read_text(encoding="utf-8")
        assert not forbidden.search(text), f"{source.name} imports a forbidden module"
        assert not run_state.search(text), f"{source.name} reaches into training/storage"
