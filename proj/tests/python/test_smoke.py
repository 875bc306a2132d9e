"""Smoke tests for the python bindings."""

import json
import math

import pytest

import nasreg


def test_poly_augment_worked_example():
    assert nasreg.poly_augment([2.0, 3.0], 2) == [1.0, 2.0, 3.0, 4.0, 6.0, 9.0]


def test_poly_augment_rejects_zero_order():
    with pytest.raises(Exception):
        nasreg.poly_augment([1.0], 0)


def test_metrics_worked_example():
    m = nasreg.compute_metrics([2.0, 4.0], [1.0, 5.0])
    assert m["mape"] == pytest.approx(0.375, abs=1e-12)
    assert m["rmse"] == pytest.approx(1.0, abs=1e-12)
    assert m["std"] == pytest.approx(1.0, abs=1e-12)
    assert m["n"] == 2


def test_metrics_zero_target_drops_mape():
    m = nasreg.compute_metrics([0.0, 1.0], [0.5, 1.0])
    assert m["mape"] is None
    assert m["rmse"] > 0


def test_spec_roundtrip_through_encoding():
    spec = nasreg.ArchitectureSpec(
        hidden_layers=1,
        neurons_per_layer=10,
        activation="LeakyReLU",
        batch_size=16,
        learning_rate=0.0449,
        loss="L1",
    )
    point = nasreg.encode_spec(spec)
    assert len(point) == 6
    assert all(0.0 <= v <= 1.0 for v in point)
    back = nasreg.decode_point(point)
    assert back.hidden_layers == 1
    assert back.neurons_per_layer == 10
    assert back.activation == "LeakyReLU"
    assert back.batch_size == 16
    assert back.loss == "L1"
    assert math.isclose(back.learning_rate, 0.0449, rel_tol=1e-6)


def test_spec_validation():
    with pytest.raises(Exception):
        nasreg.ArchitectureSpec(
            hidden_layers=0,
            neurons_per_layer=10,
            activation="ReLU",
            batch_size=8,
            learning_rate=1e-3,
            loss="L2",
        )


def test_dataset_and_csv(tmp_path):
    csv = tmp_path / "d.csv"
    csv.write_text("f,P,Ra\n10,4,120\n15,5,95\n20,6,80\n")
    d = nasreg.load_csv(str(csv))
    assert d.n_rows == 3
    assert d.n_features == 2
    assert d.feature_names == ["f", "P"]
    assert d.target_name == "Ra"
    assert d.targets == [120.0, 95.0, 80.0]

    with pytest.raises(nasreg.DataError):
        nasreg.load_csv(str(tmp_path / "missing.csv"))


def test_linear_baseline_recovers_a_line():
    xs = [[float(i)] for i in range(20)]
    ys = [2.0 * x[0] + 1.0 for x in xs]
    w = nasreg.fit_linear(xs, ys, penalty="none")
    assert w[0] == pytest.approx(2.0, abs=1e-8)
    assert w[-1] == pytest.approx(1.0, abs=1e-8)


def test_knn_exact_match():
    x = [[0.0], [1.0], [2.0]]
    y = [5.0, 7.0, 9.0]
    assert nasreg.knn_predict(x, y, [1.0], 1) == 7.0


def test_gpr_interpolates():
    x = [[i * 0.1] for i in range(10)]
    y = [math.cos(3.0 * row[0]) for row in x]
    mean, var = nasreg.gpr_fit_predict(x, y, x)
    for got, want in zip(mean, y):
        assert got == pytest.approx(want, abs=0.05)
    assert all(v >= 0.0 for v in var)


def _toy_dataset(n=60, seed=3):
    import random

    rng = random.Random(seed)
    rows, targets = [], []
    for _ in range(n):
        x1 = rng.uniform(-1, 1)
        x2 = rng.uniform(-1, 1)
        rows.append([x1, x2])
        targets.append(x1 * x1 + 0.3 * math.sin(6 * x2) + rng.gauss(0, 0.05))
    return nasreg.Dataset(rows, targets, ["x1", "x2"])


def test_pipeline_end_to_end(tmp_path):
    data = _toy_dataset()
    config = {
        "seed": 11,
        "vae": {"multiplier": 1, "epochs": 10, "batch_size": 8, "learning_rate": 0.001},
        "poly_order": 2,
        "bo": {"budget": 2, "strategy": "EI", "n_candidates": 64},
        "train": {"epochs": 20},
    }
    result = nasreg.run_pipeline(data, json.dumps(config))
    assert math.isfinite(result["metrics"]["rmse"])
    assert len(result["bo_trace"]) == 2

    artifact = result["artifact"]
    pred = artifact.predict([0.3, -0.4])
    assert math.isfinite(pred)
    batch = artifact.predict_batch([[0.3, -0.4], [0.0, 0.0]])
    assert batch[0] == pred

    path = tmp_path / "artifact.json"
    nasreg.save_artifact(artifact, str(path))
    loaded = nasreg.load_artifact(str(path))
    assert loaded.predict([0.3, -0.4]) == pred
    assert json.loads(artifact.to_json())["format_version"] == 1


def test_pipeline_rejects_bad_config():
    data = _toy_dataset()
    with pytest.raises(Exception):
        nasreg.run_pipeline(data, json.dumps({"no_such_key": 1}))
