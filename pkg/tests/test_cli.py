import json

import numpy as np
import pandas as pd
import pytest

from rpforest.cli import main, parse_args
from rpforest.core.persist import load_model
from rpforest.core.types import forest_predict_many


@pytest.fixture
def four_csv(tmp_path):
    path = tmp_path / "four.csv"
    pd.DataFrame({"y": [1.0, 1.0, 3.0, 3.0], "x1": [0.1, 0.2, 0.8, 0.9]}).to_csv(path, index=False)
    return path


@pytest.fixture
def train_csv(tmp_path, additive_data):
    path = tmp_path / "train.csv"
    table = pd.DataFrame(additive_data.x, columns=["a", "b", "c"])
    table.insert(0, "y", additive_data.y)
    table.to_csv(path, index=False)
    return path


def _fit(data, out, *extra):
    return main(["fit", "--data", str(data), "--out", str(out), *extra])


FOUR_POINT_FLAGS = ("--ntrees", "1", "--nsplits", "1", "--t-try", "1", "--split-try", "all", "--no-bootstrap")


class TestFit:
    def test_writes_model(self, train_csv, tmp_path, capsys):
        out = tmp_path / "m.json"
        code = _fit(
            train_csv, out, "--max-interaction", "1", "--nsplits", "30", "--ntrees", "5",
            "--t-try", "0.75", "--split-try", "10", "--seed", "1",
        )
        assert code == 0
        model = load_model(out)
        assert model.feature_names == ("a", "b", "c")
        assert model.params.nsplits == 30 and model.params.seed == 1
        assert "SSR" in capsys.readouterr().out

    def test_missing_response(self, tmp_path):
        path = tmp_path / "bad.csv"
        pd.DataFrame({"x1": [0.1, 0.2], "x2": [1.0, 2.0]}).to_csv(path, index=False)
        assert _fit(path, tmp_path / "m.json") == 2

    def test_non_numeric(self, tmp_path):
        path = tmp_path / "bad.csv"
        pd.DataFrame({"y": [1.0, 2.0], "x1": ["a", "b"]}).to_csv(path, index=False)
        assert _fit(path, tmp_path / "m.json") == 2

    def test_missing_file(self, tmp_path):
        assert _fit(tmp_path / "nope.csv", tmp_path / "m.json") == 2

    def test_degenerate(self, tmp_path):
        path = tmp_path / "flat.csv"
        pd.DataFrame({"y": [1.0, 2.0, 3.0], "x1": [0.5, 0.5, 0.5]}).to_csv(path, index=False)
        assert _fit(path, tmp_path / "m.json", "--no-bootstrap") == 3

    def test_deterministic(self, train_csv, tmp_path):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        assert _fit(train_csv, a, "--ntrees", "3", "--seed", "4") == 0
        assert _fit(train_csv, b, "--ntrees", "3", "--seed", "4") == 0
        assert a.read_text() == b.read_text()

    def test_unbounded_order(self, train_csv, tmp_path):
        out = tmp_path / "m.json"
        assert _fit(train_csv, out, "--ntrees", "2", "--max-interaction", "inf") == 0
        assert load_model(out).params.max_interaction is None


class TestPredict:
    def test_four_point_model(self, four_csv, tmp_path):
        model = tmp_path / "m.json"
        assert _fit(four_csv, model, *FOUR_POINT_FLAGS) == 0

        query = tmp_path / "query.csv"
        pd.DataFrame({"x1": [0.15]}).to_csv(query, index=False)
        out = tmp_path / "pred.csv"
        assert main(["predict", "--model", str(model), "--data", str(query), "--out", str(out)]) == 0

        pred = pd.read_csv(out)
        assert list(pred.columns) == ["prediction"]
        assert pred["prediction"].tolist() == [1.0]

    def test_training_data(self, train_csv, tmp_path):
        model = tmp_path / "m.json"
        assert _fit(train_csv, model, "--ntrees", "5", "--t-try", "0.75") == 0
        out = tmp_path / "pred.csv"
        assert main(["predict", "--model", str(model), "--data", str(train_csv), "--out", str(out)]) == 0

        pred = pd.read_csv(out)["prediction"].to_numpy()
        y = pd.read_csv(train_csv)["y"].to_numpy()
        assert np.isfinite(pred).all()
        assert np.mean((pred - y) ** 2) < np.var(y)

    def test_lossless_round_trip(self, train_csv, tmp_path, capsys):
        model = tmp_path / "m.json"
        assert _fit(train_csv, model, "--ntrees", "3", "--max-interaction", "2") == 0
        capsys.readouterr()
        assert main(["predict", "--model", str(model), "--data", str(train_csv)]) == 0

        printed = capsys.readouterr().out.splitlines()
        assert printed[0] == "prediction"
        x = pd.read_csv(train_csv).drop(columns="y").to_numpy()
        expected = forest_predict_many(load_model(model), x)
        np.testing.assert_array_equal([float(v) for v in printed[1:]], expected)

    def test_column_mismatch(self, train_csv, four_csv, tmp_path):
        model = tmp_path / "m.json"
        assert _fit(train_csv, model, "--ntrees", "2") == 0
        assert main(["predict", "--model", str(model), "--data", str(four_csv)]) == 2

    def test_missing_value(self, four_csv, tmp_path, capsys):
        model = tmp_path / "m.json"
        assert _fit(four_csv, model, *FOUR_POINT_FLAGS) == 0

        query = tmp_path / "query.csv"
        pd.DataFrame({"x1": [0.15, None, 0.85]}).to_csv(query, index=False)
        assert main(["predict", "--model", str(model), "--data", str(query)]) == 2
        assert "rows [1]" in capsys.readouterr().err


class TestComponents:
    def test_additive_export(self, train_csv, tmp_path):
        model = tmp_path / "m.json"
        assert _fit(train_csv, model, "--ntrees", "4", "--max-interaction", "1") == 0
        out = tmp_path / "comps.csv"
        assert main(["components", "--model", str(model), "--out", str(out)]) == 0

        table = pd.read_csv(out)
        assert set(table["component"]) <= {"constant", "a", "b", "c"}
        assert table[table["component"] != "constant"]["axis2_lower"].isna().all()

        for _, rows in table[table["component"] != "constant"].groupby("component"):
            widths = rows["axis1_upper"] - rows["axis1_lower"]
            assert np.sum(widths * rows["value"]) / np.sum(widths) == pytest.approx(0.0, abs=1e-9)

    def test_decomposition_identity(self, train_csv, tmp_path):
        model_path = tmp_path / "m.json"
        assert _fit(train_csv, model_path, "--ntrees", "4", "--max-interaction", "1") == 0
        out = tmp_path / "comps.csv"
        assert main(["components", "--model", str(model_path), "--order", "1", "--out", str(out)]) == 0

        table = pd.read_csv(out)
        model = load_model(model_path)
        rng = np.random.default_rng(0)
        points = rng.uniform(model.training_min, model.training_max, (100, 3))

        constant = table.loc[table["component"] == "constant", "value"].item()
        total = np.full(100, constant)
        for k, name in enumerate(("a", "b", "c")):
            rows = table[table["component"] == name]
            for i, v in enumerate(points[:, k]):
                hit = rows[(rows["axis1_lower"] < v) & (v <= rows["axis1_upper"])]
                total[i] += hit["value"].sum()

        np.testing.assert_allclose(total, forest_predict_many(model, points), atol=1e-9)

    def test_unbounded_model(self, train_csv, tmp_path):
        model = tmp_path / "m.json"
        flags = ("--ntrees", "10", "--nsplits", "40", "--t-try", "0.5", "--max-interaction", "inf")
        assert _fit(train_csv, model, *flags) == 0
        out = tmp_path / "comps.csv"
        assert main(["components", "--model", str(model), "--out", str(out)]) == 0
        assert (pd.read_csv(out)["component"] == "constant").sum() == 1


class TestSimulate:
    def test_unknown_model(self):
        assert main(["simulate", "--model", "additive-sparse-wavy", "--reps", "1"]) == 2

    def test_reproducible(self, tmp_path, capsys):
        flags = [
            "simulate", "--model", "additive-sparse-smooth", "--d", "3", "--n", "40",
            "--reps", "1", "--tune-reps", "1", "--ntrees", "2", "--seed", "7",
        ]
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        assert main([*flags, "--out", str(a)]) == 0
        assert main([*flags, "--out", str(b)]) == 0
        assert a.read_text() == b.read_text()
        assert "additive-sparse" in capsys.readouterr().out

    @pytest.mark.slow
    def test_additive_sparse(self, tmp_path):
        out = tmp_path / "report.csv"
        code = main([
            "simulate", "--model", "additive-sparse-smooth", "--d", "4", "--n", "500",
            "--reps", "20", "--variant", "additive", "--out", str(out),
        ])
        assert code == 0
        assert pd.read_csv(out)["mse"].mean() < 0.15


class TestConvergence:
    def test_report(self, tmp_path, capsys):
        out = tmp_path / "conv.csv"
        code = main([
            "convergence", "--n-list", "50,100,200", "--reps", "1", "--d", "1",
            "--sweeps", "5", "--out", str(out),
        ])
        assert code == 0
        assert "slope" in capsys.readouterr().out
        assert len(pd.read_csv(out)) == 3

    @pytest.mark.slow
    def test_rate(self, capsys):
        assert main(["convergence"]) == 0
        line = capsys.readouterr().out.strip().splitlines()[-1]
        assert -0.55 <= float(line.rsplit(":", 1)[1]) <= -0.25


class TestConfig:
    def test_flags_win(self, tmp_path, four_csv):
        config = tmp_path / "cfg.json"
        config.write_text(json.dumps({"nsplits": 7, "ntrees": 3, "split-try": "all"}))
        args = parse_args(
            ["fit", "--data", str(four_csv), "--config", str(config), "--ntrees", "5"]
        )
        assert args.nsplits == 7
        assert args.ntrees == 5
        assert args.split_try is None

    def test_unknown_key(self, tmp_path, four_csv):
        config = tmp_path / "cfg.json"
        config.write_text(json.dumps({"depth": 3}))
        assert main(["fit", "--data", str(four_csv), "--config", str(config)]) == 2
