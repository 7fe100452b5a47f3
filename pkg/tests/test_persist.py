import json

import numpy as np
import pytest

from rpforest.core.forest import fit_forest
from rpforest.core.persist import (
    dumps_model,
    load_model,
    loads_model,
    model_to_document,
    save_model,
)
from rpforest.core.types import UNBOUNDED, FitParams, forest_predict_many


@pytest.fixture
def model(additive_data):
    params = FitParams(ntrees=3, nsplits=12, max_interaction=UNBOUNDED, split_try=4, seed=2)
    return fit_forest(additive_data, params)


def test_lossless(model, additive_data):
    restored = loads_model(dumps_model(model))
    np.testing.assert_array_equal(
        forest_predict_many(restored, additive_data.x),
        forest_predict_many(model, additive_data.x),
    )
    assert restored.params == model.params
    assert dumps_model(restored) == dumps_model(model)


def test_history_kept(model):
    restored = loads_model(dumps_model(model))
    for a, b in zip(model.families, restored.families):
        assert a.ssr_trace == b.ssr_trace
        assert a.spawn_log == b.spawn_log
        np.testing.assert_array_equal(a.sample_index, b.sample_index)
        np.testing.assert_array_equal(a.residuals, b.residuals)


def test_infinite_bounds_as_strings(model):
    doc = json.loads(dumps_model(model))
    leaves = [leaf for f in doc["families"] for t in f["trees"] for leaf in t["leaves"]]
    assert any("-inf" in leaf["lower"] for leaf in leaves)
    assert any("inf" in leaf["upper"] for leaf in leaves)


def test_file_round_trip(model, tmp_path):
    path = tmp_path / "model.json"
    save_model(model, path)
    assert dumps_model(load_model(path)) == dumps_model(model)


def test_unknown_version(model):
    doc = model_to_document(model)
    doc["version"] = 99
    with pytest.raises(ValueError):
        loads_model(json.dumps(doc))
