import numpy as np
import pandas as pd
import pytest

from rpforest.core.base import UNBOUNDED, PlantedForestRegressor
from rpforest.rpf_additive import Rpf as RpfAdditive
from rpforest.rpf_interaction import Rpf as RpfInteraction
from rpforest.rpf_unbounded import Rpf as RpfUnbounded
from sklearn.base import clone


@pytest.mark.parametrize(
    "cls,order,variant",
    [
        (RpfAdditive, 1, "additive"),
        (RpfInteraction, 2, "interaction"),
        (RpfUnbounded, UNBOUNDED, "interaction-unbounded"),
    ],
)
def test_variant_orders(cls, order, variant):
    est = cls(ntrees=2, nsplits=3)
    assert est.fit_params.max_interaction == order
    assert est.variant == variant


def test_undecorated_base():
    with pytest.raises(RuntimeError):
        PlantedForestRegressor().fit(np.zeros((3, 1)), np.zeros(3))


def test_predict_before_fit():
    with pytest.raises(RuntimeError):
        RpfAdditive().predict(np.zeros((2, 1)))


def test_sklearn_params():
    est = RpfInteraction(ntrees=7, t_try=0.75)
    copy = clone(est)
    assert copy.get_params() == est.get_params()
    assert copy.get_params()["ntrees"] == 7


def test_fit_predict(additive_data):
    est = RpfAdditive(ntrees=5, nsplits=30, t_try=0.75, split_try=5)
    pred = est.fit(additive_data.x, additive_data.y).predict(additive_data.x)
    assert pred.shape == (additive_data.n,)
    assert est.score(additive_data.x, additive_data.y) > 0.5
    assert np.mean((pred - additive_data.y) ** 2) < np.var(additive_data.y)


def test_feature_names_from_frame(additive_data):
    frame = pd.DataFrame(additive_data.x, columns=["a", "b", "c"])
    est = RpfAdditive(ntrees=2, nsplits=5).fit(frame, additive_data.y)
    assert est.model.feature_names == ("a", "b", "c")
    assert list(est.components((1,), [0.0, 0.5]).columns) == ["b", "value"]


def test_purify_keeps_predictions(additive_data):
    est = RpfInteraction(ntrees=3, nsplits=20).fit(additive_data.x, additive_data.y)
    rng = np.random.default_rng(0)
    x = rng.uniform(est.model.training_min, est.model.training_max, (50, 3))
    np.testing.assert_allclose(est.purify().predict(x), est.predict(x), atol=1e-9)
