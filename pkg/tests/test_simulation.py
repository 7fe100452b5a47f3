import numpy as np
import pandas as pd
import pytest

from rpforest.core.errors import LengthMismatch
from rpforest.core.types import UNBOUNDED, FitParams
from rpforest.rpf_interaction import Rpf as RpfInteraction
from rpforest.simulation import (
    STRUCTURES,
    SimModelSpec,
    cross_validate,
    estimator_for,
    generate_dataset,
    grid_search,
    rpf_grid,
    run_simulation,
    sample_mse,
    sample_predictors,
    summarize,
    true_function,
)

TINY = FitParams(ntrees=2, nsplits=4, t_try=0.5, split_try=3)


class TestModels:
    def test_from_id(self):
        spec = SimModelSpec.from_id("pure-interaction-sparse-smooth", d=4)
        assert spec.structure == "pure-interaction-sparse"
        assert spec.shape == "smooth"
        assert spec.model_id == "pure-interaction-sparse-smooth"

    def test_unknown_id(self):
        with pytest.raises(ValueError):
            SimModelSpec.from_id("additive-sparse-wavy")

    def test_small_dimension(self):
        with pytest.raises(ValueError):
            SimModelSpec("additive-sparse", "smooth", d=2)

    def test_sign_alternation_cancels(self):
        m = true_function(SimModelSpec("additive-sparse", "smooth", d=4))
        assert m(np.full(4, 0.5))[0] == pytest.approx(0.0)
        m1 = true_function(SimModelSpec("additive-sparse", "smooth", d=4))
        assert m1(np.array([0.5, 0.0, 0.0, 0.0]))[0] == pytest.approx(-2.0)
        assert m1(np.array([0.0, 0.5, 0.0, 0.0]))[0] == pytest.approx(2.0)

    def test_jump_at_zero(self):
        m = true_function(SimModelSpec("additive-sparse", "jump", d=4))
        # m1(0) = -2, m2(0) = -2
        assert m(np.zeros(4))[0] == pytest.approx(-4.0)
        # m1(-0.5) = -2 sin(-pi/2) + 2 = 4, m2(0) = -2
        assert m(np.array([-0.5, 0.0, 0.0, 0.0]))[0] == pytest.approx(2.0)

    def test_pure_interaction_vanishes(self):
        m = true_function(SimModelSpec("pure-interaction-sparse", "smooth", d=4))
        assert m(np.array([0.0, 0.7, 0.0, 0.3]))[0] == pytest.approx(0.0)

    def test_hierarchical_sparse(self):
        m = true_function(SimModelSpec("hierarchical-interaction-sparse", "smooth", d=4))
        x = np.array([0.5, 1.0, 0.5, 0.9])
        # m1(.5) + m2(1) + m3(.5) + m1(.5) + m2(.5)
        assert m(x)[0] == pytest.approx(-2.0 + 0.0 - 2.0 - 2.0 + 2.0)

    def test_dense_uses_every_coordinate(self):
        x = np.zeros((1, 6))
        x[0, 5] = 0.5
        additive = true_function(SimModelSpec("additive-dense", "smooth", d=6))
        sparse = true_function(SimModelSpec("additive-sparse", "smooth", d=6))
        assert additive(x)[0] == pytest.approx(2.0)
        assert sparse(x)[0] == pytest.approx(0.0)

    @pytest.mark.parametrize("structure", STRUCTURES)
    def test_vectorized(self, structure):
        spec = SimModelSpec(structure, "jump", d=5)
        x = sample_predictors(20, 5, 0.3, np.random.default_rng(0))
        m = true_function(spec)
        np.testing.assert_allclose(m(x), [m(row)[0] for row in x])


class TestData:
    def test_predictor_range(self):
        x = sample_predictors(2000, 3, 0.3, np.random.default_rng(1))
        assert np.all(np.abs(x) < 1.25)

    def test_predictor_correlation(self):
        x = sample_predictors(100_000, 3, 0.3, np.random.default_rng(2))
        corr = np.corrcoef(x, rowvar=False)[np.triu_indices(3, 1)]
        assert np.all((corr > 0.25) & (corr < 0.32))

    def test_noise_free(self):
        spec = SimModelSpec("additive-sparse", "smooth", d=4, noise_sd=0.0)
        data, truth = generate_dataset(spec, 50, np.random.default_rng(3))
        np.testing.assert_array_equal(data.y, truth)

    def test_reproducible(self):
        spec = SimModelSpec("additive-dense", "jump", d=4)
        a, _ = generate_dataset(spec, 30, np.random.default_rng(4))
        b, _ = generate_dataset(spec, 30, np.random.default_rng(4))
        np.testing.assert_array_equal(a.x, b.x)
        np.testing.assert_array_equal(a.y, b.y)


class TestMse:
    def test_identical(self):
        assert sample_mse(np.ones(5), np.ones(5)) == 0.0

    def test_constant_offset(self):
        assert sample_mse(np.zeros(8), np.full(8, 0.1)) == pytest.approx(0.01)

    def test_length_mismatch(self):
        with pytest.raises(LengthMismatch):
            sample_mse(np.zeros(3), np.zeros(4))


class TestGrids:
    def test_full_grid(self):
        grid = rpf_grid("full", "additive")
        assert len(grid) == 3 * 4 * 10
        assert {p.t_try for p in grid} == {0.25, 0.5, 0.75}
        assert {p.split_try for p in grid} == {2, 5, 10, 20}
        assert min(p.nsplits for p in grid) == 10 and max(p.nsplits for p in grid) == 100
        assert all(p.max_interaction == 1 for p in grid)

    def test_dense_scaling(self):
        grid = rpf_grid("full", "interaction-unbounded", dense=True, d=10)
        assert {p.nsplits for p in grid} == {50, 75, 100, 125, 150, 250, 300, 400, 500}
        assert all(p.max_interaction is UNBOUNDED for p in grid)

    def test_estimator_variant(self):
        assert type(estimator_for(FitParams(max_interaction=2))) is RpfInteraction
        est = estimator_for(FitParams(max_interaction=3, ntrees=4))
        assert est.fit_params.max_interaction == 3
        assert est.ntrees == 4


class TestTuning:
    def test_grid_search_single(self):
        spec = SimModelSpec("additive-sparse", "smooth", d=3)
        assert grid_search(spec, [TINY], tune_reps=1, seed=0, n=40) is TINY

    def test_grid_search_member(self):
        spec = SimModelSpec("additive-sparse", "smooth", d=3)
        grid = [TINY, FitParams(ntrees=2, nsplits=8, t_try=0.5, split_try=3)]
        assert grid_search(spec, grid, tune_reps=2, seed=1, n=40) in grid

    def test_grid_search_empty(self):
        with pytest.raises(ValueError):
            grid_search(SimModelSpec("additive-sparse", "smooth"), [], 1, 0)

    def test_cross_validate_single(self):
        spec = SimModelSpec("additive-sparse", "smooth", d=3)
        data, _ = generate_dataset(spec, 40, np.random.default_rng(5))
        assert cross_validate(data, [TINY], folds=5) is TINY

    def test_cross_validate_leave_one_out(self):
        spec = SimModelSpec("additive-sparse", "smooth", d=3)
        data, _ = generate_dataset(spec, 12, np.random.default_rng(6))
        grid = [TINY, FitParams(ntrees=2, nsplits=1, t_try=0.5, split_try=3)]
        assert cross_validate(data, grid, folds=12) in grid

    def test_cross_validate_too_few(self):
        spec = SimModelSpec("additive-sparse", "smooth", d=3)
        data, _ = generate_dataset(spec, 5, np.random.default_rng(7))
        with pytest.raises(ValueError):
            cross_validate(data, [TINY], folds=10)


class TestRunSimulation:
    def test_rows(self):
        spec = SimModelSpec("additive-sparse", "smooth", d=3)
        rows = run_simulation(spec, "additive", n=40, reps=2, grid=[TINY], tune_reps=1, seed=3)
        assert list(rows.columns) == ["model", "shape", "d", "variant", "params", "rep", "mse"]
        assert list(rows["rep"]) == [0, 1]
        assert (rows["mse"] >= 0).all()

    def test_reproducible(self):
        spec = SimModelSpec("pure-interaction-sparse", "jump", d=3)
        kw = dict(n=40, reps=1, grid=[TINY], tune_reps=1, seed=7)
        pd.testing.assert_frame_equal(
            run_simulation(spec, "interaction", **kw), run_simulation(spec, "interaction", **kw)
        )

    def test_cross_validated(self):
        spec = SimModelSpec("additive-sparse", "smooth", d=3)
        rows = run_simulation(spec, "additive", n=30, reps=1, grid=[TINY], cv=True, folds=3)
        assert list(rows["variant"]) == ["additive-CV"]

    def test_unknown_variant(self):
        with pytest.raises(ValueError):
            run_simulation(SimModelSpec("additive-sparse", "smooth"), "boosting")

    def test_summary(self):
        rows = pd.DataFrame(
            {
                "model": ["additive-sparse"] * 2,
                "shape": ["smooth"] * 2,
                "d": [4, 4],
                "variant": ["additive"] * 2,
                "params": ["p"] * 2,
                "rep": [0, 1],
                "mse": [0.05, 0.07],
            }
        )
        table = summarize(rows)
        assert list(table["mse"]) == ["0.060 (0.014)"]


def _mean_mse(model_id: str, variant: str, **kw) -> float:
    spec = SimModelSpec.from_id(model_id, d=4)
    return float(run_simulation(spec, variant, n=500, reps=20, seed=0, **kw)["mse"].mean())


@pytest.fixture(scope="module")
def tuned_additive_mse():
    return _mean_mse("additive-sparse-smooth", "additive")


@pytest.mark.slow
class TestReferenceAccuracy:
    def test_additive_smooth(self, tuned_additive_mse):
        assert 0.05 <= tuned_additive_mse <= 0.10

    def test_additive_jump(self):
        assert 0.07 <= _mean_mse("additive-sparse-jump", "additive") <= 0.15

    def test_pure_interaction(self):
        assert 0.14 <= _mean_mse("pure-interaction-sparse-smooth", "interaction-unbounded") <= 0.30

    def test_interaction_order_adapts(self):
        model = "hierarchical-interaction-sparse-smooth"
        unbounded = _mean_mse(model, "interaction-unbounded")
        assert unbounded < 0.5 * _mean_mse(model, "additive")

    def test_cross_validation_loss(self, tuned_additive_mse):
        cv = _mean_mse("additive-sparse-smooth", "additive", cv=True, folds=10)
        assert cv <= 1.5 * tuned_additive_mse
