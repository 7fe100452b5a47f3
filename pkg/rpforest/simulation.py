# Random planted forest regression
#
# MIT License
# Copyright (c) 2023 Ondrej Sienczak
#
# Permission is hereby granted, free of charge, to any person obtaining a copy
# of this software and associated documentation files (the "Software"), to deal
# in the Software without restriction, including without limitation the rights
# to use, copy, modify, merge, publish, distribute, sublicense, and/or sell
# copies of the Software, and to permit persons to whom the Software is
# furnished to do so, subject to the following conditions:
#
# The above copyright notice and this permission notice shall be included in all
# copies or substantial portions of the Software.
#
# THE SOFTWARE IS PROVIDED "AS IS", WITHOUT WARRANTY OF ANY KIND, EXPRESS OR
# IMPLIED, INCLUDING BUT NOT LIMITED TO THE WARRANTIES OF MERCHANTABILITY,
# FITNESS FOR A PARTICULAR PURPOSE AND NONINFRINGEMENT. IN NO EVENT SHALL THE
# AUTHORS OR COPYRIGHT HOLDERS BE LIABLE FOR ANY CLAIM, DAMAGES OR OTHER
# LIABILITY, WHETHER IN AN ACTION OF CONTRACT, TORT OR OTHERWISE, ARISING FROM,
# OUT OF OR IN CONNECTION WITH THE SOFTWARE OR THE USE OR OTHER DEALINGS IN THE
# SOFTWARE.
from __future__ import annotations

from .core.base import PlantedForestRegressor
from .core.errors import LengthMismatch
from .core.logging import logger
from .core.types import Dataset, FitParams
from .rpf_additive import Rpf as RpfAdditive
from .rpf_interaction import Rpf as RpfInteraction
from .rpf_unbounded import Rpf as RpfUnbounded

from dataclasses import dataclass, replace
from sklearn.model_selection import KFold, ParameterGrid

import numpy as np
import pandas as pd

STRUCTURES = (
    "additive-sparse",
    "hierarchical-interaction-sparse",
    "pure-interaction-sparse",
    "additive-dense",
    "hierarchical-interaction-dense",
    "pure-interaction-dense",
)
SHAPES = ("smooth", "jump")

VARIANTS = {
    RpfAdditive.variant: RpfAdditive,
    RpfInteraction.variant: RpfInteraction,
    RpfUnbounded.variant: RpfUnbounded,
}

GRID_PRESETS = {
    "full": {
        "t_try": (0.25, 0.5, 0.75),
        "split_try": (2, 5, 10, 20),
        "nsplits": (10, 15, 20, 25, 30, 40, 50, 60, 80, 100),
        "nsplits_dense": (10, 15, 20, 25, 30, 50, 60, 80, 100),
    },
    "small": {
        "t_try": (0.5, 0.75),
        "split_try": (5, 10),
        "nsplits": (20, 40),
        "nsplits_dense": (20, 40),
    },
}


@dataclass(frozen=True)
class SimModelSpec:
    """One of the twelve simulation models

    :param structure:  Member of `STRUCTURES`
    :param shape:      Member of `SHAPES`
    :param d:          Number of predictors
    :param rho:        Pairwise correlation of the latent normal predictors
    :param noise_sd:   Standard deviation of the Gaussian noise
    """

    structure: str
    shape: str
    d: int = 4
    rho: float = 0.3
    noise_sd: float = 1.0

    def __post_init__(self) -> None:
        if self.structure not in STRUCTURES:
            raise ValueError(f"Unknown model structure {self.structure!r}")
        if self.shape not in SHAPES:
            raise ValueError(f"Unknown function shape {self.shape!r}")
        if self.d < 3:
            raise ValueError(f"Simulation models need d >= 3, got {self.d}")
        if not 0.0 <= self.rho < 1.0:
            raise ValueError(f"rho has to be in [0, 1), got {self.rho}")

    @classmethod
    def from_id(cls, model_id: str, **kw) -> SimModelSpec:
        """Parses ids like `additive-sparse-smooth`"""
        structure, _, shape = model_id.rpartition("-")
        return cls(structure, shape, **kw)

    @property
    def model_id(self) -> str:
        return f"{self.structure}-{self.shape}"

    @property
    def dense(self) -> bool:
        return self.structure.endswith("dense")


def sample_predictors(n: int, d: int, rho: float, rng: np.random.Generator) -> np.ndarray:
    """Correlated normals mapped into (-1.25, 1.25) by 2.5/pi * arctan"""
    cov = np.full((d, d), rho) + (1.0 - rho) * np.eye(d)
    latent = rng.standard_normal((n, d)) @ np.linalg.cholesky(cov).T
    return 2.5 / np.pi * np.arctan(latent)


def _main_effect(shape: str, k: int, x: np.ndarray) -> np.ndarray:
    # k is 1-based, signs alternate between coordinates
    out = (-1) ** k * 2.0 * np.sin(np.pi * x)
    if shape == "jump":
        out = out + np.where(x >= 0.0, -2.0, 2.0)
    return out


def true_function(spec: SimModelSpec) -> "function":
    """Closed form regression function m(x) of `spec`, vectorized over rows"""
    d = spec.d
    if spec.structure.endswith("sparse"):
        mains = (1, 2) if spec.structure.startswith("additive") else (1, 2, 3)
        pairs = (1, 2)
    else:
        mains = tuple(range(1, d + 1))
        pairs = tuple(range(1, d))

    if spec.structure.startswith("additive"):
        pairs = ()
    if spec.structure.startswith("pure"):
        mains = ()

    def m(x: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        out = np.zeros(x.shape[0])
        for k in mains:
            out += _main_effect(spec.shape, k, x[:, k - 1])
        for k in pairs:
            out += _main_effect(spec.shape, k, x[:, k - 1] * x[:, k])
        return out

    return m


def generate_dataset(spec: SimModelSpec, n: int, rng: np.random.Generator) -> tuple:
    """Returns (Dataset, values of the true regression function at the design)"""
    x = sample_predictors(n, spec.d, spec.rho, rng)
    truth = true_function(spec)(x)
    y = truth + spec.noise_sd * rng.standard_normal(n)
    return Dataset(y, x), truth


def sample_mse(truth: np.ndarray, predictions: np.ndarray) -> float:
    truth = np.asarray(truth, dtype=float)
    predictions = np.asarray(predictions, dtype=float)
    if truth.shape != predictions.shape:
        raise LengthMismatch(f"Lengths {truth.shape} and {predictions.shape} differ")
    return float(np.mean((truth - predictions) ** 2))


def _rng(*key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(key))


def _seed(*key: int) -> int:
    return int(np.random.SeedSequence(key).generate_state(1)[0])


# ###########################
# ###  Parameter handling ###
# ###########################
def estimator_for(params: FitParams) -> PlantedForestRegressor:
    """Estimator variant matching `params.max_interaction`"""
    for cls in VARIANTS.values():
        if cls._max_interaction == params.max_interaction:
            break
    else:
        order = params.max_interaction
        cls = PlantedForestRegressor.parameters(
            max_interaction=order, variant=f"interaction-{order}"
        )(type("Rpf", (PlantedForestRegressor,), {}))

    return cls(
        ntrees=params.ntrees,
        nsplits=params.nsplits,
        t_try=params.t_try,
        split_try=params.split_try,
        seed=params.seed,
        bootstrap=params.bootstrap,
    )


def rpf_grid(
    preset: str, variant: str, *, dense: bool = False, d: int = 4, ntrees: int = 50
) -> list:
    """FitParams of a named grid preset, dense settings scale nsplits by d/2"""
    cfg = GRID_PRESETS[preset]
    nsplits = cfg["nsplits_dense"] if dense else cfg["nsplits"]
    if dense:
        nsplits = tuple(max(1, round(d / 2 * v)) for v in nsplits)

    order = VARIANTS[variant]._max_interaction
    grid = ParameterGrid({"t_try": cfg["t_try"], "split_try": cfg["split_try"], "nsplits": nsplits})
    return [FitParams(ntrees=ntrees, max_interaction=order, **cell) for cell in grid]


def _fit_predict(params: FitParams, train: Dataset, x: np.ndarray) -> np.ndarray:
    return estimator_for(params).fit(train.x, train.y).predict(x)


def grid_search(spec: SimModelSpec, grid: list, tune_reps: int, seed: int, n: int = 500) -> FitParams:
    """Grid member with the smallest sample MSE against the truth, averaged over
    `tune_reps` independent data sets shared by all grid members"""
    if not grid:
        raise ValueError("Empty parameter grid")

    datasets = [generate_dataset(spec, n, _rng(seed, 0, r)) for r in range(tune_reps)]
    best, best_err = None, np.inf
    for i, params in enumerate(grid):
        err = np.mean(
            [
                sample_mse(truth, _fit_predict(replace(params, seed=_seed(seed, 0, r)), data, data.x))
                for r, (data, truth) in enumerate(datasets)
            ]
        )
        logger.info(f"grid {i + 1}/{len(grid)}: {params.label()} mse={err:.4f}")
        if err < best_err:
            best, best_err = params, err
    return best


def cross_validate(data: Dataset, grid: list, folds: int = 10, seed: int = 0) -> FitParams:
    """Grid member with the smallest k-fold held out squared error against `y`"""
    if not grid:
        raise ValueError("Empty parameter grid")
    if data.n < folds:
        raise ValueError(f"Need at least {folds} observations for {folds}-fold CV")

    splits = list(KFold(n_splits=folds, shuffle=True, random_state=seed % 2**32).split(data.x))
    best, best_err = None, np.inf
    for params in grid:
        err = 0.0
        for train, test in splits:
            pred = _fit_predict(params, data.subset(train), data.x[test])
            err += float(np.sum((data.y[test] - pred) ** 2))
        err /= data.n
        if err < best_err:
            best, best_err = params, err
    return best


def run_simulation(
    spec: SimModelSpec,
    variant: str,
    *,
    n: int = 500,
    reps: int = 20,
    grid: list | None = None,
    tune_reps: int = 10,
    cv: bool = False,
    folds: int = 10,
    seed: int = 0,
) -> pd.DataFrame:
    """Tunes (oracle grid search or CV per rep) and evaluates on fresh data sets"""
    if variant not in VARIANTS:
        raise ValueError(f"Unknown variant {variant!r}")
    if grid is None:
        grid = rpf_grid("small", variant, dense=spec.dense, d=spec.d)

    tuned = None if cv else grid_search(spec, grid, tune_reps, seed, n)

    rows = []
    for rep in range(reps):
        data, truth = generate_dataset(spec, n, _rng(seed, 1, rep))
        params = cross_validate(data, grid, folds, _seed(seed, 2, rep)) if cv else tuned
        pred = _fit_predict(replace(params, seed=_seed(seed, 1, rep)), data, data.x)
        rows.append(
            {
                "model": spec.structure,
                "shape": spec.shape,
                "d": spec.d,
                "variant": f"{variant}-CV" if cv else variant,
                "params": params.label(),
                "rep": rep,
                "mse": sample_mse(truth, pred),
            }
        )
        logger.info(f"{spec.model_id} {variant} rep {rep}: mse={rows[-1]['mse']:.4f}")

    return pd.DataFrame(rows)


def summarize(rows: pd.DataFrame) -> pd.DataFrame:
    """Mean and standard deviation of MSE per model, d and variant"""
    table = (
        rows.groupby(["model", "shape", "d", "variant"], sort=False)["mse"]
        .agg(["mean", "std"])
        .reset_index()
    )
    table["std"] = table["std"].fillna(0.0)
    table["mse"] = [f"{m:.3f} ({s:.3f})" for m, s in zip(table["mean"], table["std"])]
    return table


__all__ = (
    "GRID_PRESETS",
    "SHAPES",
    "STRUCTURES",
    "SimModelSpec",
    "VARIANTS",
    "cross_validate",
    "estimator_for",
    "generate_dataset",
    "grid_search",
    "rpf_grid",
    "run_simulation",
    "sample_mse",
    "sample_predictors",
    "summarize",
    "true_function",
)
