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

from .forest import extract_components, fit_forest
from .logging import logger
from .purify import PurifiedModel, purify_forest
from .types import UNBOUNDED, Dataset, FitParams, ForestModel, forest_predict_many

from sklearn.base import BaseEstimator, RegressorMixin

import numpy as np
import pandas as pd


class PlantedForestRegressor(BaseEstimator, RegressorMixin):
    """Base of random planted forest estimators

    The estimator grows `ntrees` families of planted trees, each on its own
    bootstrap sample, and averages their predictions. The highest interaction
    order is not a constructor argument, it is fixed per variant class by
    decorator `parameters`.

    :param ntrees:     Number of families
    :param nsplits:    Number of split iterations per family
    :param t_try:      Fraction of viable (tree, coordinate) combinations tried per iteration
    :param split_try:  Candidate split points per coordinate and leaf
    :param seed:       Master seed, families derive their own seeds from it
    :param bootstrap:  Grow families on bootstrap samples (switch off only for testing)
    """

    def __init__(
        self,
        *,
        ntrees: int = 50,
        nsplits: int = 30,
        t_try: float = 0.4,
        split_try: int | None = 10,
        seed: int = 0,
        bootstrap: bool = True,
    ) -> None:
        self.ntrees = ntrees
        self.nsplits = nsplits
        self.t_try = t_try
        self.split_try = split_try
        self.seed = seed
        self.bootstrap = bootstrap

    # ###################
    # ###  Properties ###
    # ###################
    @property
    def fit_params(self) -> FitParams:
        """Gets validated fit parameters of this estimator"""
        if not hasattr(type(self), "_max_interaction"):
            raise RuntimeError(
                "Estimator variant is not configured (class lacks @parameters decorator)"
            )
        return FitParams(
            ntrees=self.ntrees,
            nsplits=self.nsplits,
            t_try=self.t_try,
            split_try=self.split_try,
            max_interaction=self._max_interaction,
            seed=self.seed,
            bootstrap=self.bootstrap,
        )

    @property
    def model(self) -> ForestModel:
        """Gets fitted forest"""
        if getattr(self, "model_", None) is None:
            raise RuntimeError("Estimator needs to be fitted first")
        return self.model_

    # #####################
    # ###  Base methods ###
    # #####################
    def fit(self, X: np.ndarray, y: np.ndarray) -> PlantedForestRegressor:
        params = self.fit_params
        names = tuple(map(str, X.columns)) if isinstance(X, pd.DataFrame) else None
        data = Dataset(np.asarray(y), np.asarray(X), names)
        logger.info(f"{type(self).__module__}: fitting {self.variant} forest")
        self.model_ = fit_forest(data, params)
        return self

    def predict(self, X: np.ndarray) -> np.ndarray:
        return forest_predict_many(self.model, np.asarray(X, dtype=float))

    def components(self, u: tuple, grid: np.ndarray) -> pd.DataFrame:
        """Raw family averaged component of coordinate set `u` on grid points"""
        return extract_components(self.model, u, grid)

    def purify(self) -> PurifiedModel:
        """Unique ANOVA components with zero weighted axis means"""
        return purify_forest(self.model)

    # ###################
    # ###  Decorators ###
    # ###################
    @staticmethod
    def parameters(*, max_interaction: int | None, variant: str) -> "function":
        """Decorator presetting the interaction order of an estimator variant

        :param max_interaction:  Highest interaction order, `UNBOUNDED` for none
        :param variant:          Name used in simulation reports
        """

        def decorator(cls: type) -> type:
            cls._max_interaction = max_interaction
            cls.variant = variant
            return cls

        return decorator


__all__ = (
    "PlantedForestRegressor",
    "UNBOUNDED",
)
