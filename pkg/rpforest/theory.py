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

from .core.config import rpf_global_params
from .core.errors import DomainError
from .core.logging import logger

from dataclasses import dataclass, field
from joblib import Parallel, delayed
from math import ceil

import numpy as np
import pandas as pd


@dataclass(frozen=True)
class TheoryParams:
    """Inputs of the theoretical random additive planted forest

    :param L:     Number of trees
    :param S:     Update steps per tree
    :param M:     Intervals per coordinate
    :param q:     d x M table of update probabilities, uniform when `None`
    :param g:     Per coordinate samplers `g(rng, size)` of split points on [0, 1],
                  uniform when `None`
    :param seed:  Master seed
    """

    L: int
    S: int
    M: int
    q: np.ndarray | None = None
    g: tuple | None = None
    seed: int = 0

    def __post_init__(self) -> None:
        if self.L < 1 or self.S < 1 or self.M < 1:
            raise ValueError("L, S and M have to be positive")
        if self.q is not None:
            q = np.asarray(self.q, dtype=float)
            if q.ndim != 2 or q.shape[1] != self.M:
                raise ValueError(f"q has to be a d x {self.M} table")
            if not (q > 0).all() or abs(q.sum() - 1.0) > 1e-12:
                raise ValueError("q has to be strictly positive and sum to 1")
            object.__setattr__(self, "q", q)

    @classmethod
    def for_sample_size(
        cls, n: int, d: int, *, c_m: float = 1.0, sweeps: int = 20, seed: int = 0
    ) -> TheoryParams:
        """M of order n^(1/5), L of order n^(2/5) and `sweeps` visits per interval on average"""
        m = max(1, ceil(c_m * n**0.2))
        return cls(L=ceil(n**0.4), S=sweeps * d * m, M=m, seed=seed)

    def table(self, d: int) -> np.ndarray:
        if self.q is None:
            return np.full((d, self.M), 1.0 / (d * self.M))
        if self.q.shape[0] != d:
            raise ValueError(f"q has {self.q.shape[0]} rows, data has {d} coordinates")
        return self.q

    def sampler(self, k: int) -> "function":
        if self.g is None:
            return lambda rng, size: rng.uniform(0.0, 1.0, size)
        return self.g[k]


@dataclass(frozen=True)
class RandomPartition:
    """Intervals [endpoints[j], endpoints[j + 1]] tiling [0, 1]"""

    endpoints: np.ndarray

    @property
    def M(self) -> int:
        return self.endpoints.size - 1

    def lengths(self) -> np.ndarray:
        return np.diff(self.endpoints)

    def interval_of(self, x: np.ndarray) -> np.ndarray:
        return np.clip(np.searchsorted(self.endpoints, x, side="right") - 1, 0, self.M - 1)


def random_partition(M: int, g: "function", rng: np.random.Generator) -> RandomPartition:
    """Ordered samples from `g` mixed with the equidistant grid

    Every interval is at least 1/(2M) long.
    """
    z = np.concatenate(([0.0], np.sort(g(rng, M - 1)), [1.0]))
    return RandomPartition(0.5 * z + np.arange(M + 1) / (2 * M))


@dataclass
class _TreeFit:
    partitions: list
    values: np.ndarray  # d x M

    def component(self, k: int, x: np.ndarray) -> np.ndarray:
        return self.values[k, self.partitions[k].interval_of(x)]


def _fit_tree(x: np.ndarray, y: np.ndarray, params: TheoryParams, seed: tuple) -> _TreeFit:
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    n, d = x.shape
    M = params.M

    partitions = [random_partition(M, params.sampler(k), rng) for k in range(d)]
    members = []
    for k, part in enumerate(partitions):
        cell = part.interval_of(x[:, k])
        members.append([np.flatnonzero(cell == j) for j in range(M)])

    values = np.zeros((d, M))
    fitted = np.zeros(n)
    for s in rng.choice(d * M, size=params.S, p=params.table(d).ravel()):
        k, j = divmod(int(s), M)
        idx = members[k][j]
        if idx.size == 0:
            continue
        # mean of Y minus all other components over the interval
        old = values[k, j]
        new = float(np.mean(y[idx] - fitted[idx])) + old
        fitted[idx] += new - old
        values[k, j] = new

    return _TreeFit(partitions, values)


@dataclass
class TheoreticalFit:
    trees: list
    constant: float
    offsets: np.ndarray = field(default_factory=lambda: np.zeros(0))

    @property
    def d(self) -> int:
        return self.offsets.size

    def raw_component(self, k: int, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return np.mean([t.component(k, x) for t in self.trees], axis=0)

    def component(self, k: int, x: np.ndarray) -> np.ndarray:
        return self.raw_component(k, x) - self.offsets[k]

    def predict(self, x: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        return self.constant + sum(self.component(k, x[:, k]) for k in range(self.d))


def _check_domain(x: np.ndarray) -> np.ndarray:
    x = np.atleast_2d(np.asarray(x, dtype=float))
    if x.size and (x.min() < 0.0 or x.max() > 1.0):
        raise DomainError("Theoretical estimator needs predictors in [0, 1]")
    return x


def fit_theoretical(x: np.ndarray, y: np.ndarray, params: TheoryParams) -> TheoreticalFit:
    """Average of `L` randomized backfitting trees with empirically centered components"""
    x = _check_domain(x)
    y = np.asarray(y, dtype=float)

    trees = Parallel(n_jobs=rpf_global_params["n_jobs"])(
        delayed(_fit_tree)(x, y, params, (params.seed, l)) for l in range(params.L)
    )
    fit = TheoreticalFit(list(trees), float(y.mean()), np.zeros(x.shape[1]))
    fit.offsets = np.array([fit.raw_component(k, x[:, k]).mean() for k in range(x.shape[1])])
    return fit


def _fit_resampled(
    x: np.ndarray, y: np.ndarray, params: TheoryParams, l: int, index: np.ndarray | None
) -> tuple:
    if index is None:
        rng = np.random.default_rng(np.random.SeedSequence((params.seed, l, 1)))
        index = rng.integers(x.shape[0], size=x.shape[0])
    xs, ys = x[index], y[index]
    tree = _fit_tree(xs, ys, params, (params.seed, l))
    offsets = np.array([tree.component(k, xs[:, k]).mean() for k in range(x.shape[1])])
    return tree, offsets, float(ys.mean())


def fit_theoretical_bootstrap(
    x: np.ndarray, y: np.ndarray, params: TheoryParams, resample: list | None = None
) -> TheoreticalFit:
    """Bootstrap variant, every tree grows on its own resample

    :param resample:  Optional index arrays, one per tree, replacing random resampling
    """
    x = _check_domain(x)
    y = np.asarray(y, dtype=float)
    if resample is not None and len(resample) != params.L:
        raise ValueError(f"Expected {params.L} resample index arrays")

    parts = Parallel(n_jobs=rpf_global_params["n_jobs"])(
        delayed(_fit_resampled)(x, y, params, l, None if resample is None else resample[l])
        for l in range(params.L)
    )
    trees, offsets, means = zip(*parts)
    return TheoreticalFit(list(trees), float(np.mean(means)), np.mean(offsets, axis=0))


# ########################
# ###  Rate experiment ###
# ########################
def _smooth_component(k: int, x: np.ndarray) -> np.ndarray:
    if k % 2 == 0:
        return np.sin(2.0 * np.pi * x)
    return 3.0 * x**2 - 1.0


TRUTH = {
    "smooth": _smooth_component,
    "zero": lambda k, x: np.zeros_like(x),
}


@dataclass
class ConvergenceReport:
    rows: pd.DataFrame
    medians: pd.DataFrame
    slope: float

    def summary(self) -> str:
        return f"fitted log-log slope of median interior sup-error: {self.slope:.4f}"


def convergence_experiment(
    n_list: list,
    reps: int,
    *,
    d: int = 2,
    model: str = "smooth",
    noise_sd: float = 1.0,
    bootstrap: bool = False,
    c_m: float = 1.0,
    sweeps: int = 20,
    window: tuple = (0.1, 0.9),
    grid_points: int = 201,
    seed: int = 0,
) -> ConvergenceReport:
    """Sup-errors of the theoretical estimator for growing sample sizes

    Data are uniform on [0, 1]^d with additive truth `model`; errors are
    measured on an interior window and on the whole unit interval.
    """
    if len(n_list) < 3 or list(n_list) != sorted(n_list):
        raise ValueError("Need at least three increasing sample sizes")
    truth = TRUTH[model]
    fitter = fit_theoretical_bootstrap if bootstrap else fit_theoretical

    inner = np.linspace(window[0], window[1], grid_points)
    full = np.linspace(0.0, 1.0, grid_points)

    rows = []
    for n in n_list:
        for rep in range(reps):
            rng = np.random.default_rng(np.random.SeedSequence((seed, n, rep)))
            x = rng.uniform(0.0, 1.0, (n, d))
            y = sum(truth(k, x[:, k]) for k in range(d)) + rng.normal(0.0, noise_sd, n)

            params = TheoryParams.for_sample_size(
                n, d, c_m=c_m, sweeps=sweeps, seed=int(rng.integers(2**31))
            )
            fit = fitter(x, y, params)

            rows.append(
                {
                    "n": n,
                    "rep": rep,
                    "sup_error_interior": max(
                        np.max(np.abs(fit.component(k, inner) - truth(k, inner)))
                        for k in range(d)
                    ),
                    "sup_error_full": max(
                        np.max(np.abs(fit.component(k, full) - truth(k, full)))
                        for k in range(d)
                    ),
                }
            )
        logger.info(f"convergence: n={n} done")

    table = pd.DataFrame(rows)
    medians = table.groupby("n", as_index=False)[
        ["sup_error_interior", "sup_error_full"]
    ].median()
    slope = float(
        np.polyfit(np.log(medians["n"]), np.log(medians["sup_error_interior"]), 1)[0]
    )
    return ConvergenceReport(table, medians, slope)


__all__ = (
    "ConvergenceReport",
    "RandomPartition",
    "TRUTH",
    "TheoreticalFit",
    "TheoryParams",
    "convergence_experiment",
    "fit_theoretical",
    "fit_theoretical_bootstrap",
    "random_partition",
)
