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

from .config import rpf_global_params
from .errors import DegenerateData, NoValidSplit, UnsupportedOrder
from .logging import logger
from .split import SplitCandidate, apply_split, draw_points, score_points, select_best
from .types import (
    UNBOUNDED,
    Coords,
    Dataset,
    FitParams,
    ForestModel,
    Leaf,
    Tree,
    TreeFamily,
    family_predict_many,
    tree_values,
)

from dataclasses import dataclass
from joblib import Parallel, delayed
from math import ceil

import numpy as np
import pandas as pd


@dataclass(frozen=True, order=True)
class Combination:
    """Leaf source tree `tree_coords` split along `split_coord`"""

    tree_coords: Coords
    split_coord: int

    @property
    def spawns(self) -> bool:
        return self.split_coord not in self.tree_coords

    @property
    def target(self) -> Coords:
        return tuple(sorted({*self.tree_coords, self.split_coord}))


def viable_combinations(family: TreeFamily, max_interaction: int | None) -> set:
    """Combinations legal under the single-leaf and interaction order conditions"""
    d = sum(1 for u in family.trees if len(u) == 1)
    viable = set()
    for u, tree in family.trees.items():
        p = tree.leaf_count
        if p == 0:
            continue

        viable.update(Combination(u, k) for k in u)

        if p > 1 and (max_interaction is UNBOUNDED or len(u) < max_interaction):
            viable.update(Combination(u, k) for k in range(d) if k not in u)

    return viable


def sample_combinations(viable: set, t_try: float, rng: np.random.Generator) -> list:
    """Uniform subset of ceil(|V| * t_try) combinations in scan order"""
    ordered = sorted(viable)
    size = min(len(ordered), ceil(round(len(ordered) * t_try, 9)))
    picked = rng.choice(len(ordered), size=size, replace=False)
    return [ordered[i] for i in sorted(picked)]


class _FamilyGrower:
    """Grows one family, tracking sample indices of every leaf"""

    def __init__(
        self, data: Dataset, params: FitParams, rng: np.random.Generator, seed: int
    ) -> None:
        self._data = data
        self._params = params
        self._rng = rng

        self.family = TreeFamily.planted(data.d, data.y, seed)
        self._members = {u: [np.arange(data.n)] for u in self.family.trees}
        self._ssr = float(np.sum(self.family.residuals**2))
        self.family.ssr_trace.append(self._ssr)

    def grow(self) -> TreeFamily:
        for s in range(self._params.nsplits):
            self._step(s)
            self.family.ssr_trace.append(self._ssr)
            if rpf_global_params["debug"]:
                self._check_bookkeeping(s)
        return self.family

    # #################################
    # ###  Internal helpers methods ###
    # #################################
    def _step(self, s: int) -> None:
        x = self._data.x
        residuals = self.family.residuals
        viable = viable_combinations(self.family, self._params.max_interaction)
        tried = sample_combinations(viable, self._params.t_try, self._rng)

        candidates = []
        for comb in tried:
            u, k = comb.tree_coords, comb.split_coord
            for j, leaf in enumerate(self.family.trees[u].leaves):
                idx = self._members[u][j]
                values = x[idx, k]
                pool = values[values < leaf.region.bounds(k)[1]]
                points = draw_points(pool, self._params.split_try, self._rng)
                if points.size == 0:
                    continue

                scores = score_points(values, residuals[idx], points, self._ssr)
                if np.isnan(scores).all():
                    continue

                i = int(np.nanargmin(scores))
                candidates.append(SplitCandidate(u, k, j, float(points[i]), float(scores[i])))

        try:
            best = select_best(candidates)
        except NoValidSplit:
            logger.debug(f"iteration {s}: no valid split")
            return

        self._apply(best)

    def _apply(self, best: SplitCandidate) -> None:
        u, k, j, c = best.tree_coords, best.split_coord, best.leaf_index, best.point
        trees = self.family.trees
        leaf = trees[u].leaves[j]
        idx = self._members[u][j]
        spawn = k not in u

        result = apply_split(
            k,
            Leaf(leaf.region, 0.0) if spawn else leaf,
            c,
            self._data,
            self.family.residuals,
        )
        self.family.residuals = result.updated_residuals
        self._ssr = float(np.sum(result.updated_residuals**2))

        above = self._data.x[idx, k] > c
        plus_idx, minus_idx = idx[above], idx[~above]
        plus, minus = result.leaves

        if spawn:
            target = tuple(sorted((*u, k)))
            if target not in trees:
                trees[target] = Tree(target)
                self._members[target] = []
                self.family.spawn_log.append((u, target, trees[u].leaf_count))
                logger.debug(f"spawned tree {target} from {u}")
            trees[target].leaves.extend((plus, minus))
            self._members[target].extend((plus_idx, minus_idx))
        else:
            trees[u].leaves[j] = plus
            trees[u].leaves.append(minus)
            self._members[u][j] = plus_idx
            self._members[u].append(minus_idx)

    def _check_bookkeeping(self, s: int) -> None:
        fitted = family_predict_many(self.family, self._data.x)
        err = np.max(np.abs(self._data.y - fitted - self.family.residuals))
        if err >= 1e-10:
            raise RuntimeError(f"Residual bookkeeping broken at iteration {s}: {err}")


def grow_family(
    data: Dataset, params: FitParams, rng: np.random.Generator | int, *, seed: int = 0
) -> TreeFamily:
    """Grows one family of planted trees on `data`

    :param data:    Training sample of the family
    :param params:  Fit parameters (ntrees and bootstrap are not used here)
    :param rng:     Random generator or seed
    :param seed:    Seed recorded in the family
    """
    if np.all(data.x.max(axis=0) == data.x.min(axis=0)):
        raise DegenerateData("Every predictor is constant, nothing can be split")

    if not isinstance(rng, np.random.Generator):
        seed = int(rng)
        rng = np.random.default_rng(seed)

    return _FamilyGrower(data, params, rng, seed).grow()


def family_seed(master: int, b: int) -> int:
    """Stable seed of family `b`, independent of scheduling"""
    return int(np.random.SeedSequence([master, b]).generate_state(1)[0])


def _fit_family(data: Dataset, params: FitParams, master: int, b: int) -> TreeFamily:
    seed = family_seed(master, b)
    rng = np.random.default_rng(seed)

    index = None
    sample = data
    if params.bootstrap:
        index = rng.integers(data.n, size=data.n)
        sample = data.subset(index)

    family = grow_family(sample, params, rng, seed=seed)
    family.sample_index = index
    return family


def fit_forest(
    data: Dataset, params: FitParams, master_rng_seed: int | None = None
) -> ForestModel:
    """Grows `params.ntrees` families and aggregates them into a forest"""
    master = params.seed if master_rng_seed is None else master_rng_seed
    logger.info(
        f"Fitting forest: n={data.n} d={data.d} {params.label()} seed={master}"
    )

    families = Parallel(n_jobs=rpf_global_params["n_jobs"])(
        delayed(_fit_family)(data, params, master, b) for b in range(params.ntrees)
    )

    return ForestModel(
        families=list(families),
        params=params,
        d=data.d,
        training_min=data.x.min(axis=0),
        training_max=data.x.max(axis=0),
        feature_names=data.feature_names,
    )


def mean_ssr_trace(model: ForestModel) -> np.ndarray:
    """Training SSR after each iteration averaged over families"""
    return np.mean([f.ssr_trace for f in model.families], axis=0)


def extract_components(model: ForestModel, u: Coords, grid: np.ndarray) -> pd.DataFrame:
    """Raw (not purified) family-averaged component of `u` on grid points"""
    u = tuple(sorted(u))
    if not 1 <= len(u) <= 2:
        raise UnsupportedOrder(f"Components of order {len(u)} can not be exported")

    grid = np.asarray(grid, dtype=float).reshape(-1, len(u))
    points = np.zeros((grid.shape[0], model.d))
    points[:, list(u)] = grid

    values = np.zeros(grid.shape[0])
    for family in model.families:
        tree = family.trees.get(u)
        if tree is not None:
            values += tree_values(tree, points)
    values /= len(model.families)

    table = pd.DataFrame(grid, columns=[model.name(k) for k in u])
    table["value"] = values
    return table


__all__ = (
    "Combination",
    "extract_components",
    "family_seed",
    "fit_forest",
    "grow_family",
    "mean_ssr_trace",
    "sample_combinations",
    "viable_combinations",
)
