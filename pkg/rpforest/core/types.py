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

from .errors import InvalidData

from dataclasses import dataclass, field, replace
from math import inf

import numpy as np

UNBOUNDED = None  # max_interaction value of the interaction(inf) variant

Coords = tuple  # sorted tuple of 0-based coordinate indices


@dataclass(frozen=True)
class Dataset:
    """Observations of response `y` and predictor matrix `x`

    :param y:              Responses, length n
    :param x:              Predictors, n x d
    :param feature_names:  Optional labels of the d predictors
    """

    y: np.ndarray
    x: np.ndarray
    feature_names: tuple | None = None

    def __post_init__(self) -> None:
        y = np.asarray(self.y, dtype=float)
        x = np.asarray(self.x, dtype=float)
        if x.ndim == 1:
            x = x.reshape(-1, 1)

        if y.ndim != 1 or x.ndim != 2:
            raise InvalidData("Expected response vector and predictor matrix")
        if y.shape[0] != x.shape[0]:
            raise InvalidData(
                f"Response length {y.shape[0]} does not match {x.shape[0]} rows"
            )
        if y.shape[0] < 2 or x.shape[1] < 1:
            raise InvalidData("At least two observations and one predictor needed")
        if not (np.isfinite(y).all() and np.isfinite(x).all()):
            raise InvalidData("All entries have to be finite")
        if self.feature_names is not None and len(self.feature_names) != x.shape[1]:
            raise InvalidData("One feature name per predictor column expected")

        object.__setattr__(self, "y", y)
        object.__setattr__(self, "x", x)
        if self.feature_names is not None:
            object.__setattr__(self, "feature_names", tuple(self.feature_names))

    @property
    def n(self) -> int:
        return self.y.shape[0]

    @property
    def d(self) -> int:
        return self.x.shape[1]

    def subset(self, index: np.ndarray) -> Dataset:
        return Dataset(self.y[index], self.x[index], self.feature_names)


@dataclass(frozen=True)
class Region:
    """Axis aligned box (lower, upper] over coordinates `coords`"""

    coords: Coords
    lower: tuple
    upper: tuple

    def __post_init__(self) -> None:
        if not self.coords:
            raise ValueError("Region needs at least one coordinate")
        if list(self.coords) != sorted(set(self.coords)):
            raise ValueError(f"Region coordinates {self.coords} not sorted/unique")
        if not len(self.coords) == len(self.lower) == len(self.upper):
            raise ValueError("One bound pair per coordinate expected")
        for lo, up in zip(self.lower, self.upper):
            if not lo < up:
                raise ValueError(f"Empty interval ({lo}, {up}]")

    @classmethod
    def whole(cls, coords: Coords) -> Region:
        return cls(tuple(coords), (-inf,) * len(coords), (inf,) * len(coords))

    def bounds(self, k: int) -> tuple:
        """Interval of coordinate `k`, (-inf, inf] when region does not restrict it"""
        if k in self.coords:
            i = self.coords.index(k)
            return self.lower[i], self.upper[i]
        return -inf, inf

    def lift(self, k: int) -> Region:
        """Same region embedded into coords + {k} with unbounded k-interval"""
        if k in self.coords:
            return self
        coords = tuple(sorted((*self.coords, k)))
        lower, upper = zip(*(self.bounds(c) for c in coords))
        return Region(coords, lower, upper)

    def cut(self, k: int, c: float) -> tuple:
        """Returns (plus, minus) regions obtained by splitting at `c` along `k`"""
        region = self.lift(k)
        i = region.coords.index(k)
        plus = replace(
            region, lower=region.lower[:i] + (c,) + region.lower[i + 1 :]
        )
        minus = replace(
            region, upper=region.upper[:i] + (c,) + region.upper[i + 1 :]
        )
        return plus, minus

    def mask(self, x: np.ndarray) -> np.ndarray:
        """Vectorized `region_contains` over rows of `x`"""
        inside = np.ones(x.shape[0], dtype=bool)
        for k, lo, up in zip(self.coords, self.lower, self.upper):
            col = x[:, k]
            inside &= (col > lo) & (col <= up)
        return inside


@dataclass(frozen=True)
class Leaf:
    region: Region
    value: float


@dataclass
class Tree:
    """Leaves of the tree estimating the ANOVA component of `coords`

    One dimensional trees partition the line, interaction trees keep
    possibly overlapping leaves which are added in pairs.
    """

    coords: Coords
    leaves: list = field(default_factory=list)

    @classmethod
    def planted(cls, k: int) -> Tree:
        """Trivial partition of the line with zero value"""
        return cls((k,), [Leaf(Region.whole((k,)), 0.0)])

    @property
    def leaf_count(self) -> int:
        return len(self.leaves)


@dataclass
class TreeFamily:
    """One tree per grown component plus residuals of the family's training sample"""

    trees: dict
    residuals: np.ndarray
    rng_seed: int = 0
    sample_index: np.ndarray | None = None
    ssr_trace: list = field(default_factory=list)
    spawn_log: list = field(default_factory=list)

    @classmethod
    def planted(cls, d: int, y: np.ndarray, rng_seed: int = 0) -> TreeFamily:
        return cls(
            trees={(k,): Tree.planted(k) for k in range(d)},
            residuals=np.array(y, dtype=float),
            rng_seed=rng_seed,
        )

    def leaf_count(self, coords: Coords) -> int:
        tree = self.trees.get(tuple(coords))
        return 0 if tree is None else tree.leaf_count


@dataclass(frozen=True)
class FitParams:
    """Tuning parameters of a planted forest

    :param ntrees:           Number of bootstrap families
    :param nsplits:          Iterations per family
    :param t_try:            Fraction of viable combinations tried per iteration
    :param split_try:        Split points drawn per coordinate and leaf, `None`
                             for every distinct candidate (exhaustive search)
    :param max_interaction:  Highest interaction order, `UNBOUNDED` for none
    :param seed:             Master seed
    :param bootstrap:        Grow families on bootstrap samples
    """

    ntrees: int = 50
    nsplits: int = 30
    t_try: float = 0.4
    split_try: int | None = 10
    max_interaction: int | None = 1
    seed: int = 0
    bootstrap: bool = True

    def __post_init__(self) -> None:
        if self.ntrees < 1:
            raise ValueError(f"ntrees has to be positive, got {self.ntrees}")
        if self.nsplits < 1:
            raise ValueError(f"nsplits has to be positive, got {self.nsplits}")
        if not 0.0 < self.t_try <= 1.0:
            raise ValueError(f"t_try has to be in (0, 1], got {self.t_try}")
        if self.split_try is not None and self.split_try < 1:
            raise ValueError(f"split_try has to be positive, got {self.split_try}")
        if self.seed < 0:
            raise ValueError(f"seed has to be non-negative, got {self.seed}")
        if self.max_interaction is not UNBOUNDED and self.max_interaction < 1:
            raise ValueError(
                f"max_interaction has to be positive, got {self.max_interaction}"
            )

    def order_cap(self, d: int) -> int:
        return d if self.max_interaction is UNBOUNDED else min(d, self.max_interaction)

    def to_dict(self) -> dict:
        return {
            "ntrees": self.ntrees,
            "nsplits": self.nsplits,
            "t_try": self.t_try,
            "split_try": self.split_try,
            "max_interaction": self.max_interaction,
            "seed": self.seed,
            "bootstrap": self.bootstrap,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> FitParams:
        return cls(**{k: doc[k] for k in cls().to_dict() if k in doc})

    def label(self) -> str:
        order = "inf" if self.max_interaction is UNBOUNDED else self.max_interaction
        return (
            f"max_interaction={order};ntrees={self.ntrees};nsplits={self.nsplits};"
            f"t_try={self.t_try};split_try={self.split_try}"
        )


@dataclass
class ForestModel:
    families: list
    params: FitParams
    d: int
    training_min: np.ndarray
    training_max: np.ndarray
    feature_names: tuple | None = None

    def __post_init__(self) -> None:
        if len(self.families) != self.params.ntrees:
            raise ValueError(
                f"Expected {self.params.ntrees} families, got {len(self.families)}"
            )

    def name(self, k: int) -> str:
        return self.feature_names[k] if self.feature_names else f"x{k + 1}"

    def component_coords(self, families: list | None = None) -> list:
        """Sorted coordinate sets carrying a non-empty tree in some family"""
        found = set()
        for family in self.families if families is None else families:
            found.update(u for u, tree in family.trees.items() if tree.leaves)
        return sorted(found, key=lambda u: (len(u), u))


# ############################
# ###  Evaluation helpers  ###
# ############################
def region_contains(region: Region, x: np.ndarray) -> bool:
    x = np.asarray(x, dtype=float)
    return all(lo < x[k] <= up for k, lo, up in zip(region.coords, region.lower, region.upper))


def tree_component_value(tree: Tree, x: np.ndarray) -> float:
    x = np.asarray(x, dtype=float)
    return float(sum(leaf.value for leaf in tree.leaves if region_contains(leaf.region, x)))


def tree_values(tree: Tree, x: np.ndarray) -> np.ndarray:
    """Vectorized `tree_component_value` over rows of `x`"""
    out = np.zeros(x.shape[0])
    for leaf in tree.leaves:
        out[leaf.region.mask(x)] += leaf.value
    return out


def family_predict(family: TreeFamily, x: np.ndarray) -> float:
    return float(sum(tree_component_value(tree, x) for tree in family.trees.values()))


def family_predict_many(family: TreeFamily, x: np.ndarray) -> np.ndarray:
    x = np.atleast_2d(np.asarray(x, dtype=float))
    out = np.zeros(x.shape[0])
    for tree in family.trees.values():
        out += tree_values(tree, x)
    return out


def forest_predict(model: ForestModel, x: np.ndarray) -> float:
    return float(np.mean([family_predict(f, x) for f in model.families]))


def forest_predict_many(model: ForestModel, x: np.ndarray) -> np.ndarray:
    x = np.atleast_2d(np.asarray(x, dtype=float))
    total = np.zeros(x.shape[0])
    for family in model.families:
        total += family_predict_many(family, x)
    return total / len(model.families)


__all__ = (
    "Coords",
    "Dataset",
    "FitParams",
    "ForestModel",
    "Leaf",
    "Region",
    "Tree",
    "TreeFamily",
    "UNBOUNDED",
    "family_predict",
    "family_predict_many",
    "forest_predict",
    "forest_predict_many",
    "region_contains",
    "tree_component_value",
    "tree_values",
)
