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

from .errors import EmptyChild, InvalidSplitPoint, NoValidSplit
from .types import Coords, Dataset, Leaf, Region

from dataclasses import dataclass

import numpy as np

REJECT = None  # Score of a candidate leaving one child without data


@dataclass(frozen=True)
class SplitCandidate:
    tree_coords: Coords
    split_coord: int
    leaf_index: int
    point: float
    score: float | None

    def scan_key(self) -> tuple:
        return self.tree_coords, self.leaf_index, self.split_coord


@dataclass(frozen=True)
class SplitResult:
    region_plus: Region
    region_minus: Region
    value_plus: float
    value_minus: float
    updated_residuals: np.ndarray

    @property
    def leaves(self) -> tuple:
        return (
            Leaf(self.region_plus, self.value_plus),
            Leaf(self.region_minus, self.value_minus),
        )


def split_means(
    residuals: np.ndarray, in_plus: np.ndarray, in_minus: np.ndarray
) -> tuple:
    """Means of residuals over both children, index arrays or boolean masks"""
    plus = np.asarray(residuals)[in_plus]
    minus = np.asarray(residuals)[in_minus]
    if plus.size == 0 or minus.size == 0:
        raise EmptyChild("Split leaves a child without data")
    return float(plus.mean()), float(minus.mean())


def _children(k: int, region: Region, c: float, x: np.ndarray) -> tuple:
    lo, up = region.bounds(k)
    if not lo <= c < up:
        raise InvalidSplitPoint(f"Split point {c} outside of ({lo}, {up}]")

    inside = region.mask(x)
    plus = inside & (x[:, k] > c)
    minus = inside & (x[:, k] <= c)
    return plus, minus


def apply_split(
    k: int, leaf: Leaf, c: float, data: Dataset, residuals: np.ndarray
) -> SplitResult:
    """Splits `leaf` along coordinate `k` at `c` and refits both children

    A leaf whose region does not restrict `k` is lifted first, so for a new
    interaction the caller passes the ancestor leaf with value 0.
    """
    plus, minus = _children(k, leaf.region, c, data.x)
    mu_plus, mu_minus = split_means(residuals, plus, minus)

    updated = np.array(residuals, dtype=float)
    updated[plus] -= mu_plus
    updated[minus] -= mu_minus

    region_plus, region_minus = leaf.region.cut(k, c)
    return SplitResult(
        region_plus=region_plus,
        region_minus=region_minus,
        value_plus=leaf.value + mu_plus,
        value_minus=leaf.value + mu_minus,
        updated_residuals=updated,
    )


def draw_points(pool: np.ndarray, split_try: int | None, rng: np.random.Generator) -> np.ndarray:
    """Uniform draws with replacement from `pool`, all distinct values when `split_try` is None"""
    if pool.size == 0:
        return pool
    if split_try is None:
        return np.unique(pool)
    return pool[rng.integers(pool.size, size=split_try)]


def candidate_pool(region: Region, k: int, x: np.ndarray) -> np.ndarray:
    """Values of coordinate `k` inside `region` strictly below its k-supremum"""
    col = x[region.mask(x), k]
    return col[col < region.bounds(k)[1]]


def candidate_points(
    leaf: Region,
    k: int,
    data: Dataset,
    split_try: int | None,
    rng: np.random.Generator,
) -> list:
    return draw_points(candidate_pool(leaf, k, data.x), split_try, rng).tolist()


def score_split(
    k: int, leaf: Leaf, c: float, data: Dataset, residuals: np.ndarray
) -> float | None:
    """Sum of squared residuals after a hypothetical split, `REJECT` on an empty child"""
    try:
        result = apply_split(k, leaf, c, data, residuals)
    except (EmptyChild, InvalidSplitPoint):
        return REJECT
    return float(np.sum(result.updated_residuals**2))


def score_points(
    values: np.ndarray, residuals: np.ndarray, points: np.ndarray, ssr: float
) -> np.ndarray:
    """Scores of many split points of one leaf at once

    :param values:     Coordinate values of samples inside the leaf
    :param residuals:  Residuals of the same samples
    :param points:     Candidate split points
    :param ssr:        Current total sum of squared residuals
    :return:           Total SSR after each split, `nan` where rejected
    """
    order = np.argsort(values, kind="stable")
    xs = values[order]
    cum = np.cumsum(residuals[order])
    total = cum[-1]
    m = xs.size

    n_minus = np.searchsorted(xs, points, side="right")
    n_plus = m - n_minus
    valid = (n_minus > 0) & (n_plus > 0)

    s_minus = np.where(n_minus > 0, cum[np.maximum(n_minus - 1, 0)], 0.0)
    s_plus = total - s_minus
    with np.errstate(divide="ignore", invalid="ignore"):
        gain = s_minus**2 / n_minus + s_plus**2 / n_plus
    return np.where(valid, ssr - gain, np.nan)


def select_best(candidates: list) -> SplitCandidate:
    """Candidate with minimal score

    Ties go to the earliest in scan order: tree coordinates, leaf index,
    split coordinate, then position in `candidates`.
    """
    best = None
    for pos, cand in enumerate(candidates):
        if cand.score is REJECT:
            continue
        key = (cand.score, cand.scan_key(), pos)
        if best is None or key < best[0]:
            best = key, cand

    if best is None:
        raise NoValidSplit("All split candidates were rejected")
    return best[1]


__all__ = (
    "REJECT",
    "SplitCandidate",
    "SplitResult",
    "apply_split",
    "candidate_points",
    "candidate_pool",
    "draw_points",
    "score_points",
    "score_split",
    "select_best",
    "split_means",
)
