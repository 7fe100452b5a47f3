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
from .errors import GridTooLarge, NonConvergence
from .logging import logger
from .types import Coords, ForestModel

from dataclasses import dataclass, field
from functools import reduce
from math import prod

import numpy as np
import pandas as pd


@dataclass
class GridComponent:
    """Piecewise constant component on the product grid of `breaks`

    Cell `i` of an axis is (breaks[i], breaks[i + 1]], the first cell also
    holds the range minimum.
    """

    coords: Coords
    breaks: tuple
    values: np.ndarray

    def widths(self, axis: int) -> np.ndarray:
        return np.diff(self.breaks[axis])

    def weights(self, axis: int) -> np.ndarray:
        return _weights(self.breaks[axis])

    def lookup(self, x: np.ndarray) -> np.ndarray:
        """Values at rows of the full predictor matrix `x`"""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        cells = tuple(_cell_of(b, x[:, k]) for k, b in zip(self.coords, self.breaks))
        return self.values[cells]

    def axis_means(self, axis: int) -> np.ndarray:
        return np.tensordot(self.weights(axis), np.moveaxis(self.values, axis, 0), axes=1)

    def violation(self) -> float:
        """Largest weighted axis mean over all slices"""
        means = (self.axis_means(a) for a in range(len(self.coords)))
        return max((float(np.max(np.abs(m), initial=0.0)) for m in means), default=0.0)

    def refine(self, breaks: tuple) -> np.ndarray:
        """Values on grid `breaks`, exact when it refines the own grid"""
        cells = [
            _cell_of(own, 0.5 * (b[:-1] + b[1:])) for own, b in zip(self.breaks, breaks)
        ]
        return self.values[np.ix_(*cells)]

    def scaled(self, factor: float) -> GridComponent:
        return GridComponent(self.coords, self.breaks, self.values * factor)


@dataclass
class SummedComponent:
    """Component kept as a sum of grid components on separate grids

    Used when the common refinement of the parts would exceed
    `max_merge_cells`. Every part satisfies the zero mean constraint on
    its own.
    """

    coords: Coords
    parts: list

    @property
    def breaks(self) -> tuple:
        return _union_breaks(self.parts)

    def lookup(self, x: np.ndarray) -> np.ndarray:
        return sum(part.lookup(x) for part in self.parts)

    def violation(self) -> float:
        return sum(part.violation() for part in self.parts)

    def refine(self, breaks: tuple) -> np.ndarray:
        values = np.zeros(tuple(b.size - 1 for b in breaks))
        for part in self.parts:
            values += part.refine(breaks)
        return values

    def scaled(self, factor: float) -> SummedComponent:
        return SummedComponent(self.coords, [part.scaled(factor) for part in self.parts])


@dataclass
class PurifiedModel:
    constant: float
    components: dict = field(default_factory=dict)

    def predict(self, x: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        out = np.full(x.shape[0], self.constant)
        for comp in self.components.values():
            out += comp.lookup(x)
        return out

    def constraint_violation(self) -> float:
        """Largest weighted axis mean over all components and slices"""
        return max((comp.violation() for comp in self.components.values()), default=0.0)

    def scaled(self, factor: float) -> PurifiedModel:
        return PurifiedModel(
            self.constant * factor,
            {u: comp.scaled(factor) for u, comp in self.components.items()},
        )


def _cell_of(breaks: np.ndarray, x: np.ndarray) -> np.ndarray:
    return np.clip(np.searchsorted(breaks, x, side="left") - 1, 0, breaks.size - 2)


def _weights(breaks: np.ndarray) -> np.ndarray:
    widths = np.diff(breaks)
    total = widths.sum()
    if total <= 0.0:
        return np.full(widths.size, 1.0 / widths.size)
    return widths / total


def _union(arrays) -> np.ndarray:
    out = reduce(np.union1d, arrays)
    # degenerate coordinate still gets one cell
    return out if out.size > 1 else np.array([out[0], out[0]])


def _union_breaks(parts: list) -> tuple:
    return tuple(
        _union([p.breaks[axis] for p in parts]) for axis in range(len(parts[0].coords))
    )


def _cells(breaks: tuple) -> int:
    return prod(b.size - 1 for b in breaks)


def _merge(coords: Coords, parts: list) -> GridComponent | SummedComponent:
    parts = [q for p in parts for q in (p.parts if isinstance(p, SummedComponent) else [p])]
    if len(parts) == 1:
        return parts[0]

    axes = _union_breaks(parts)
    if _cells(axes) > rpf_global_params["max_merge_cells"]:
        return SummedComponent(coords, parts)

    values = np.zeros(tuple(b.size - 1 for b in axes))
    for part in parts:
        values += part.refine(axes)
    return GridComponent(coords, axes, values)


def _combine(models: list) -> PurifiedModel:
    parts = {}
    for model in models:
        for u, comp in model.components.items():
            parts.setdefault(u, []).append(comp)
    return PurifiedModel(
        sum(model.constant for model in models),
        {u: _merge(u, p) for u, p in parts.items()},
    )


def _axis_breaks(families: list, u: Coords, k: int, lo: float, hi: float) -> np.ndarray:
    """Cuts on coordinate `k` of trees whose coordinates contain `u`"""
    cuts = [lo, hi]
    for family in families:
        for v, tree in family.trees.items():
            if not set(u) <= set(v):
                continue
            i = v.index(k)
            for leaf in tree.leaves:
                cuts.extend((leaf.region.lower[i], leaf.region.upper[i]))

    cuts = np.asarray(cuts)
    inner = cuts[(cuts > lo) & (cuts < hi)]
    return _union(([lo], inner, [hi]))


def _slice(breaks: np.ndarray, lo: float, up: float) -> slice:
    start = int(np.searchsorted(breaks, lo, side="left"))
    stop = int(np.searchsorted(breaks, up, side="right")) - 1
    return slice(start, max(start, stop))


def flatten(
    model: ForestModel, bounds: tuple | None = None, families: list | None = None
) -> dict:
    """Family averaged components on per component grids

    Grid of component `u` holds the cuts of every tree whose coordinates
    contain `u`, so mass moved down from higher orders lands on cell
    boundaries of the lower component.

    :param model:     Fitted forest
    :param bounds:    (minimums, maximums) per coordinate, training range by default
    :param families:  Subset of families to average, all by default
    :return:          Map from coordinate set to `GridComponent`
    """
    lows, highs = (model.training_min, model.training_max) if bounds is None else bounds
    families = model.families if families is None else families

    coords = [u for u in model.component_coords(families) if len(u) > 1]
    coords = [(k,) for k in range(model.d)] + coords

    out = {}
    for u in coords:
        axes = tuple(
            _axis_breaks(families, u, k, float(lows[k]), float(highs[k])) for k in u
        )
        if _cells(axes) > rpf_global_params["max_grid_cells"]:
            raise GridTooLarge(f"Component {u} needs {_cells(axes)} cells")

        values = np.zeros(tuple(b.size - 1 for b in axes))
        for family in families:
            tree = family.trees.get(u)
            if tree is None:
                continue
            for leaf in tree.leaves:
                cell = tuple(
                    _slice(b, lo, up)
                    for b, lo, up in zip(axes, leaf.region.lower, leaf.region.upper)
                )
                values[cell] += leaf.value
        values /= len(families)

        out[u] = GridComponent(u, axes, values)

    logger.debug(f"Flattened {len(out)} components")
    return out


def _accumulate(comps: dict, u: Coords, breaks: tuple, values: np.ndarray) -> None:
    """Adds `values` on grid `breaks` to component `u`, refining its grid when needed"""
    incoming = GridComponent(u, breaks, values)
    target = comps.get(u)
    if target is None:
        comps[u] = GridComponent(u, breaks, np.array(values, dtype=float))
        return

    axes = tuple(_union((own, b)) for own, b in zip(target.breaks, breaks))
    if any(a.size != own.size for a, own in zip(axes, target.breaks)):
        if _cells(axes) > rpf_global_params["max_grid_cells"]:
            raise GridTooLarge(f"Component {u} needs {_cells(axes)} cells")
        target = comps[u] = GridComponent(u, axes, target.refine(axes))
    target.values += incoming.refine(target.breaks)


def _sweep(constant: float, comps: dict) -> PurifiedModel:
    scale = max([1.0] + [float(np.max(np.abs(c.values), initial=0.0)) for c in comps.values()])
    tol = rpf_global_params["purify_tol"] * scale

    for sweep in range(rpf_global_params["max_purify_sweeps"]):
        moved = 0.0
        for order in range(max((len(u) for u in comps), default=0), 0, -1):
            for u in sorted(v for v in comps if len(v) == order):
                comp = comps[u]
                for axis, k in enumerate(u):
                    mean = comp.axis_means(axis)
                    comp.values -= np.expand_dims(mean, axis)
                    moved = max(moved, float(np.max(np.abs(mean), initial=0.0)))

                    lower = u[:axis] + u[axis + 1 :]
                    if not lower:
                        constant += float(mean)
                        continue
                    _accumulate(comps, lower, comp.breaks[:axis] + comp.breaks[axis + 1 :], mean)

        if moved < tol:
            logger.debug(f"Purification converged after {sweep + 1} sweeps")
            return PurifiedModel(constant, comps)

    raise NonConvergence(
        f"Purification did not converge in {rpf_global_params['max_purify_sweeps']} sweeps"
    )


def purify(components: dict | PurifiedModel) -> PurifiedModel:
    """Moves weighted axis means from each component down to lower orders

    Components are swept from the highest order downward, the constant
    collects means of one dimensional components. The sum of all
    components is left unchanged. Summed components are purified part by
    part.
    """
    constant = 0.0
    if isinstance(components, PurifiedModel):
        constant = components.constant
        components = components.components

    grids = {
        u: GridComponent(c.coords, c.breaks, np.array(c.values, dtype=float))
        for u, c in components.items()
        if isinstance(c, GridComponent)
    }
    summed = [
        {u: GridComponent(u, p.breaks, np.array(p.values, dtype=float))}
        for u, c in components.items()
        if isinstance(c, SummedComponent)
        for p in c.parts
    ]
    if not summed:
        return _sweep(constant, grids)
    return _combine([_sweep(constant, grids)] + [_sweep(0.0, part) for part in summed])


def purify_forest(model: ForestModel, bounds: tuple | None = None) -> PurifiedModel:
    """Purified components of a fitted forest

    Families are flattened and purified one by one, the family averaged
    result is merged per component onto the common refinement of the
    family grids, or kept as `SummedComponent` above `max_merge_cells`.
    """
    scale = 1.0 / len(model.families)
    parts = [
        purify(flatten(model, bounds, [family])).scaled(scale) for family in model.families
    ]
    out = _combine(parts)
    logger.info(f"Purified {len(out.components)} components of {len(parts)} families")
    return out


def _rows(comp: GridComponent | SummedComponent, label: str, grid_size: int | None) -> list:
    if grid_size is None:
        edges = comp.breaks
        values = comp.values if isinstance(comp, GridComponent) else comp.refine(edges)
    else:
        edges = tuple(np.linspace(b[0], b[-1], grid_size + 1) for b in comp.breaks)
        mids = [0.5 * (e[:-1] + e[1:]) for e in edges]
        mesh = np.meshgrid(*mids, indexing="ij")
        x = np.zeros((mesh[0].size, max(comp.coords) + 1))
        for k, m in zip(comp.coords, mesh):
            x[:, k] = m.ravel()
        values = comp.lookup(x).reshape(mesh[0].shape)

    rows = []
    for cell in np.ndindex(values.shape):
        row = {"component": label}
        for axis, i in enumerate(cell):
            row[f"axis{axis + 1}_lower"] = edges[axis][i]
            row[f"axis{axis + 1}_upper"] = edges[axis][i + 1]
        row["value"] = values[cell]
        rows.append(row)
    return rows


def export_components(
    purified: PurifiedModel,
    order: int = 2,
    grid_size: int | None = None,
    names: tuple | None = None,
) -> pd.DataFrame:
    """Plot ready table of purified components with |u| <= order plus constant row"""

    def name(k: int) -> str:
        return names[k] if names else f"x{k + 1}"

    rows = [{"component": "constant", "value": purified.constant}]
    for u in sorted(purified.components, key=lambda v: (len(v), v)):
        if len(u) <= order:
            label = ":".join(name(k) for k in u)
            rows.extend(_rows(purified.components[u], label, grid_size))

    columns = ["component", "axis1_lower", "axis1_upper"]
    if order >= 2:
        columns += ["axis2_lower", "axis2_upper"]
    return pd.DataFrame(rows).reindex(columns=columns + ["value"])


__all__ = (
    "GridComponent",
    "PurifiedModel",
    "SummedComponent",
    "export_components",
    "flatten",
    "purify",
    "purify_forest",
)
