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

from .types import FitParams, ForestModel, Leaf, Region, Tree, TreeFamily

from math import inf
from pathlib import Path

import json
import numpy as np

MODEL_VERSION = 1


def _num(v: float) -> float | str:
    if v == inf:
        return "inf"
    if v == -inf:
        return "-inf"
    return float(v)


def _unnum(v: float | str) -> float:
    return float(v)


def _family_doc(family: TreeFamily) -> dict:
    return {
        "rng_seed": family.rng_seed,
        "sample_index": None
        if family.sample_index is None
        else [int(i) for i in family.sample_index],
        "residuals": [float(r) for r in family.residuals],
        "ssr_trace": [float(s) for s in family.ssr_trace],
        "spawn_log": [
            {"parent": list(p), "child": list(c), "parent_leaves": n}
            for p, c, n in family.spawn_log
        ],
        "trees": [
            {
                "coords": list(u),
                "leaves": [
                    {
                        "lower": [_num(v) for v in leaf.region.lower],
                        "upper": [_num(v) for v in leaf.region.upper],
                        "value": float(leaf.value),
                    }
                    for leaf in tree.leaves
                ],
            }
            for u, tree in family.trees.items()
        ],
    }


def _family_from_doc(doc: dict) -> TreeFamily:
    trees = {}
    for tdoc in doc["trees"]:
        u = tuple(tdoc["coords"])
        trees[u] = Tree(
            u,
            [
                Leaf(
                    Region(
                        u,
                        tuple(_unnum(v) for v in ldoc["lower"]),
                        tuple(_unnum(v) for v in ldoc["upper"]),
                    ),
                    float(ldoc["value"]),
                )
                for ldoc in tdoc["leaves"]
            ],
        )

    index = doc.get("sample_index")
    return TreeFamily(
        trees=trees,
        residuals=np.asarray(doc.get("residuals", []), dtype=float),
        rng_seed=int(doc.get("rng_seed", 0)),
        sample_index=None if index is None else np.asarray(index, dtype=int),
        ssr_trace=list(doc.get("ssr_trace", [])),
        spawn_log=[
            (tuple(s["parent"]), tuple(s["child"]), int(s["parent_leaves"]))
            for s in doc.get("spawn_log", [])
        ],
    )


def model_to_document(model: ForestModel) -> dict:
    return {
        "version": MODEL_VERSION,
        "params": model.params.to_dict(),
        "d": model.d,
        "feature_names": None if model.feature_names is None else list(model.feature_names),
        "training_min": [float(v) for v in model.training_min],
        "training_max": [float(v) for v in model.training_max],
        "families": [_family_doc(f) for f in model.families],
    }


def model_from_document(doc: dict) -> ForestModel:
    if doc.get("version") != MODEL_VERSION:
        raise ValueError(f"Unsupported model file version {doc.get('version')!r}")

    names = doc.get("feature_names")
    return ForestModel(
        families=[_family_from_doc(f) for f in doc["families"]],
        params=FitParams.from_dict(doc["params"]),
        d=int(doc["d"]),
        training_min=np.asarray(doc["training_min"], dtype=float),
        training_max=np.asarray(doc["training_max"], dtype=float),
        feature_names=None if names is None else tuple(names),
    )


def dumps_model(model: ForestModel) -> str:
    # repr based float formatting of json round-trips exactly
    return json.dumps(model_to_document(model), allow_nan=False, separators=(",", ":"))


def loads_model(text: str) -> ForestModel:
    return model_from_document(json.loads(text))


def save_model(model: ForestModel, path: str | Path) -> None:
    Path(path).write_text(dumps_model(model))


def load_model(path: str | Path) -> ForestModel:
    return loads_model(Path(path).read_text())


__all__ = (
    "MODEL_VERSION",
    "dumps_model",
    "load_model",
    "loads_model",
    "model_from_document",
    "model_to_document",
    "save_model",
)
