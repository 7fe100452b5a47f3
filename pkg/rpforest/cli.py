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
from .core.errors import DegenerateData, GridTooLarge, InvalidData, NonConvergence
from .core.forest import mean_ssr_trace
from .core.logging import logger
from .core.persist import load_model, save_model
from .core.purify import export_components, purify_forest
from .core.types import UNBOUNDED, FitParams, forest_predict_many
from .simulation import VARIANTS, SimModelSpec, estimator_for, rpf_grid, run_simulation, summarize
from .theory import TRUTH, convergence_experiment

from pathlib import Path

import argparse
import json
import sys

import numpy as np
import pandas as pd

EXIT_INPUT = 2
EXIT_DEGENERATE = 3
EXIT_NUMERIC = 4


def _order(text: str) -> int | None:
    if text.lower() in ("inf", "unbounded"):
        return UNBOUNDED
    return int(text)


def _split_try(text: str) -> int | None:
    return None if text.lower() in ("all", "none") else int(text)


def _n_list(text: str) -> list:
    return [int(v) for v in text.split(",") if v.strip()]


def _read_csv(path: Path) -> pd.DataFrame:
    try:
        table = pd.read_csv(path)
    except (OSError, ValueError) as e:
        raise InvalidData(f"Can not read {path}: {e}") from e
    try:
        return table.apply(pd.to_numeric)
    except ValueError as e:
        raise InvalidData(f"{path} has non numeric columns") from e


def _write(table: pd.DataFrame, out: Path | None) -> None:
    if out is None:
        table.to_csv(sys.stdout, index=False)
    else:
        table.to_csv(out, index=False)


# ##################
# ###  Commands  ###
# ##################
def cmd_fit(args: argparse.Namespace) -> None:
    table = _read_csv(args.data)
    if "y" not in table.columns:
        raise InvalidData(f"{args.data} has no column named y")

    params = FitParams(
        ntrees=args.ntrees,
        nsplits=args.nsplits,
        t_try=args.t_try,
        split_try=args.split_try,
        max_interaction=args.max_interaction,
        seed=args.seed,
        bootstrap=not args.no_bootstrap,
    )
    estimator = estimator_for(params).fit(table.drop(columns="y"), table["y"])
    save_model(estimator.model, args.out)

    trace = mean_ssr_trace(estimator.model)
    marks = sorted({0, len(trace) // 4, len(trace) // 2, 3 * len(trace) // 4, len(trace) - 1})
    print(f"model written to {args.out}")
    print("mean training SSR per iteration: " + ", ".join(f"{i}:{trace[i]:.4f}" for i in marks))


def cmd_predict(args: argparse.Namespace) -> None:
    model = load_model(args.model)
    table = _read_csv(args.data)
    x = table.drop(columns="y", errors="ignore")
    if x.shape[1] != model.d:
        raise InvalidData(f"Model needs {model.d} predictors, {args.data} has {x.shape[1]}")

    x = x.to_numpy(dtype=float)
    if not np.isfinite(x).all():
        rows = np.flatnonzero(~np.isfinite(x).all(axis=1))
        raise InvalidData(f"{args.data} has missing or infinite predictors in rows {rows.tolist()}")

    pred = forest_predict_many(model, x)
    _write(pd.DataFrame({"prediction": pred}), args.out)


def cmd_components(args: argparse.Namespace) -> None:
    model = load_model(args.model)
    purified = purify_forest(model)
    logger.info(f"constraint violation {purified.constraint_violation():.3e}")
    names = tuple(model.name(k) for k in range(model.d))
    _write(export_components(purified, args.order, args.grid_size, names), args.out)


def cmd_simulate(args: argparse.Namespace) -> None:
    try:
        spec = SimModelSpec.from_id(args.model, d=args.d, rho=args.rho, noise_sd=args.noise_sd)
    except ValueError as e:
        raise InvalidData(str(e)) from e

    grid = rpf_grid(args.grid, args.variant, dense=spec.dense, d=spec.d, ntrees=args.ntrees)
    rows = run_simulation(
        spec,
        args.variant,
        n=args.n,
        reps=args.reps,
        grid=grid,
        tune_reps=args.tune_reps,
        cv=args.cv,
        folds=args.folds,
        seed=args.seed,
    )
    if args.out is not None:
        rows.to_csv(args.out, index=False)

    table = summarize(rows)
    print(table[["model", "shape", "d", "variant", "mse"]].to_string(index=False))


def cmd_convergence(args: argparse.Namespace) -> None:
    report = convergence_experiment(
        args.n_list,
        args.reps,
        d=args.d,
        model=args.truth,
        noise_sd=args.noise_sd,
        bootstrap=args.bootstrap,
        c_m=args.c_m,
        sweeps=args.sweeps,
        seed=args.seed,
    )
    if args.out is not None:
        report.rows.to_csv(args.out, index=False)

    print(report.medians.to_string(index=False))
    print(report.summary())


# ################
# ###  Parser  ###
# ################
def _parsers() -> tuple:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="JSON file with flag defaults")
    common.add_argument("--verbose", action="store_true", help="log progress to stderr")
    common.add_argument("--n-jobs", type=int, default=1, help="parallel workers")
    common.add_argument("--seed", type=int, default=0)

    parser = argparse.ArgumentParser(
        prog="rpforest", description="Random planted forest regression"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    fit = sub.add_parser("fit", parents=[common], help="fit a forest on a CSV with column y")
    fit.add_argument("--data", type=Path, required=True)
    fit.add_argument("--out", type=Path, default=Path("model.json"))
    fit.add_argument("--max-interaction", type=_order, default=1, help="order, or inf")
    fit.add_argument("--ntrees", type=int, default=50)
    fit.add_argument("--nsplits", type=int, default=30)
    fit.add_argument("--t-try", type=float, default=0.4)
    fit.add_argument("--split-try", type=_split_try, default=10, help="count, or all")
    fit.add_argument("--no-bootstrap", action="store_true")
    fit.set_defaults(run=cmd_fit)

    predict = sub.add_parser("predict", parents=[common], help="predict rows of a CSV")
    predict.add_argument("--model", type=Path, required=True)
    predict.add_argument("--data", type=Path, required=True)
    predict.add_argument("--out", type=Path)
    predict.set_defaults(run=cmd_predict)

    comps = sub.add_parser("components", parents=[common], help="export purified components")
    comps.add_argument("--model", type=Path, required=True)
    comps.add_argument("--order", type=int, choices=(1, 2), default=2)
    comps.add_argument("--grid-size", type=int)
    comps.add_argument("--out", type=Path)
    comps.set_defaults(run=cmd_components)

    sim = sub.add_parser("simulate", parents=[common], help="run the simulation protocol")
    sim.add_argument("--model", default="additive-sparse-smooth")
    sim.add_argument("--variant", choices=tuple(VARIANTS), default="additive")
    sim.add_argument("--d", type=int, default=4)
    sim.add_argument("--n", type=int, default=500)
    sim.add_argument("--reps", type=int, default=20)
    sim.add_argument("--tune-reps", type=int, default=10)
    sim.add_argument("--grid", choices=("small", "full"), default="small")
    sim.add_argument("--ntrees", type=int, default=50)
    sim.add_argument("--cv", action="store_true", help="tune by cross validation per rep")
    sim.add_argument("--folds", type=int, default=10)
    sim.add_argument("--rho", type=float, default=0.3)
    sim.add_argument("--noise-sd", type=float, default=1.0)
    sim.add_argument("--out", type=Path)
    sim.set_defaults(run=cmd_simulate)

    conv = sub.add_parser("convergence", parents=[common], help="rate of the theoretical estimator")
    conv.add_argument("--n-list", type=_n_list, default=[500, 2000, 8000])
    conv.add_argument("--reps", type=int, default=10)
    conv.add_argument("--d", type=int, default=2)
    conv.add_argument("--truth", choices=tuple(TRUTH), default="smooth")
    conv.add_argument("--noise-sd", type=float, default=1.0)
    conv.add_argument("--bootstrap", action="store_true")
    conv.add_argument("--c-m", type=float, default=1.0)
    conv.add_argument("--sweeps", type=int, default=20)
    conv.add_argument("--out", type=Path)
    conv.set_defaults(run=cmd_convergence)

    return parser, sub.choices


def parse_args(argv: list | None = None) -> argparse.Namespace:
    """Parses `argv`, a `--config` file supplies defaults and explicit flags win"""
    parser, commands = _parsers()
    args = parser.parse_args(argv)
    if args.config is None:
        return args

    try:
        config = json.loads(args.config.read_text())
    except (OSError, ValueError) as e:
        raise InvalidData(f"Can not read config {args.config}: {e}") from e

    sub = commands[args.command]
    known = {a.dest: a for a in sub._actions}
    defaults = {}
    for key, value in config.items():
        dest = key.replace("-", "_")
        if dest not in known:
            raise InvalidData(f"Unknown config key {key!r} for command {args.command}")
        action = known[dest]
        if isinstance(value, str) and action.type is not None:
            value = action.type(value)
        defaults[dest] = value
    sub.set_defaults(**defaults)
    return parser.parse_args(argv)


def main(argv: list | None = None) -> int:
    try:
        args = parse_args(argv)
        rpf_global_params["n_jobs"] = args.n_jobs
        if args.verbose:
            logger.enable()
        args.run(args)
    except (NonConvergence, GridTooLarge) as e:
        print(f"rpforest: {e}", file=sys.stderr)
        return EXIT_NUMERIC
    except DegenerateData as e:
        print(f"rpforest: {e}", file=sys.stderr)
        return EXIT_DEGENERATE
    except (ValueError, OSError) as e:
        print(f"rpforest: {e}", file=sys.stderr)
        return EXIT_INPUT
    return 0


__all__ = (
    "main",
    "parse_args",
)
