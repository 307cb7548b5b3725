"""Command line: ``tactile-her run | grid | curves``."""
from __future__ import annotations

import argparse
import glob
import itertools
import json
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .config import ARMS, MAIN_ARMS, ExperimentConfig, load_document
from .curves import aggregate, render_svg, write_aggregate
from .envs.core import LEVELS
from .envs.tasks import TASKS
from .errors import ConfigError, TrainingError

log = logging.getLogger("tactile_her")

EXIT_USAGE = 2
# the main comparison: five arms on every task, five seeds each
FULL_GRID = {"arms": list(MAIN_ARMS), "tasks": list(TASKS), "difficulties": ["Hard"], "seeds": [1, 2, 3, 4, 5]}


def _fail(msg, code=1):
    print(f"error: {msg}", file=sys.stderr)
    return code


def _read(path):
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(path)
    return load_document(path)


def build_config(path, overrides: dict) -> ExperimentConfig:
    doc = _read(path) if path else {}
    doc.update({k: v for k, v in overrides.items() if v is not None})
    return ExperimentConfig.from_dict(doc)


def run_dir(out, config: ExperimentConfig) -> Path:
    return Path(out) / config.run_name()


def is_complete(path: Path) -> bool:
    # the checkpoint is written last, so it marks a finished run
    return (path / "checkpoint.bin").exists() and (path / "metrics.csv").exists()


def run_one(config_dict: dict, out: str) -> str:
    from .trainer import run_experiment
    cfg = ExperimentConfig.from_dict(config_dict)
    run_experiment(cfg, run_dir(out, cfg))
    return cfg.run_name()


def grid_cells(doc: dict) -> list:
    """Expand a grid document into one ExperimentConfig per cell."""
    base = dict(doc.get("base", {}))
    unknown = set(doc) - {"base", "arms", "tasks", "difficulties", "seeds"}
    if unknown:
        raise ConfigError(f"grid: unknown fields {sorted(unknown)}")
    axes = {
        "arm": doc.get("arms", [base.get("arm", "CPER+IR")]),
        "task": doc.get("tasks", [base.get("task", "Push")]),
        "difficulty": doc.get("difficulties", [base.get("difficulty", "Simple")]),
        "seed": doc.get("seeds", [base.get("seed", 1)]),
    }
    cells = []
    for arm, task, level, seed in itertools.product(*axes.values()):
        cells.append(ExperimentConfig.from_dict({**base, "arm": arm, "task": task, "difficulty": level, "seed": seed}))
    return cells


def cmd_run(args) -> int:
    overrides = dict(seed=args.seed, epochs=args.epochs, arm=args.arm, task=args.task, difficulty=args.difficulty)
    try:
        cfg = build_config(args.config, overrides)
    except FileNotFoundError as exc:
        return _fail(f"config file not found: {exc.args[0]}", EXIT_USAGE)
    except (ConfigError, ValueError) as exc:
        return _fail(f"invalid config: {exc}")
    try:
        name = run_one(cfg.to_dict(), args.out)
    except TrainingError as exc:
        return _fail(f"training failed: {exc}")
    print(run_dir(args.out, cfg))
    log.info("finished %s", name)
    return 0


def cmd_grid(args) -> int:
    try:
        doc = FULL_GRID if args.full else _read(args.grid)
        if args.epochs is not None:
            doc = {**doc, "base": {**doc.get("base", {}), "epochs": args.epochs}}
        cells = grid_cells(doc)
    except FileNotFoundError as exc:
        return _fail(f"grid file not found: {exc.args[0]}", EXIT_USAGE)
    except (ConfigError, ValueError) as exc:
        return _fail(f"invalid grid: {exc}")
    if args.list:
        for c in cells:
            print(c.run_name())
        print(f"{len(cells)} cells")
        return 0
    todo = [c for c in cells if not (args.skip_existing and is_complete(run_dir(args.out, c)))]
    print(f"{len(cells)} cells, {len(todo)} to run")
    failures = {}
    with ProcessPoolExecutor(max_workers=max(1, args.jobs)) as pool:
        futures = {c.run_name(): pool.submit(run_one, c.to_dict(), args.out) for c in todo}
        for name, fut in futures.items():
            try:
                fut.result()
                print(f"done {name}")
            except Exception as exc:  # a broken cell must not stop the grid
                failures[name] = f"{type(exc).__name__}: {exc}"
                print(f"FAILED {name}: {failures[name]}")
    Path(args.out).mkdir(parents=True, exist_ok=True)
    summary = {"cells": len(cells), "ran": len(todo), "failures": failures}
    (Path(args.out) / "grid_summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    if failures:
        print(f"{len(failures)} cell(s) failed: {', '.join(sorted(failures))}")
        return 1
    return 0


def cmd_curves(args) -> int:
    paths = sorted(glob.glob(args.results, recursive=True))
    if not paths:
        return _fail(f"no metrics files match {args.results}")
    agg = aggregate(paths, args.metric)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    write_aggregate(out, agg)
    out.with_suffix(".svg").write_text(render_svg(agg, title=args.metric.replace("_", " ")))
    print(f"{len(paths)} runs, {len(agg)} arm(s) -> {out}, {out.with_suffix('.svg')}")
    return 0


def make_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="tactile-her", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="train one experiment")
    r.add_argument("config", nargs="?", help="JSON or TOML experiment config (defaults if omitted)")
    r.add_argument("--seed", type=int)
    r.add_argument("--epochs", type=int)
    r.add_argument("--arm", choices=sorted(ARMS))
    r.add_argument("--task", choices=sorted(TASKS))
    r.add_argument("--difficulty", choices=list(LEVELS))
    r.add_argument("--out", default="runs", help="parent directory for run folders")
    r.set_defaults(func=cmd_run)

    g = sub.add_parser("grid", help="run arms x tasks x difficulties x seeds")
    src = g.add_mutually_exclusive_group(required=True)
    src.add_argument("grid", nargs="?", help="grid document with base/arms/tasks/difficulties/seeds")
    src.add_argument("--full", action="store_true", help="five main arms x three tasks x five seeds")
    g.add_argument("--epochs", type=int, help="override epochs for every cell")
    g.add_argument("--out", default="runs")
    g.add_argument("--jobs", type=int, default=1)
    g.add_argument("--skip-existing", action="store_true")
    g.add_argument("--list", action="store_true", help="print the cells and exit")
    g.set_defaults(func=cmd_grid)

    c = sub.add_parser("curves", help="aggregate metrics into mean and 95%% band")
    c.add_argument("results", help="glob of metrics.csv files, e.g. 'runs/*/metrics.csv'")
    c.add_argument("out", help="aggregated CSV path; the SVG goes next to it")
    c.add_argument("--metric", default="eval_success", choices=("eval_success", "train_success", "mean_reward"))
    c.set_defaults(func=cmd_curves)
    return p


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
