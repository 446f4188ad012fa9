"""Shared helpers for the demo scripts: load a config, run it, write results."""

import pathlib
import sys

from beurling.config import override, parse_config
from beurling.experiments import run_experiment
from beurling.results import write_results

HERE = pathlib.Path(__file__).resolve().parent


def run(name, out=None):
    cfg = parse_config((HERE / "configs" / f"{name}.json").read_text(encoding="utf-8"))
    root = out or (sys.argv[1] if len(sys.argv) > 1 else str(HERE / "results"))
    out = str(pathlib.Path(root) / name)
    table = run_experiment(override(cfg, output=out))
    paths = write_results(table, out, cfg.format)
    print(f"wrote {paths[0]} ({len(table.rows)} rows)")
    return table
