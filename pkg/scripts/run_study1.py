#!/usr/bin/env python3
"""Dependence-strength sweep: both models across theta at ~50% censoring.

Desk scale by default (5 repetitions); pass --repetitions 20 for the
full-scale version.  Results land in out/study1.
"""
import argparse
import json
import tempfile

from depaft.cli import main as cli_main

parser = argparse.ArgumentParser(description=__doc__)
parser.add_argument("--out", default="out/study1")
parser.add_argument("--repetitions", type=int, default=5)
parser.add_argument("--threads", type=int, default=1)
parser.add_argument("--seed", type=int, default=29)
args = parser.parse_args()

config = {
    "study": 1,
    "repetitions": args.repetitions,
    "seed": args.seed,
    "n_train": 1000,
    "n_test": 1000,
    "max_rounds": 400,
    "checkpoint_stride": 25,
    "max_depth": 3,
}
with tempfile.NamedTemporaryFile("w", suffix=".json", delete=False) as fh:
    json.dump(config, fh)
    path = fh.name
raise SystemExit(
    cli_main(["study", "--config", path, "--out", args.out, "--threads", str(args.threads)])
)
