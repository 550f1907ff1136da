#!/usr/bin/env python3
"""Scaled benchmark run on the MNIST background-random corpus.

Expects the published .amat files (see README for where to get them):

    data/mnist_background_random_train.amat   (12000 examples)
    data/mnist_background_random_test.amat    (50000 examples)

Trains one 200-unit layer on a 2000/500 split and evaluates both pipelines
on the first 5000 test examples. Takes a few minutes on one core.
"""

import sys
from pathlib import Path

from sdae_ivs.cli import main

REPO = Path(__file__).resolve().parent.parent
CONFIG = REPO / "configs" / "bgrand_scaled.ini"
TRAIN = REPO / "data" / "mnist_background_random_train.amat"

if __name__ == "__main__":
    if not TRAIN.is_file():
        print(f"corpus file missing: {TRAIN}", file=sys.stderr)
        print("see README for download instructions", file=sys.stderr)
        sys.exit(2)
    sys.exit(main(["run", "--config", str(CONFIG), "--paper-grid",
                   *sys.argv[1:]]))
