#!/usr/bin/env python3
"""Paired SDAE vs SDAE-IVS comparison on the planted-noise benchmark.

Runs both pipelines with identical seeds and budgets over several seeds at
depths 1 and 2 and prints a small results table. Library-level twin of
`sdae-ivs run --config configs/paired_synthetic.ini`.
"""

import argparse
import time

from sdae_ivs.dae import DaeTrainConfig
from sdae_ivs.data import SyntheticSpec, gen_synthetic, split
from sdae_ivs.ivs import IvsConfig
from sdae_ivs.mlr import TrainConfig, evaluate
from sdae_ivs.numerics import derive_rng, make_rng
from sdae_ivs.stack import StackConfig, fine_tune, predict_labels, pretrain

SPEC = SyntheticSpec(num_relevant=20, num_irrelevant=80, num_classes=5,
                     class_separation=3.0, noise_sd=0.5,
                     examples_per_split=(600, 200, 1500))
HIDDEN = (12, 10)


def stack_config(depth, ivs_enabled):
    return StackConfig(
        depth=depth,
        dae=tuple(DaeTrainConfig(HIDDEN[i], 0.3, 0.1, 10, 0)
                  for i in range(depth)),
        ivs=tuple(IvsConfig(0.3, 8, TrainConfig(0.1, 30, 5, 0))
                  for _ in range(depth)),
        fine_tune=TrainConfig(0.1, 10, 3, 0),
        ivs_enabled=ivs_enabled,
    )


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seeds", type=int, default=5)
    parser.add_argument("--depths", type=int, nargs="+", default=[1, 2])
    args = parser.parse_args()

    print(f"{'depth':>5} {'seed':>4} {'sdae %':>8} {'sdae-ivs %':>10} {'kept':>5}")
    for depth in args.depths:
        wins = 0
        for seed in range(args.seeds):
            started = time.perf_counter()
            data, _ = gen_synthetic(SPEC, make_rng(seed))
            train, valid, test = split(data, SPEC.examples_per_split[:2])
            errors, kept = {}, "-"
            for enabled in (False, True):
                model, ivs_results = pretrain(train, valid,
                                              stack_config(depth, enabled),
                                              derive_rng(seed, depth),
                                              return_ivs=True)
                tuned = fine_tune(model, train, valid,
                                  TrainConfig(0.1, 10, 3, seed=seed + 1000))
                errors[enabled] = evaluate(
                    lambda x: predict_labels(tuned, x), test).error_rate
                if enabled:
                    kept = ivs_results[0].mask.popcount
            wins += errors[True] <= errors[False]
            print(f"{depth:>5} {seed:>4} {100 * errors[False]:>8.2f} "
                  f"{100 * errors[True]:>10.2f} {kept:>5}  "
                  f"({time.perf_counter() - started:.0f}s)")
        print(f"depth {depth}: selection at least as good in "
              f"{wins}/{args.seeds} seeds\n")


if __name__ == "__main__":
    main()
