#!/usr/bin/env python3
"""Experiment: case-weight sweep and likelihood-comparison diagnostics on
the shipped scenario, across seeds.

Defaults match the frozen acceptance configuration (train 600 / test 3000,
prior strength 120 units per row, biased prior: intercept +6, slopes x0.7,
sigma x1.5... see --help), so this doubles as a robustness report: it prints,
per seed, whether the sweep shape (train monotone, interior test minimum,
counts-only wins train / loses test) and the KS ordering hold.

Usage:
    python scripts/check_fig4_fig5.py [--seeds N] [--train N] [--test N]
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from delayprop.evaluation import weight_sweep, ll_comparison
from delayprop.inference import forward_sample
from delayprop.network import build_network, train_network
from delayprop.synth import default_scenario, generate, perturbed_prior_spec

WEIGHTS = [1.0, 3.0, 10.0, 30.0, 100.0, 300.0]
PHASES = ["gate_in_prev", "turn_around", "gate_out", "taxi_out",
          "airborne", "taxi_in", "gate_in_dest"]


def check_sweep(gt, seed, n_train, n_test, strength, shift, slope, sigma):
    data = generate(gt, n_train + n_test, seed)
    train = data.cases[:n_train]
    test = data.cases[n_train:]
    spec = perturbed_prior_spec(gt, intercept_shift=shift,
                                slope_scale=slope, sigma_scale=sigma)
    sweep = weight_sweep(spec, train, test, WEIGHTS, nodes=PHASES,
                         prior_strength=strength)
    tr = [sweep.total_train()[w] for w in WEIGHTS]
    te = [sweep.total_test()[w] for w in WEIGHTS]
    mono = all(a >= b - 1e-12 for a, b in zip(tr, tr[1:]))
    imin = te.index(min(te))
    interior = imin not in (0, len(te) - 1) and min(te) < te[0] and min(te) < te[-1]
    co_tr = float(np.mean([sweep.counts_only[n][0] for n in PHASES]))
    co_te = float(np.mean([sweep.counts_only[n][1] for n in PHASES]))
    beats = co_tr < sweep.total_train()[30.0]
    loses = co_te > sweep.total_test()[30.0]
    ok = mono and interior and beats and loses
    print(f"  seed {seed}: train={['%.2f' % v for v in tr]}")
    print(f"           test={['%.2f' % v for v in te]}")
    print(f"           mono={mono} interior={interior} "
          f"counts(tr {co_tr:.2f}, te {co_te:.2f}) beats={beats} "
          f"loses={loses} => {'PASS' if ok else 'FAIL'}")
    return ok


def check_ks(gt, seed, shift, slope, sigma):
    train = generate(gt, 5000, seed).cases
    prior = build_network(gt.network.spec)
    trained = train_network(prior, train, 30.0)
    holdout = forward_sample(gt.network, 1000, seed + 1)

    well = ll_comparison(trained, holdout, 1000, seed + 2)
    mis_net = build_network(perturbed_prior_spec(
        gt, intercept_shift=shift, slope_scale=slope, sigma_scale=sigma))
    mis = ll_comparison(mis_net, holdout, 1000, seed + 2)
    ok = well.ks < 0.1 and mis.ks > well.ks
    print(f"  seed {seed}: KS well={well.ks:.4f} mis={mis.ks:.4f} "
          f"=> {'PASS' if ok else 'FAIL'}")
    return ok


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--seeds", type=int, default=12)
    ap.add_argument("--train", type=int, default=600)
    ap.add_argument("--test", type=int, default=3000)
    ap.add_argument("--strength", type=float, default=120.0)
    ap.add_argument("--shift", type=float, default=6.0)
    ap.add_argument("--slope", type=float, default=0.7)
    ap.add_argument("--sigma", type=float, default=1.8)
    args = ap.parse_args()

    gt = default_scenario()
    print(f"sweep (train={args.train}, test={args.test}, "
          f"strength={args.strength}, shift={args.shift}, "
          f"slope={args.slope}, sigma={args.sigma}):")
    passes = sum(check_sweep(gt, s, args.train, args.test, args.strength,
                             args.shift, args.slope, args.sigma)
                 for s in range(args.seeds))
    print(f"  -> {passes}/{args.seeds} sweep seeds pass")

    print("likelihood comparison:")
    passes = sum(check_ks(gt, s, args.shift, args.slope, args.sigma)
                 for s in range(args.seeds))
    print(f"  -> {passes}/{args.seeds} KS seeds pass")


if __name__ == "__main__":
    main()
