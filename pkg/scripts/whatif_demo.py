#!/usr/bin/env python3
"""Experiment: backward what-if queries on the shipped scenario.

Trains the default network on synthetic flights, then conditions the
destination gate-in delay on three increasingly late intervals and prints
each phase's posterior and expected value, i.e. the planner-facing question
"given the arrival was this late, where did the time go?".
"""

from __future__ import annotations

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from delayprop.inference import posterior
from delayprop.network import build_network, train_network
from delayprop.synth import default_scenario, generate

PHASES = ["gate_in_prev", "turn_around", "gate_out", "taxi_out",
          "airborne", "taxi_in"]
SCENARIOS = ["[15,30)", "[30,60)", "[60,inf)"]


def main() -> None:
    gt = default_scenario()
    data = generate(gt, 5000, seed=0)
    model = train_network(build_network(gt.network.spec), data.cases, 30.0)

    prior = posterior(model, {}, PHASES)
    results = {label: posterior(model, {"gate_in_dest": [label]}, PHASES)
               for label in SCENARIOS}

    print(f"{'phase':14s} {'prior':>8s} " +
          " ".join(f"{label:>10s}" for label in SCENARIOS) +
          "   (expected delay, minutes)")
    for phase in PHASES:
        row = [f"{prior.expected[phase]:8.2f}"]
        row += [f"{results[label].expected[phase]:10.2f}"
                for label in SCENARIOS]
        print(f"{phase:14s} " + " ".join(row))

    print("\nP(taxi_out in top bin):")
    hi = model.cardinality("taxi_out") - 1
    print(f"  prior: {prior.posteriors['taxi_out'][hi]:.4f}")
    for label in SCENARIOS:
        p = results[label].posteriors["taxi_out"][hi]
        print(f"  given gate_in_dest {label}: {p:.4f}")


if __name__ == "__main__":
    main()
