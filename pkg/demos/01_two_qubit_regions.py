#!/usr/bin/env python3
"""
Two qubits, environment of the first one measured: which correction is best?
"""

import numpy as np

from pauli_feedback import (
    DepolarizingParams,
    MeasurementPartition,
    classify_region,
    convex_mixture,
    corrected_fidelity,
    optimize_recovery,
    region_strategy,
)


def main():
    part = MeasurementPartition(2)

    print("thresholds as the error probability grows")
    for p in (0.1, 0.3, 0.5, 0.75, 0.9):
        label, mu_ab, mu_bc = classify_region(DepolarizingParams(p, 0.5, 2))
        print(f"  p={p:4}: mu_AB={mu_ab}, mu_BC={mu_bc}, region at mu=0.5 -> {label}")
    print()

    print("the three fixed strategies against the optimum at p=0.4")
    for mu in np.linspace(0, 1, 6):
        model = convex_mixture(DepolarizingParams(0.4, mu, 2))
        values = {r: corrected_fidelity(model, part, region_strategy(r, 2)).total for r in "ABC"}
        best = optimize_recovery(model, part)
        row = "  ".join(f"{r}={v:.4f}" for r, v in values.items())
        print(f"  mu={mu:.1f}: {row}  optimal={best.total:.4f}")
    print()

    print("optimal corrections per outcome at p=0.9, mu=0.05")
    best = optimize_recovery(convex_mixture(DepolarizingParams(0.9, 0.05, 2)), part)
    for outcome, row in best.strategy.table.items():
        print(f"  outcome {outcome}: apply {next(iter(row))}")


if __name__ == "__main__":
    main()
