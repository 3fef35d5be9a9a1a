#!/usr/bin/env python3
"""
Checking the closed-form fidelity with explicit density matrices
"""

import numpy as np

from pauli_feedback import DepolarizingParams, MeasurementPartition, convex_mixture, corrected_fidelity
from pauli_feedback import oracle, region_strategy
from pauli_feedback.verification import run_verification


def main():
    params = DepolarizingParams(0.4, 0.9, 2)
    model = convex_mixture(params)
    part = MeasurementPartition(2)
    strategy = region_strategy("B", 2)

    kraus = oracle.corrected_kraus(oracle.selected_outputs(model, part), strategy)
    overlap, trace = oracle.fidelity_forms(kraus)
    print(f"{len(kraus.operators)} Kraus operators")
    print(f"state overlap : {overlap:.15f}")
    print(f"trace formula : {trace:.15f}")
    print(f"closed form   : {corrected_fidelity(model, part, strategy).total:.15f}\n")

    state = oracle.apply_channel(kraus, oracle.max_entangled(2))
    state.check()
    print("output state eigenvalues:", np.round(np.linalg.eigvalsh(state.matrix)[-4:], 6))

    best = oracle.brute_force_optimize(model, part)
    print(f"brute-force optimum: {best.total:.6f}, corrections", best.strategy.to_json()["outcomes"])

    report = run_verification(seed=1, trials=10, n=3)
    print(f"\nrandom cross-check at n=3: {report['checks']} checks, "
          f"max diff {report['max_abs_diff']:.1e}, failures {len(report['failures'])}")


if __name__ == "__main__":
    main()
