#!/usr/bin/env python3
"""
Optimal fidelity as more unmeasured qubits share the correlated noise
"""

from pauli_feedback import DepolarizingParams, asymptote, optimize_mixture, theoretical_fidelity


def main():
    p = 0.4
    for mu in (0.9, 0.7, 0.5):
        print(f"mu = {mu}")
        for n in (2, 3, 4, 6, 8, 12, 20):
            params = DepolarizingParams(p, mu, n)
            best = optimize_mixture(params)
            theory = theoretical_fidelity(params)
            print(f"  n={n:2d}: F={best.total:.6f} (closed form {theory.total:.6f}, region {theory.region})")
        print(f"  large-n limit: {asymptote(DepolarizingParams(p, mu, 20))}\n")

    print("regions shrink with n (p=0.2):")
    for n in (2, 3, 4, 5):
        print(f"  n={n}: mu_AB={theoretical_fidelity(DepolarizingParams(0.2, 0.5, n)).thresholds[0]:.4f}")


if __name__ == "__main__":
    main()
