"""Randomized cross-checks of the closed-form routines against the dense oracle."""

from __future__ import annotations

import numpy as np

from . import oracle
from .errors import ConsistencyError, InputError
from .feedback import (
    MeasurementPartition,
    RecoveryStrategy,
    corrected_fidelity,
    optimize_recovery,
)
from .noise import DepolarizingParams, NoiseModel, convex_mixture
from .pauli import PauliString, join

FIDELITY_TOL = 1e-10


def random_table(rng: np.random.Generator, n: int, max_support: int = 12) -> NoiseModel:
    """Random Pauli distribution on a random subset of n-qubit strings."""
    size = int(rng.integers(1, min(4 ** n, max_support) + 1))
    codes = rng.choice(4 ** n, size=size, replace=False)
    weights = rng.dirichlet(np.ones(size))
    table = {}
    for code, w in zip(codes, weights):
        digits = tuple(int(code) // 4 ** (n - 1 - q) % 4 for q in range(n))
        table[PauliString(digits)] = float(w)
    # absorb the rounding residue so the table sums to 1 to machine precision
    first = next(iter(table))
    table[first] += 1.0 - sum(table.values())
    return NoiseModel(n, table)


def random_strategy(
    rng: np.random.Generator,
    partition: MeasurementPartition,
    support: int = 3,
    consistent: bool = True,
) -> RecoveryStrategy:
    """Random mixed strategy covering every outcome.

    With ``consistent=False`` corrections may also disagree with the outcome
    on the measured qubits.
    """
    k = len(partition.unmeasured)
    table = {}
    for a in partition.outcomes():
        row = {}
        for q in rng.dirichlet(np.ones(support)):
            if consistent or rng.random() < 0.5:
                head = a
            else:
                head = PauliString(tuple(int(x) for x in rng.integers(0, 4, size=len(a))))
            if k:
                rest = PauliString(tuple(int(x) for x in rng.integers(0, 4, size=k)))
                g = join(head, rest, partition.measured)
            else:
                g = head
            row[g] = row.get(g, 0.0) + float(q)
        total = sum(row.values())
        table[a] = {g: q / total for g, q in row.items()}
    return RecoveryStrategy(partition.n, partition.measured, table)


def _compare(model, partition, strategy, cap, label, report):
    closed = corrected_fidelity(model, partition, strategy).total
    kraus = oracle.corrected_kraus(oracle.selected_outputs(model, partition), strategy)
    overlap, trace = oracle.fidelity_forms(kraus, cap)
    for name, value in (("overlap", overlap), ("trace", trace)):
        diff = abs(value - closed)
        report["max_abs_diff"] = max(report["max_abs_diff"], diff)
        if diff > FIDELITY_TOL:
            report["failures"].append(f"{label}: {name} form {value!r} vs closed form {closed!r}")
    report["checks"] += 1


def _compare_optimizers(model, partition, cap, label, report):
    fast = optimize_recovery(model, partition)
    slow = oracle.brute_force_optimize(model, partition, cap)
    diff = abs(fast.total - slow.total)
    report["max_abs_diff"] = max(report["max_abs_diff"], diff)
    if diff > FIDELITY_TOL:
        report["failures"].append(f"{label}: optimizer {fast.total!r} vs brute force {slow.total!r}")
    elif not fast.strategy.same_as(slow.strategy):
        report["failures"].append(f"{label}: optimizer and brute force chose different strategies")
    report["checks"] += 1


def run_verification(seed: int, trials: int, n: int, cap: int = oracle.DEFAULT_DENSE_CAP) -> dict:
    """Compare closed-form fidelities and optimizers with the dense oracle.

    Each trial draws a correlated depolarizing model and a random noise table,
    evaluates random strategies (outcome-consistent and general) both ways, and
    compares optimize_recovery with brute_force_optimize, with one qubit and
    with every qubit measured. Returns ``{"max_abs_diff", "failures", "checks"}``.
    """
    if trials < 0:
        raise InputError("trials must be nonnegative")
    oracle._guard(n, cap)
    rng = np.random.default_rng(seed)
    report = {"max_abs_diff": 0.0, "failures": [], "checks": 0}
    partitions = [MeasurementPartition(n)]
    if n > 1:
        partitions.append(MeasurementPartition.full(n))
    for t in range(trials):
        p, mu = (float(x) for x in rng.random(2))
        models = {
            f"mixture(p={p:.4f}, mu={mu:.4f})": convex_mixture(DepolarizingParams(p, mu, n)),
            "table": random_table(rng, n),
        }
        for name, model in models.items():
            for part in partitions:
                label = f"trial {t}, n={n}, {name}, measured={part.measured}"
                try:
                    for consistent in (True, False):
                        strategy = random_strategy(rng, part, consistent=consistent)
                        _compare(model, part, strategy, cap, label, report)
                    _compare_optimizers(model, part, cap, label, report)
                except ConsistencyError as exc:
                    report["failures"].append(f"{label}: {exc}")
    return report
