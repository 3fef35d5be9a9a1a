"""Dense-matrix cross-check of the closed-form fidelity results.

Everything here works with explicit state vectors and matrices on the
system (x) reference space: Kraus operators are applied to a maximally
entangled state, and the entanglement fidelity is computed both as a state
overlap and from operator traces. The two must agree.

Pauli operators act on vectors through a permutation and phase derived from
bit rules, independent of the matrix rendering used for traces.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import ConsistencyError, InputError, ResourceError
from .feedback import (
    TIE_TOL,
    FidelityReport,
    MeasurementPartition,
    RecoveryStrategy,
    SelectedOutput,
    group_by_outcome,
)
from .noise import NoiseModel
from .pauli import PhasedPauli, all_strings, join, multiply, to_dense

DEFAULT_DENSE_CAP = 4
# Structured Pauli action keeps the state-vector route usable up to here.
HARD_DENSE_CAP = 6

COMPLETENESS_TOL = 1e-10
AGREEMENT_TOL = 1e-10


def _guard(n: int, cap: int) -> None:
    if cap > HARD_DENSE_CAP:
        raise ResourceError(f"dense cap {cap} exceeds the hard limit of {HARD_DENSE_CAP} qubits")
    if n > cap:
        raise ResourceError(f"{n} qubits exceeds the dense oracle cap of {cap}")


@dataclass(frozen=True)
class KrausSet:
    """Kraus operators ``amplitude * pauli`` on n qubits."""

    n: int
    operators: tuple[tuple[float, PhasedPauli], ...]

    def __post_init__(self):
        ops = tuple((float(a), p) for a, p in self.operators)
        for a, p in ops:
            if a < 0:
                raise InputError(f"negative amplitude {a}")
            if p.n != self.n:
                raise InputError(f"operator {p} is not on {self.n} qubits")
        object.__setattr__(self, "operators", ops)

    @property
    def weight(self) -> float:
        """Sum of squared amplitudes; 1 for a trace-preserving channel."""
        return math.fsum(a * a for a, _ in self.operators)

    def is_complete(self, tol: float = COMPLETENESS_TOL) -> bool:
        return abs(self.weight - 1.0) <= tol

    @classmethod
    def from_model(cls, model: NoiseModel) -> "KrausSet":
        return cls(model.n, tuple((math.sqrt(w), PhasedPauli(s)) for s, w in model.weights.items()))


@dataclass(frozen=True)
class DenseState:
    """Density matrix on system (x) reference, system index most significant."""

    matrix: np.ndarray
    n: int

    def check(self, tol: float = 1e-12, psd_floor: float = -1e-10) -> None:
        m = self.matrix
        if np.max(np.abs(m - m.conj().T)) > tol:
            raise ConsistencyError("state is not Hermitian")
        if abs(np.trace(m) - 1.0) > tol:
            raise ConsistencyError(f"state trace is {np.trace(m)}")
        if np.linalg.eigvalsh(m).min() < psd_floor:
            raise ConsistencyError("state has a negative eigenvalue")

    def reduced_system(self) -> np.ndarray:
        d = 2 ** self.n
        return np.einsum("ikjk->ij", self.matrix.reshape(d, d, d, d))

    def reduced_reference(self) -> np.ndarray:
        d = 2 ** self.n
        return np.einsum("kikj->ij", self.matrix.reshape(d, d, d, d))


def _max_entangled_vector(n: int) -> np.ndarray:
    d = 2 ** n
    psi = np.zeros(d * d, dtype=complex)
    psi[np.arange(d) * d + np.arange(d)] = 1.0 / math.sqrt(d)
    return psi


def max_entangled(n: int, cap: int = DEFAULT_DENSE_CAP) -> DenseState:
    """|Psi><Psi| with |Psi> = sum_i |i>|i> / sqrt(2**n)."""
    _guard(n, cap)
    psi = _max_entangled_vector(n)
    return DenseState(np.outer(psi, psi.conj()), n)


def pauli_action(p: PhasedPauli) -> tuple[np.ndarray, np.ndarray]:
    """Permutation and phases with ``P|j> = phase[j] |perm[j]>`` in the computational basis."""
    n = p.n
    basis = np.arange(2 ** n)
    perm = basis.copy()
    phase = np.full(2 ** n, 1j ** p.phase_exponent, dtype=complex)
    for q, f in enumerate(p.pauli.factors):
        bit = (basis >> (n - 1 - q)) & 1
        sign = 1 - 2 * bit
        if f in (1, 2):
            perm ^= 1 << (n - 1 - q)
        if f == 2:
            phase *= 1j * sign
        elif f == 3:
            phase *= sign
    return perm, phase


def _apply_to_system(p: PhasedPauli, vec: np.ndarray) -> np.ndarray:
    """(P (x) I) applied to a vector on system (x) reference."""
    d = 2 ** p.n
    perm, phase = pauli_action(p)
    block = vec.reshape(d, d)
    out = np.empty_like(block)
    out[perm] = phase[:, None] * block
    return out.reshape(-1)


def apply_channel(kraus: KrausSet, state: DenseState) -> DenseState:
    """(Phi (x) id)(rho) for a Pauli Kraus set."""
    if state.n != kraus.n:
        raise InputError("state and channel act on different qubit counts")
    d = 2 ** kraus.n
    out = np.zeros_like(state.matrix)
    rho = state.matrix.reshape(d, d, d, d)
    for a, p in kraus.operators:
        perm, phase = pauli_action(p)
        moved = np.empty_like(rho)
        moved[np.ix_(perm, np.arange(d), perm, np.arange(d))] = (
            phase[:, None, None, None] * phase.conj()[None, None, :, None] * rho
        )
        out += (a * a) * moved.reshape(d * d, d * d)
    return DenseState(out, state.n)


def _fidelity_forms(kraus: KrausSet) -> tuple[float, float]:
    """(state overlap, trace formula) for the possibly sub-normalized map ``kraus``."""
    n = kraus.n
    d = 2 ** n
    psi = _max_entangled_vector(n)
    overlap = trace_sum = 0.0
    for a, p in kraus.operators:
        # <Psi|rho_out|Psi> summed term by term, rho_out = sum_k v_k v_k^dagger
        v = a * _apply_to_system(p, psi)
        overlap += abs(np.vdot(psi, v)) ** 2
        trace_sum += abs(a * np.trace(to_dense(p, max_qubits=HARD_DENSE_CAP))) ** 2
    return overlap, trace_sum / d**2


def fidelity_forms(kraus: KrausSet, cap: int = DEFAULT_DENSE_CAP) -> tuple[float, float]:
    """Both evaluations of the entanglement fidelity, without the agreement check."""
    _guard(kraus.n, cap)
    return _fidelity_forms(kraus)


def _agreed(kraus: KrausSet) -> float:
    overlap, trace = _fidelity_forms(kraus)
    if abs(overlap - trace) > AGREEMENT_TOL:
        raise ConsistencyError(f"overlap form {overlap!r} and trace form {trace!r} disagree")
    return trace


def entanglement_fidelity_dense(kraus: KrausSet, cap: int = DEFAULT_DENSE_CAP) -> float:
    """Entanglement fidelity of a trace-preserving Pauli channel on a maximally entangled state.

    Computes <Psi|(Phi (x) id)(|Psi><Psi|)|Psi> and (1/d**2) sum_k |tr A_k|**2;
    raises ConsistencyError if they differ by more than 1e-10 and returns the
    trace-form value.
    """
    _guard(kraus.n, cap)
    if not kraus.is_complete():
        raise InputError(f"Kraus weights sum to {kraus.weight!r}, not 1")
    return _agreed(kraus)


def branch_fidelity_dense(kraus: KrausSet, cap: int = DEFAULT_DENSE_CAP) -> float:
    """Same as entanglement_fidelity_dense for a single sub-normalized branch."""
    _guard(kraus.n, cap)
    if kraus.weight > 1.0 + COMPLETENESS_TOL:
        raise InputError(f"branch weight {kraus.weight!r} exceeds 1")
    return _agreed(kraus)


def corrected_kraus(selected: Iterable[SelectedOutput], strategy: RecoveryStrategy) -> KrausSet:
    """Kraus operators of correction-after-noise.

    One operator ``sqrt(q * w) * (g @ e)`` per error ``e`` (weight ``w``) in
    each branch and correction ``g`` (probability ``q``) for that branch.
    """
    ops = []
    for branch in selected:
        if branch.probability == 0:
            continue
        row = strategy.table.get(branch.outcome)
        if row is None:
            raise InputError(f"strategy has no entry for outcome {branch.outcome}")
        for e, w in branch.components.items():
            for g, q in row.items():
                ops.append((math.sqrt(w * q), multiply(g, e)))
    return KrausSet(strategy.n, tuple(ops))


def selected_outputs(model: NoiseModel, partition: MeasurementPartition) -> list[SelectedOutput]:
    return [SelectedOutput(a, comps) for a, comps in sorted(group_by_outcome(model, partition).items())]


@dataclass(frozen=True)
class Correctability:
    passed: bool
    constant: float | None


def check_correctable(
    kraus: KrausSet | Sequence[np.ndarray], tol: float = 1e-10, cap: int = HARD_DENSE_CAP
) -> list[Correctability]:
    """Per operator, whether t^dagger t is a multiple of the identity (and the multiple)."""
    if isinstance(kraus, KrausSet):
        _guard(kraus.n, cap)
        mats = [a * to_dense(p, max_qubits=cap) for a, p in kraus.operators]
    else:
        mats = [np.asarray(m, dtype=complex) for m in kraus]
    verdicts = []
    for t in mats:
        tt = t.conj().T @ t
        c = np.trace(tt).real / tt.shape[0]
        ok = np.max(np.abs(tt - c * np.eye(tt.shape[0]))) <= tol
        verdicts.append(Correctability(bool(ok), float(c) if ok else None))
    return verdicts


def brute_force_optimize(
    model: NoiseModel, partition: MeasurementPartition, cap: int = 3
) -> FidelityReport:
    """Try every outcome-consistent correction for every outcome and keep the best, using dense fidelities.

    The objective separates by outcome, so this costs 4**(unmeasured qubits)
    dense evaluations per outcome rather than a product over outcomes.
    """
    _guard(model.n, cap)
    groups = group_by_outcome(model, partition)
    outcomes = set(groups)
    if len(partition.measured) <= 2:
        outcomes.update(partition.outcomes())
    k = len(partition.unmeasured)
    choice, per_outcome = {}, {}
    for a in sorted(outcomes):
        branch = [SelectedOutput(a, groups.get(a, {}))]
        scores = []
        for rest in (all_strings(k) if k else [None]):
            g = a if rest is None else join(a, rest, partition.measured)
            trial = RecoveryStrategy.deterministic({a: g}, partition.n, partition.measured)
            ops = corrected_kraus(branch, trial)
            scores.append((g, branch_fidelity_dense(ops, cap) if ops.operators else 0.0))
        top = max(f for _, f in scores)
        g, f = min((g, f) for g, f in scores if f >= top - TIE_TOL)
        choice[a] = g
        per_outcome[str(a)] = f
    strategy = RecoveryStrategy.deterministic(choice, partition.n, partition.measured)
    return FidelityReport(total=math.fsum(per_outcome.values()), per_outcome=per_outcome, strategy=strategy)
