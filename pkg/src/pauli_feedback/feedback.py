"""Feedback correction after measuring part of the environment.

When the environment of some qubits is measured, each outcome selects a
branch of the Pauli channel. A recovery strategy assigns, per outcome, a
probability distribution over Pauli corrections on the whole register. For
Pauli noise and Pauli corrections the entanglement fidelity reduces to

    F = sum_alpha sum_gamma q[alpha, gamma] * w(gamma) * [gamma restricted to measured == alpha]

where ``w`` is the noise weight: a correction only helps when it undoes the
error exactly. This module evaluates that sum, maximizes it, and provides the
closed-form region analysis for the correlated depolarizing family.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Iterable, Iterator, Mapping, Sequence

from .errors import InputError, ResourceError
from .noise import DEFAULT_ENUM_CAP, DepolarizingParams, NoiseModel, depolarizing_weights
from .pauli import LETTERS, PauliString, all_strings, as_pauli, join

# Values closer than this are considered tied when picking an optimal correction.
TIE_TOL = 1e-12
# Distance from a region threshold that counts as lying on the boundary.
BOUNDARY_TOL = 1e-12
_STRATEGY_TOL = 1e-12


@dataclass(frozen=True)
class MeasurementPartition:
    """Which qubits (0-based) have their environment measured."""

    n: int
    measured: tuple[int, ...] = (0,)

    def __post_init__(self):
        measured = tuple(int(q) for q in self.measured)
        if self.n < 1:
            raise InputError("n must be >= 1")
        if not measured:
            raise InputError("at least one qubit must be measured")
        if len(set(measured)) != len(measured):
            raise InputError(f"repeated qubit in {measured}")
        if any(q < 0 or q >= self.n for q in measured):
            raise InputError(f"measured qubits {measured} out of range for n={self.n}")
        object.__setattr__(self, "measured", measured)

    @classmethod
    def full(cls, n: int) -> "MeasurementPartition":
        return cls(n, tuple(range(n)))

    @property
    def unmeasured(self) -> tuple[int, ...]:
        return tuple(q for q in range(self.n) if q not in self.measured)

    @property
    def is_full(self) -> bool:
        return not self.unmeasured

    def outcomes(self) -> Iterator[PauliString]:
        return all_strings(len(self.measured))

    def outcome_of(self, s: PauliString) -> PauliString:
        return s.restrict(self.measured)

    def check_outcome(self, outcome) -> PauliString:
        outcome = as_pauli(outcome)
        if outcome.n != len(self.measured):
            raise InputError(
                f"outcome {outcome} has {outcome.n} qubits, {len(self.measured)} are measured"
            )
        return outcome


@dataclass(frozen=True)
class SelectedOutput:
    """Sub-normalized branch of the channel consistent with one outcome."""

    outcome: PauliString
    components: Mapping[PauliString, float]

    @property
    def probability(self) -> float:
        return math.fsum(self.components.values())


def _check_model(model: NoiseModel, partition: MeasurementPartition) -> None:
    if model.n != partition.n:
        raise InputError(f"model has {model.n} qubits, partition expects {partition.n}")


def select(model: NoiseModel, partition: MeasurementPartition, outcome) -> SelectedOutput:
    """Model entries whose measured factors equal ``outcome``, weights unchanged."""
    _check_model(model, partition)
    outcome = partition.check_outcome(outcome)
    comps = {s: w for s, w in model.weights.items() if partition.outcome_of(s) == outcome}
    return SelectedOutput(outcome, MappingProxyType(comps))


def outcome_probability(model: NoiseModel, partition: MeasurementPartition, outcome) -> float:
    return select(model, partition, outcome).probability


def group_by_outcome(
    model: NoiseModel, partition: MeasurementPartition
) -> dict[PauliString, dict[PauliString, float]]:
    """All nonempty selected outputs in one pass over the support."""
    _check_model(model, partition)
    groups: dict[PauliString, dict[PauliString, float]] = {}
    for s, w in model.weights.items():
        groups.setdefault(partition.outcome_of(s), {})[s] = w
    return groups


@dataclass(frozen=True)
class RecoveryStrategy:
    """Per-outcome distributions over correction strings.

    ``table[outcome][correction] = q``. Each distribution must sum to 1.
    Outcomes that never occur may be left out.
    """

    n: int
    measured: tuple[int, ...]
    table: Mapping[PauliString, Mapping[PauliString, float]]

    def __post_init__(self):
        measured = tuple(self.measured)
        clean = {}
        for outcome, dist in self.table.items():
            outcome = as_pauli(outcome)
            if outcome.n != len(measured):
                raise InputError(f"outcome {outcome} does not match {len(measured)} measured qubits")
            if outcome in clean:
                raise InputError(f"duplicate outcome {outcome}")
            row = {}
            for corr, q in dist.items():
                corr = as_pauli(corr)
                if corr.n != self.n:
                    raise InputError(f"correction {corr} is not an {self.n}-qubit string")
                q = float(q)
                if q < 0 or math.isnan(q):
                    raise InputError(f"negative probability {q} for {corr} after {outcome}")
                if q > 0:
                    row[corr] = row.get(corr, 0.0) + q
            total = math.fsum(row.values())
            if abs(total - 1.0) > _STRATEGY_TOL:
                raise InputError(f"probabilities for outcome {outcome} sum to {total!r}")
            clean[outcome] = MappingProxyType(dict(sorted(row.items())))
        object.__setattr__(self, "measured", measured)
        object.__setattr__(self, "table", MappingProxyType(dict(sorted(clean.items()))))

    @classmethod
    def deterministic(
        cls, choice: Mapping, n: int, measured: Sequence[int] = (0,)
    ) -> "RecoveryStrategy":
        """One correction per outcome, applied with certainty."""
        return cls(n, tuple(measured), {as_pauli(a): {as_pauli(g): 1.0} for a, g in choice.items()})

    def choice(self, outcome) -> PauliString | None:
        """The correction for ``outcome`` if it is deterministic, else None."""
        row = self.table.get(as_pauli(outcome))
        if row is None or len(row) != 1:
            return None
        return next(iter(row))

    def mix(self, other: "RecoveryStrategy", weight: float) -> "RecoveryStrategy":
        """``(1 - weight) * self + weight * other`` outcome by outcome."""
        if (self.n, self.measured) != (other.n, other.measured):
            raise InputError("strategies act on different partitions")
        if set(self.table) != set(other.table):
            raise InputError("strategies cover different outcomes")
        table = {}
        for a, row in self.table.items():
            merged = {g: (1.0 - weight) * q for g, q in row.items()}
            for g, q in other.table[a].items():
                merged[g] = merged.get(g, 0.0) + weight * q
            table[a] = merged
        return RecoveryStrategy(self.n, self.measured, table)

    def inconsistent_corrections(self) -> list[tuple[PauliString, PauliString]]:
        """(outcome, correction) pairs whose measured factors differ from the outcome."""
        return [
            (a, g)
            for a, row in self.table.items()
            for g in row
            if g.restrict(self.measured) != a
        ]

    def same_as(self, other: "RecoveryStrategy", tol: float = 1e-12) -> bool:
        if (self.n, self.measured) != (other.n, other.measured) or set(self.table) != set(other.table):
            return False
        for a, row in self.table.items():
            o = other.table[a]
            for g in set(row) | set(o):
                if abs(row.get(g, 0.0) - o.get(g, 0.0)) > tol:
                    return False
        return True

    def to_json(self) -> dict:
        return {
            "outcomes": {
                str(a): {str(g): q for g, q in row.items()} for a, row in self.table.items()
            }
        }

    @classmethod
    def from_json(cls, data: Mapping | str, measured: Sequence[int] = (0,)) -> "RecoveryStrategy":
        if isinstance(data, str):
            data = json.loads(data)
        try:
            outcomes = data["outcomes"]
            corrections = [g for row in outcomes.values() for g in row]
        except (KeyError, TypeError, AttributeError) as exc:
            raise InputError(f"malformed strategy: {exc}") from None
        if not corrections:
            raise InputError("strategy has no corrections")
        n = as_pauli(corrections[0]).n
        return cls(n, tuple(measured), outcomes)


def region_strategy(region: str, n: int) -> RecoveryStrategy:
    """Deterministic strategy of region A, B or C with qubit 0 measured.

    A: undo the measured error only. B: apply the measured Pauli to every
    qubit. C: like B for a nontrivial outcome; after the trivial outcome
    assume every other qubit erred and apply X to each.
    """
    region = region.upper()
    if region not in ("A", "B", "C"):
        raise InputError(f"unknown region {region!r}")
    choice = {}
    for a in range(4):
        rest_n = n - 1
        if region == "A" or (a == 0 and region == "B"):
            rest = (0,) * rest_n
        elif a == 0:
            rest = (1,) * rest_n
        else:
            rest = (a,) * rest_n
        choice[PauliString((a,))] = PauliString((a,) + rest)
    return RecoveryStrategy.deterministic(choice, n, (0,))


@dataclass(frozen=True)
class RegionLabel:
    """Region A, B, C, or a boundary between regions (``edge`` like "AB")."""

    kind: str
    edge: str | None = None

    @property
    def is_boundary(self) -> bool:
        return self.kind == "boundary"

    def __str__(self) -> str:
        return f"boundary:{self.edge}" if self.is_boundary else self.kind


@dataclass(frozen=True)
class FidelityReport:
    total: float
    per_outcome: Mapping[str, float]
    strategy: RecoveryStrategy | None = None
    region: RegionLabel | None = None
    thresholds: tuple[float | None, float | None] | None = None
    flags: tuple[str, ...] = field(default_factory=tuple)

    def to_json(self) -> dict:
        out = {
            "total": self.total,
            "per_outcome": dict(self.per_outcome),
            "region": None if self.region is None else str(self.region),
        }
        if self.thresholds is not None:
            out["thresholds"] = {"mu_AB": self.thresholds[0], "mu_BC": self.thresholds[1]}
        if self.strategy is not None:
            out["strategy"] = self.strategy.to_json()
        if self.flags:
            out["flags"] = list(self.flags)
        return out


def _check_strategy(strategy: RecoveryStrategy, partition: MeasurementPartition) -> None:
    if strategy.n != partition.n or strategy.measured != partition.measured:
        raise InputError(
            f"strategy acts on n={strategy.n}, measured={strategy.measured}; "
            f"partition is n={partition.n}, measured={partition.measured}"
        )


def corrected_fidelity(
    model: NoiseModel, partition: MeasurementPartition, strategy: RecoveryStrategy
) -> FidelityReport:
    """Entanglement fidelity of the noise followed by the feedback correction."""
    _check_strategy(strategy, partition)
    groups = group_by_outcome(model, partition)
    missing = [str(a) for a in groups if a not in strategy.table]
    if missing:
        raise InputError(f"strategy has no entry for outcome(s) {', '.join(missing)}")
    per_outcome = {}
    for a, row in strategy.table.items():
        # correction g cancels error g only; the outcome must agree with g's measured part
        comps = groups.get(a, {})
        per_outcome[str(a)] = math.fsum(q * comps.get(g, 0.0) for g, q in row.items())
    flags = tuple(
        f"correction {g} after outcome {a} does not undo the measured error"
        for a, g in strategy.inconsistent_corrections()
    )
    return FidelityReport(
        total=math.fsum(per_outcome.values()),
        per_outcome=per_outcome,
        strategy=strategy,
        flags=flags,
    )


def _pick(candidates: Iterable[tuple[PauliString, float]]) -> tuple[PauliString, float]:
    """Largest value; lexicographically smallest string among near-ties."""
    candidates = list(candidates)
    best = max(v for _, v in candidates)
    return min((s, v) for s, v in candidates if v >= best - TIE_TOL)


def _default_correction(outcome: PauliString, partition: MeasurementPartition) -> PauliString:
    if partition.is_full:
        return outcome
    return join(outcome, PauliString.identity(len(partition.unmeasured)), partition.measured)


def optimize_recovery(
    model: NoiseModel, partition: MeasurementPartition, cap: int = DEFAULT_ENUM_CAP
) -> FidelityReport:
    """Best recovery for an explicit noise table.

    The fidelity is linear on each outcome's simplex of correction
    probabilities, so a deterministic choice is optimal: after outcome
    ``alpha`` apply the most probable error compatible with it.
    """
    _check_model(model, partition)
    if len(model.weights) > 4 ** cap:
        raise ResourceError(f"noise support of {len(model.weights)} strings exceeds 4**{cap}")
    groups = group_by_outcome(model, partition)
    outcomes = set(groups)
    if len(partition.measured) <= 2:
        outcomes.update(partition.outcomes())
    choice, per_outcome = {}, {}
    for a in sorted(outcomes):
        comps = groups.get(a, {})
        candidates = list(comps.items())
        if not candidates or max(comps.values()) <= TIE_TOL:
            candidates.append((_default_correction(a, partition), 0.0))
        g, value = _pick(candidates)
        choice[a] = g
        per_outcome[str(a)] = value
    strategy = RecoveryStrategy.deterministic(choice, partition.n, partition.measured)
    return FidelityReport(total=math.fsum(per_outcome.values()), per_outcome=per_outcome, strategy=strategy)


def optimize_mixture(params: DepolarizingParams) -> FidelityReport:
    """Best recovery for the correlated depolarizing family, without expanding 4**n strings.

    Qubit 0 is measured. For a fixed outcome the weight of a correction
    depends only on how many unmeasured factors are non-identity, plus a
    bonus for the fully correlated string, so one representative per weight
    class (identity factors first, then X) plus that string covers every
    vertex.
    """
    p, mu, n = params.p, params.mu, params.n
    single = depolarizing_weights(p)
    choice, per_outcome = {}, {}
    for a in range(4):
        candidates = []
        for k in range(n):
            rest = (0,) * (n - 1 - k) + (1,) * k
            product = single[0] ** (n - 1 - k) * single[1] ** k
            candidates.append(((a,) + rest, single[a] * ((1.0 - mu) * product + mu * (rest == (a,) * (n - 1)))))
        if a:
            # the fully correlated string is its own vertex: same product as k = n-1, plus mu
            product = single[a] ** (n - 1)
            candidates.append(((a,) * n, single[a] * ((1.0 - mu) * product + mu)))
        best = max(v for _, v in candidates)
        factors, value = min(c for c in candidates if c[1] >= best - TIE_TOL)
        choice[PauliString((a,))] = PauliString(factors)
        per_outcome[LETTERS[a]] = value
    strategy = RecoveryStrategy.deterministic(choice, n, (0,))
    return FidelityReport(total=math.fsum(per_outcome.values()), per_outcome=per_outcome, strategy=strategy)


def threshold_gap(p: float, n: int) -> float:
    """(1-p)**(n-1) - (p/3)**(n-1): positive below p = 3/4, negative above."""
    return (1.0 - p) ** (n - 1) - (p / 3.0) ** (n - 1)


def thresholds(p: float, n: int) -> tuple[float | None, float | None]:
    """Correlation thresholds (mu_AB, mu_BC); None where a threshold does not apply."""
    x = threshold_gap(p, n)
    mu_ab = x / (x + 1.0) if x >= 0 else None
    mu_bc = (0.0 - x) / (1.0 - x) if x <= 0 else None
    return mu_ab, mu_bc


def classify_region(params: DepolarizingParams) -> tuple[RegionLabel, float | None, float | None]:
    """Which recovery regime is optimal at (p, mu) for n qubits with qubit 0 measured."""
    if params.n < 2:
        raise InputError("region analysis needs n >= 2; with one qubit every error is observed")
    mu = params.mu
    x = threshold_gap(params.p, params.n)
    mu_ab, mu_bc = thresholds(params.p, params.n)
    if x > 0:
        t, low, edge = mu_ab, "A", "AB"
    elif x < 0:
        t, low, edge = mu_bc, "C", "BC"
    else:
        t, low, edge = 0.0, "B", "ABC"
    if abs(mu - t) <= BOUNDARY_TOL:
        label = RegionLabel("boundary", edge)
    elif mu < t:
        label = RegionLabel(low)
    else:
        label = RegionLabel("B")
    return label, mu_ab, mu_bc


def theoretical_fidelity(params: DepolarizingParams) -> FidelityReport:
    """Closed-form optimal fidelity; boundaries use the region-B expressions."""
    label, mu_ab, mu_bc = classify_region(params)
    p, mu, n = params.p, params.mu, params.n
    kind = "B" if label.is_boundary else label.kind
    stay = (1.0 - p) ** (n - 1)
    flip = (p / 3.0) ** (n - 1)
    if kind == "A":
        total = (1.0 - mu) * stay + mu * (1.0 - p)
        f0 = (1.0 - p) * ((1.0 - mu) * stay + mu)
        fi = (p / 3.0) * (1.0 - mu) * stay
    elif kind == "B":
        total = (1.0 - mu) * ((1.0 - p) ** n + 3.0 * (p / 3.0) ** n) + mu
        f0 = (1.0 - p) * ((1.0 - mu) * stay + mu)
        fi = (p / 3.0) * ((1.0 - mu) * flip + mu)
    else:
        total = (1.0 - mu) * flip + mu * p
        f0 = (1.0 - mu) * (1.0 - p) * flip
        fi = (p / 3.0) * ((1.0 - mu) * flip + mu)
    per_outcome = {"I": f0, "X": fi, "Y": fi, "Z": fi}
    return FidelityReport(
        total=total,
        per_outcome=per_outcome,
        strategy=region_strategy(kind, n),
        region=label,
        thresholds=(mu_ab, mu_bc),
    )


def asymptote(params: DepolarizingParams) -> float:
    """Large-n limit of the optimal fidelity formula for the region at ``params``.

    Region B tends to mu; region A to mu*(1-p); region C to mu*p.
    """
    label, _, _ = classify_region(params)
    kind = "B" if label.is_boundary else label.kind
    if kind == "A":
        return params.mu * (1.0 - params.p)
    if kind == "C":
        return params.mu * params.p
    return params.mu
