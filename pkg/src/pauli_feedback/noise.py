"""Pauli noise models as sparse probability tables over n-qubit strings."""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import InitVar, dataclass, field
from types import MappingProxyType
from typing import Iterable, Mapping

from .errors import InputError, ResourceError
from .pauli import PauliString, as_pauli

# Product expansion of 4**n strings is refused above this many qubits.
DEFAULT_ENUM_CAP = 8

_MODEL_TOL = 1e-12
_TABLE_TOL = 1e-9


def _check_probability(name: str, value: float) -> float:
    value = float(value)
    if not (0.0 <= value <= 1.0) or math.isnan(value):
        raise InputError(f"{name} must lie in [0, 1], got {value}")
    return value


@dataclass(frozen=True)
class DepolarizingParams:
    """Error probability ``p``, correlation ``mu`` and qubit count ``n``."""

    p: float
    mu: float
    n: int

    def __post_init__(self):
        object.__setattr__(self, "p", _check_probability("p", self.p))
        object.__setattr__(self, "mu", _check_probability("mu", self.mu))
        if int(self.n) != self.n or self.n < 1:
            raise InputError(f"n must be a positive integer, got {self.n}")
        object.__setattr__(self, "n", int(self.n))


def depolarizing_weights(p: float) -> tuple[float, float, float, float]:
    """Single-qubit weights (1-p, p/3, p/3, p/3)."""
    p = _check_probability("p", p)
    return (1.0 - p, p / 3.0, p / 3.0, p / 3.0)


@dataclass(frozen=True)
class NoiseModel:
    """Probability distribution over n-qubit Pauli errors.

    Only nonzero weights are stored. Construction validates nonnegativity,
    key lengths and normalization (to ``tol``, default 1e-12); nothing is
    renormalized.
    """

    n: int
    weights: Mapping[PauliString, float] = field(repr=False)
    tol: InitVar[float] = _MODEL_TOL

    def __post_init__(self, tol):
        clean = {}
        for key, w in self.weights.items():
            key = as_pauli(key)
            if key.n != self.n:
                raise InputError(f"{key} has {key.n} qubits, model has {self.n}")
            w = float(w)
            if w < 0 or math.isnan(w):
                raise InputError(f"negative weight {w} for {key}")
            if w > 0:
                clean[key] = w
        total = math.fsum(clean.values())
        if abs(total - 1.0) > tol:
            raise InputError(f"weights sum to {total!r}, expected 1")
        object.__setattr__(self, "weights", MappingProxyType(dict(sorted(clean.items()))))

    def weight(self, s: PauliString | str) -> float:
        return self.weights.get(as_pauli(s), 0.0)

    @property
    def support(self) -> list[PauliString]:
        return list(self.weights)

    def marginal(self, qubits: Iterable[int]) -> "NoiseModel":
        """Distribution of the restriction to ``qubits`` (in the given order)."""
        qubits = list(qubits)
        out: dict[PauliString, float] = {}
        for s, w in self.weights.items():
            r = s.restrict(qubits)
            out[r] = out.get(r, 0.0) + w
        return NoiseModel(len(qubits), out, tol=_TABLE_TOL)

    def to_json(self) -> dict:
        return {"n": self.n, "weights": {str(s): w for s, w in self.weights.items()}}

    @classmethod
    def from_json(cls, data: Mapping | str) -> "NoiseModel":
        if isinstance(data, str):
            data = json.loads(data)
        try:
            n = int(data["n"])
            entries = list(data["weights"].items())
        except (KeyError, TypeError, AttributeError) as exc:
            raise InputError(f"malformed noise table: {exc}") from None
        return from_table(n, entries)


def _enum_guard(n: int, cap: int) -> None:
    if n > cap:
        raise ResourceError(f"expanding 4**{n} Pauli strings exceeds the enumeration cap (n <= {cap})")


def single_qubit_depolarizing(p: float) -> NoiseModel:
    return NoiseModel(1, {PauliString((a,)): w for a, w in enumerate(depolarizing_weights(p))})


def uncorrelated(p: float, n: int, cap: int = DEFAULT_ENUM_CAP) -> NoiseModel:
    """Independent depolarizing noise on each of ``n`` qubits."""
    DepolarizingParams(p, 0.0, n)
    _enum_guard(n, cap)
    single = depolarizing_weights(p)
    weights = {}
    for idx in itertools.product(range(4), repeat=n):
        weights[PauliString(idx)] = math.prod(single[a] for a in idx)
    return NoiseModel(n, weights)


def fully_correlated(p: float, n: int) -> NoiseModel:
    """The same Pauli error on every qubit; four support points at any n."""
    DepolarizingParams(p, 1.0, n)
    single = depolarizing_weights(p)
    return NoiseModel(n, {PauliString.uniform(a, n): single[a] for a in range(4)})


def convex_mixture(params: DepolarizingParams, cap: int = DEFAULT_ENUM_CAP) -> NoiseModel:
    """``(1 - mu) * uncorrelated + mu * fully_correlated``."""
    p, mu, n = params.p, params.mu, params.n
    if mu == 1.0:
        return fully_correlated(p, n)
    weights = {s: (1.0 - mu) * w for s, w in uncorrelated(p, n, cap).weights.items()}
    for s, w in fully_correlated(p, n).weights.items():
        weights[s] = weights.get(s, 0.0) + mu * w
    return NoiseModel(n, weights)


def from_table(n: int, entries: Iterable[tuple[PauliString | str, float]]) -> NoiseModel:
    """Validated model from explicit ``(string, probability)`` pairs.

    Duplicate keys and tables whose sum is off by more than 1e-9 are rejected.
    """
    n = int(n)
    seen: dict[PauliString, float] = {}
    for key, w in entries:
        s = as_pauli(key)
        if s.n != n:
            raise InputError(f"{s} has {s.n} qubits, table declares n={n}")
        if s in seen:
            raise InputError(f"duplicate entry for {s}")
        w = float(w)
        if w < 0 or math.isnan(w):
            raise InputError(f"negative weight {w} for {s}")
        seen[s] = w
    total = math.fsum(seen.values())
    if abs(total - 1.0) > _TABLE_TOL:
        raise InputError(f"table weights sum to {total!r}, expected 1 (tolerance {_TABLE_TOL})")
    return NoiseModel(n, seen, tol=_TABLE_TOL)
