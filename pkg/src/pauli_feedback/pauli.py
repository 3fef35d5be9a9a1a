"""Pauli strings on n qubits with exact phase tracking.

Factors are indexed 0=I, 1=X, 2=Y, 3=Z. The first factor belongs to the
measured qubit. Phases are kept as an exponent k of i, so products are exact.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import InputError, ResourceError

LETTERS = "IXYZ"
_VALID = frozenset(range(4))

# Largest string that to_dense will render (matrix side 2**n).
MAX_DENSE_QUBITS = 6

_PAULI_MATRICES = (
    np.eye(2, dtype=complex),
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)

# _PRODUCT[a][b] = (c, k) with sigma_a sigma_b = i**k sigma_c
_PRODUCT = [[(0, 0)] * 4 for _ in range(4)]
for _a in range(4):
    _PRODUCT[0][_a] = (_a, 0)
    _PRODUCT[_a][0] = (_a, 0)
    _PRODUCT[_a][_a] = (0, 0)
for _a, _b, _c in ((1, 2, 3), (2, 3, 1), (3, 1, 2)):
    _PRODUCT[_a][_b] = (_c, 1)
    _PRODUCT[_b][_a] = (_c, 3)


@dataclass(frozen=True, order=True)
class PauliString:
    """Tensor product of single-qubit Paulis, one index per qubit."""

    factors: tuple[int, ...]

    def __post_init__(self):
        factors = self.factors
        if type(factors) is not tuple or not _VALID.issuperset(factors):
            factors = tuple(int(f) for f in factors)
            if not _VALID.issuperset(factors):
                raise InputError(f"Pauli indices must be in 0..3, got {factors}")
            object.__setattr__(self, "factors", factors)
        if not factors:
            raise InputError("a Pauli string needs at least one qubit")

    @classmethod
    def from_text(cls, text: str) -> "PauliString":
        text = text.strip().upper()
        try:
            return cls(tuple(LETTERS.index(ch) for ch in text))
        except ValueError:
            raise InputError(f"not a Pauli string: {text!r}") from None

    @classmethod
    def identity(cls, n: int) -> "PauliString":
        return cls((0,) * n)

    @classmethod
    def uniform(cls, index: int, n: int) -> "PauliString":
        """The string index^{(x)n}, e.g. ``uniform(1, 3)`` is XXX."""
        return cls((index,) * n)

    @property
    def n(self) -> int:
        return len(self.factors)

    @property
    def weight(self) -> int:
        """Number of non-identity factors."""
        return sum(1 for f in self.factors if f)

    def restrict(self, qubits: Sequence[int]) -> "PauliString":
        return PauliString(tuple(self.factors[q] for q in qubits))

    def __len__(self) -> int:
        return len(self.factors)

    def __str__(self) -> str:
        return "".join(LETTERS[f] for f in self.factors)

    def __repr__(self) -> str:
        return f"PauliString({str(self)!r})"


@dataclass(frozen=True)
class PhasedPauli:
    """``i**phase_exponent`` times a Pauli string."""

    pauli: PauliString
    phase_exponent: int = 0

    def __post_init__(self):
        object.__setattr__(self, "phase_exponent", int(self.phase_exponent) % 4)

    @property
    def n(self) -> int:
        return self.pauli.n

    def __str__(self) -> str:
        prefix = ("", "i", "-", "-i")[self.phase_exponent]
        return prefix + str(self.pauli)


def as_pauli(value: PauliString | str | Sequence[int]) -> PauliString:
    """Coerce text or an index sequence into a PauliString."""
    if isinstance(value, PauliString):
        return value
    if isinstance(value, str):
        return PauliString.from_text(value)
    return PauliString(tuple(value))


def _check_lengths(a: PauliString, b: PauliString) -> None:
    if a.n != b.n:
        raise InputError(f"length mismatch: {a} has {a.n} qubits, {b} has {b.n}")


def multiply(a: PauliString | PhasedPauli, b: PauliString | PhasedPauli) -> PhasedPauli:
    """Product ``a @ b`` as a phased Pauli string.

    Plain strings are treated as carrying phase 0.
    """
    phase = 0
    if isinstance(a, PhasedPauli):
        phase += a.phase_exponent
        a = a.pauli
    if isinstance(b, PhasedPauli):
        phase += b.phase_exponent
        b = b.pauli
    a, b = as_pauli(a), as_pauli(b)
    _check_lengths(a, b)
    out = []
    for fa, fb in zip(a.factors, b.factors):
        c, k = _PRODUCT[fa][fb]
        out.append(c)
        phase += k
    return PhasedPauli(PauliString(tuple(out)), phase)


def trace_rule(a: PauliString, b: PauliString) -> int:
    """|tr(sigma_a sigma_b)|**2, which is 4**n when a == b and zero otherwise."""
    a, b = as_pauli(a), as_pauli(b)
    _check_lengths(a, b)
    return 4 ** a.n if a == b else 0


def to_dense(a: PhasedPauli | PauliString | str, max_qubits: int = MAX_DENSE_QUBITS) -> np.ndarray:
    """Render as a 2**n x 2**n complex matrix; qubit 0 is the most significant factor."""
    if not isinstance(a, PhasedPauli):
        a = PhasedPauli(as_pauli(a), 0)
    if a.n > max_qubits:
        raise ResourceError(f"dense rendering of {a.n} qubits exceeds cap of {max_qubits}")
    mats = [_PAULI_MATRICES[f] for f in a.pauli.factors]
    return (1j ** a.phase_exponent) * reduce(np.kron, mats)


def all_strings(n: int) -> Iterator[PauliString]:
    """Every n-qubit Pauli string in lexicographic (index) order."""
    for idx in np.ndindex(*(4,) * n):
        yield PauliString(idx)


def join(head: PauliString, tail: PauliString, head_positions: Iterable[int]) -> PauliString:
    """Interleave ``head`` onto ``head_positions`` and fill the rest from ``tail``."""
    head_positions = list(head_positions)
    n = head.n + tail.n
    out = [0] * n
    rest = [q for q in range(n) if q not in head_positions]
    for q, f in zip(head_positions, head.factors):
        out[q] = f
    for q, f in zip(rest, tail.factors):
        out[q] = f
    return PauliString(tuple(out))
