"""Correlated Pauli noise, partial-environment feedback and entanglement fidelity."""

from .errors import ConsistencyError, InputError, ResourceError
from .feedback import (
    FidelityReport,
    MeasurementPartition,
    RecoveryStrategy,
    RegionLabel,
    SelectedOutput,
    asymptote,
    classify_region,
    corrected_fidelity,
    optimize_mixture,
    optimize_recovery,
    outcome_probability,
    region_strategy,
    select,
    theoretical_fidelity,
    thresholds,
)
from .noise import (
    DepolarizingParams,
    NoiseModel,
    convex_mixture,
    from_table,
    fully_correlated,
    single_qubit_depolarizing,
    uncorrelated,
)
from .pauli import PauliString, PhasedPauli, multiply, to_dense, trace_rule

__version__ = "0.1.0"
