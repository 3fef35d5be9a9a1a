import itertools
import math
from fractions import Fraction

import numpy as np
import pytest

from pauli_feedback.errors import InputError, ResourceError
from pauli_feedback.feedback import (
    MeasurementPartition,
    RecoveryStrategy,
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
from pauli_feedback.noise import (
    DepolarizingParams,
    convex_mixture,
    from_table,
    fully_correlated,
    uncorrelated,
)
from pauli_feedback.pauli import PauliString, all_strings, join
from pauli_feedback.verification import random_strategy, random_table


def P(text):
    return PauliString.from_text(text)


def first(n):
    return MeasurementPartition(n)


def exact_region_b(p, mu, n):
    p, mu = Fraction(p), Fraction(mu)
    return float((1 - mu) * ((1 - p) ** n + 3 * (p / 3) ** n) + mu)


# --- selection -------------------------------------------------------------

def test_select_examples():
    out = select(fully_correlated(0.3, 2), first(2), "X")
    assert dict(out.components) == {P("XX"): pytest.approx(0.1)}
    out = select(uncorrelated(0.3, 2), first(2), "I")
    assert len(out.components) == 4
    assert all(str(s)[0] == "I" for s in out.components)
    assert out.probability == pytest.approx(0.7, abs=1e-15)
    for a in "IXYZ":
        out = select(convex_mixture(DepolarizingParams(0.3, 1.0, 3)), first(3), a)
        assert list(out.components) == [P(a * 3)]


def test_selected_outputs_rebuild_model():
    m = convex_mixture(DepolarizingParams(0.35, 0.4, 3))
    rebuilt = {}
    for a in first(3).outcomes():
        rebuilt.update(select(m, first(3), a).components)
    assert rebuilt == dict(m.weights)


def test_select_bad_outcome():
    with pytest.raises(InputError):
        select(uncorrelated(0.3, 2), first(2), "XX")


def test_outcome_probability_examples():
    m = convex_mixture(DepolarizingParams(0.4, 0.9, 3))
    assert outcome_probability(m, first(3), "I") == pytest.approx(0.6, abs=1e-14)
    assert math.fsum(outcome_probability(m, first(3), a) for a in "IXYZ") == pytest.approx(1, abs=1e-14)
    assert outcome_probability(fully_correlated(0.6, 5), first(5), "Z") == pytest.approx(0.2, abs=1e-15)


def test_outcome_probability_independent_of_mu():
    for mu in (0.0, 0.3, 1.0):
        m = convex_mixture(DepolarizingParams(0.5, mu, 3))
        assert outcome_probability(m, first(3), "Y") == pytest.approx(0.5 / 3, abs=1e-14)


def test_partition_validation():
    with pytest.raises(InputError):
        MeasurementPartition(2, ())
    with pytest.raises(InputError):
        MeasurementPartition(2, (2,))
    with pytest.raises(InputError):
        MeasurementPartition(3, (1, 1))
    assert MeasurementPartition(3, (1,)).unmeasured == (0, 2)


# --- strategies ------------------------------------------------------------

def test_strategy_normalization():
    with pytest.raises(InputError):
        RecoveryStrategy(2, (0,), {"I": {"II": 0.5, "IX": 0.4}})
    with pytest.raises(InputError):
        RecoveryStrategy(2, (0,), {"I": {"III": 1.0}})
    s = RecoveryStrategy(2, (0,), {"I": {"II": 0.5, "IX": 0.5}})
    assert s.choice("I") is None


def test_strategy_json_round_trip():
    s = region_strategy("C", 3)
    back = RecoveryStrategy.from_json(s.to_json())
    assert back.same_as(s)
    assert s.to_json()["outcomes"]["I"] == {"IXX": 1.0}
    assert s.to_json()["outcomes"]["Y"] == {"YYY": 1.0}


def test_region_strategy_forms():
    assert region_strategy("A", 3).choice("X") == P("XII")
    assert region_strategy("B", 3).choice("Z") == P("ZZZ")
    assert region_strategy("B", 3).choice("I") == P("III")
    assert region_strategy("C", 2).choice("I") == P("IX")
    with pytest.raises(InputError):
        region_strategy("D", 2)


# --- corrected fidelity ----------------------------------------------------

@pytest.mark.parametrize("mu", [0.0, 0.3, 0.9, 1.0])
def test_region_a_strategy_gives_one_minus_p(mu):
    rep = corrected_fidelity(convex_mixture(DepolarizingParams(0.4, mu, 2)), first(2), region_strategy("A", 2))
    assert rep.total == pytest.approx(0.6, abs=1e-14)


def test_region_b_strategy_value():
    rep = corrected_fidelity(convex_mixture(DepolarizingParams(0.4, 0.9, 2)), first(2), region_strategy("B", 2))
    assert rep.total == pytest.approx(exact_region_b(Fraction(2, 5), Fraction(9, 10), 2), abs=1e-14)
    assert rep.total == pytest.approx(0.9413333333333333, abs=1e-14)
    assert rep.total == pytest.approx(math.fsum(rep.per_outcome.values()), abs=1e-12)


@pytest.mark.parametrize("n, p", [(2, 0.3), (4, 0.9), (6, 0.5)])
def test_perfect_correlation_fully_corrected(n, p):
    rep = corrected_fidelity(fully_correlated(p, n), first(n), region_strategy("B", n))
    assert rep.total == pytest.approx(1.0, abs=1e-14)


def test_corrected_fidelity_requires_coverage():
    m = uncorrelated(0.3, 2)
    partial = RecoveryStrategy.deterministic({"I": "II"}, 2)
    with pytest.raises(InputError):
        corrected_fidelity(m, first(2), partial)
    # outcomes with zero probability may be skipped
    m = from_table(2, [("II", 1.0)])
    assert corrected_fidelity(m, first(2), partial).total == 1.0


def test_inconsistent_corrections_flagged():
    m = from_table(2, [("II", 0.5), ("XX", 0.5)])
    s = RecoveryStrategy.deterministic({"I": "II", "X": "IX"}, 2)
    rep = corrected_fidelity(m, first(2), s)
    assert rep.total == 0.5
    assert len(rep.flags) == 1


def test_strategy_partition_mismatch():
    with pytest.raises(InputError):
        corrected_fidelity(uncorrelated(0.3, 2), MeasurementPartition(2, (1,)), region_strategy("A", 2))


def test_linearity_in_strategies():
    rng = np.random.default_rng(3)
    for n in (1, 2, 3):
        part = first(n)
        for _ in range(20):
            m = random_table(rng, n)
            s1 = random_strategy(rng, part, consistent=False)
            s2 = random_strategy(rng, part)
            w = float(rng.random())
            mixed = corrected_fidelity(m, part, s1.mix(s2, w)).total
            f1 = corrected_fidelity(m, part, s1).total
            f2 = corrected_fidelity(m, part, s2).total
            assert abs(mixed - ((1 - w) * f1 + w * f2)) <= 1e-14


# --- optimization ----------------------------------------------------------

def test_optimize_hand_example():
    m = from_table(2, [("II", 0.5), ("IZ", 0.2), ("XX", 0.3)])
    rep = optimize_recovery(m, first(2))
    assert rep.strategy.choice("I") == P("II")
    assert rep.strategy.choice("X") == P("XX")
    assert rep.total == pytest.approx(0.8, abs=1e-15)


def test_optimize_region_a_example():
    rep = optimize_recovery(convex_mixture(DepolarizingParams(0.4, 0.2, 2)), first(2))
    assert rep.total == pytest.approx(0.6, abs=1e-14)
    assert rep.strategy.same_as(region_strategy("A", 2))


@pytest.mark.parametrize("p, mu", [(0.1, 0.2), (0.5, 0.5), (0.9, 0.0), (1.0, 1.0)])
def test_full_access_recovers_everything(p, mu):
    m = convex_mixture(DepolarizingParams(p, mu, 2))
    assert optimize_recovery(m, MeasurementPartition.full(2)).total == pytest.approx(1.0, abs=1e-12)


def _exhaustive_best(model, part):
    """Max of corrected_fidelity over every deterministic outcome-consistent strategy."""
    k = len(part.unmeasured)
    outcomes = list(part.outcomes())
    rests = list(all_strings(k)) if k else [None]

    def corr(a, rest):
        return a if rest is None else join(a, rest, part.measured)

    if len(rests) ** len(outcomes) <= 4096:
        best = -1.0
        for combo in itertools.product(rests, repeat=len(outcomes)):
            s = RecoveryStrategy.deterministic(
                {a: corr(a, r) for a, r in zip(outcomes, combo)}, part.n, part.measured
            )
            best = max(best, corrected_fidelity(model, part, s).total)
        return best
    # larger cases: evaluate each rest shared by all outcomes, then sum every combination
    per = np.empty((len(outcomes), len(rests)))
    for j, r in enumerate(rests):
        s = RecoveryStrategy.deterministic({a: corr(a, r) for a in outcomes}, part.n, part.measured)
        rep = corrected_fidelity(model, part, s)
        per[:, j] = [rep.per_outcome[str(a)] for a in outcomes]
    grid = sum(
        per[i].reshape([-1 if d == i else 1 for d in range(len(outcomes))])
        for i in range(len(outcomes))
    )
    return float(grid.max())


def test_vertex_optimality_random_tables():
    rng = np.random.default_rng(11)
    for trial in range(50):
        n = 1 + trial % 3
        m = random_table(rng, n)
        for part in (first(n), MeasurementPartition.full(n)):
            fast = optimize_recovery(m, part).total
            assert abs(fast - _exhaustive_best(m, part)) <= 1e-15


def test_optimizer_ties_pick_smallest_string():
    m = from_table(2, [("IX", 0.25), ("IY", 0.25), ("XI", 0.5)])
    rep = optimize_recovery(m, first(2))
    assert rep.strategy.choice("I") == P("IX")
    # never-seen outcomes get the identity on unmeasured qubits
    assert rep.strategy.choice("Z") == P("ZI")


def test_optimize_cap():
    with pytest.raises(ResourceError):
        optimize_recovery(uncorrelated(0.2, 3), first(3), cap=2)


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_structured_optimizer_matches_enumeration(n):
    rng = np.random.default_rng(n)
    for _ in range(15):
        p, mu = rng.random(2)
        params = DepolarizingParams(p, mu, n)
        a = optimize_mixture(params)
        b = optimize_recovery(convex_mixture(params), first(n))
        assert abs(a.total - b.total) <= 1e-12
        assert a.strategy.same_as(b.strategy)


# --- regions and closed forms ---------------------------------------------

def test_threshold_examples():
    assert thresholds(0.3, 2)[0] == pytest.approx(0.375, abs=1e-15)
    assert thresholds(0.3, 2)[1] is None
    assert thresholds(0.9, 2)[1] == pytest.approx(0.6 / 3.6, abs=1e-15)
    assert thresholds(0.9, 2)[0] is None
    assert thresholds(0.75, 2) == (0.0, 0.0)
    for mu in (0.01, 0.5, 1.0):
        assert classify_region(DepolarizingParams(0.75, mu, 2))[0].kind == "B"


def test_n5_threshold_exact():
    p = Fraction(2, 5)
    x = (1 - p) ** 4 - (p / 3) ** 4
    assert thresholds(0.4, 5)[0] == pytest.approx(float(x / (x + 1)), abs=1e-15)
    assert thresholds(0.4, 5)[0] == pytest.approx(0.1144831205, abs=1e-10)


def test_n2_thresholds_reduce_to_two_qubit_forms():
    for p in np.linspace(0, 1, 401):
        ab, bc = thresholds(p, 2)
        if p <= 0.75:
            assert ab == pytest.approx((3 - 4 * p) / (6 - 4 * p), abs=1e-15)
        if p >= 0.75:
            assert bc == pytest.approx((4 * p - 3) / (4 * p), abs=1e-15)


def test_classify_labels():
    assert str(classify_region(DepolarizingParams(0.4, 0.2, 2))[0]) == "A"
    assert str(classify_region(DepolarizingParams(0.4, 0.9, 2))[0]) == "B"
    assert str(classify_region(DepolarizingParams(0.9, 0.05, 2))[0]) == "C"
    assert str(classify_region(DepolarizingParams(0.9, 0.5, 2))[0]) == "B"
    mu_ab = (3 - 4 * 0.3) / (6 - 4 * 0.3)
    label = classify_region(DepolarizingParams(0.3, mu_ab, 2))[0]
    assert label.is_boundary and label.edge == "AB"
    assert str(classify_region(DepolarizingParams(0.75, 0.0, 3))[0]) == "boundary:ABC"
    with pytest.raises(InputError):
        classify_region(DepolarizingParams(0.3, 0.3, 1))


def test_classifier_exhaustive():
    for p in np.linspace(0, 1, 41):
        for mu in np.linspace(0, 1, 41):
            label = classify_region(DepolarizingParams(p, mu, 3))[0]
            assert label.kind in ("A", "B", "C", "boundary")
            if label.kind == "A":
                assert p < 0.75
            if label.kind == "C":
                assert p > 0.75


def test_theoretical_examples():
    assert theoretical_fidelity(DepolarizingParams(0.4, 0.2, 2)).total == pytest.approx(0.6, abs=1e-15)
    rep = theoretical_fidelity(DepolarizingParams(0.4, 0.9, 5))
    assert rep.total == pytest.approx(exact_region_b(Fraction(2, 5), Fraction(9, 10), 5), abs=1e-15)
    assert rep.total == pytest.approx(0.9077886419753086, abs=1e-14)
    rep = theoretical_fidelity(DepolarizingParams(0.9, 0.05, 2))
    assert rep.total == pytest.approx(0.33, abs=1e-14)
    assert str(rep.region) == "C"


def test_theoretical_per_outcome_sums():
    for p, mu, n in [(0.2, 0.1, 3), (0.4, 0.9, 4), (0.95, 0.01, 3), (0.5, 0.06, 5)]:
        rep = theoretical_fidelity(DepolarizingParams(p, mu, n))
        assert abs(rep.total - math.fsum(rep.per_outcome.values())) <= 1e-12


def test_boundary_formulas_agree():
    for n in (2, 3, 5):
        for p in (0.2, 0.5, 0.9):
            ab, bc = thresholds(p, n)
            mu = ab if ab is not None else bc
            rep = theoretical_fidelity(DepolarizingParams(p, mu, n))
            assert rep.region.is_boundary
            below = theoretical_fidelity(DepolarizingParams(p, mu - 1e-9, n)).total
            assert abs(rep.total - below) < 1e-8


def test_region_strategies_match_closed_forms():
    for p, mu, n in [(0.2, 0.05, 3), (0.4, 0.9, 4), (0.95, 0.01, 3)]:
        params = DepolarizingParams(p, mu, n)
        rep = theoretical_fidelity(params)
        direct = corrected_fidelity(convex_mixture(params), first(n), rep.strategy)
        assert abs(direct.total - rep.total) <= 1e-12


def test_optimizer_matches_region_formulas_on_grid():
    for n in (2, 3, 4, 5):
        for p in (np.arange(25) + 0.5) / 25:
            for mu in (np.arange(25) + 0.5) / 25:
                params = DepolarizingParams(p, mu, n)
                ab, bc = thresholds(p, n)
                t = ab if ab is not None else bc
                if abs(mu - t) < 1e-6:
                    continue
                best = optimize_recovery(convex_mixture(params), first(n)).total
                assert abs(best - theoretical_fidelity(params).total) <= 1e-12


def test_monotone_in_mu():
    for n in (2, 3, 5):
        for p in np.linspace(0, 1, 21):
            values = [optimize_mixture(DepolarizingParams(p, mu, n)).total for mu in np.linspace(0, 1, 51)]
            assert all(b >= a - 1e-15 for a, b in zip(values, values[1:]))


def test_asymptote_examples():
    assert asymptote(DepolarizingParams(0.4, 0.9, 5)) == 0.9
    assert asymptote(DepolarizingParams(0.4, 0.0, 5)) == 0.0
    assert asymptote(DepolarizingParams(0.9, 0.0, 5)) == 0.0
    assert asymptote(DepolarizingParams(0.4, 1.0, 5)) == 1.0
    assert asymptote(DepolarizingParams(0.2, 0.05, 3)) == pytest.approx(0.05 * 0.8)
    assert asymptote(DepolarizingParams(0.95, 0.001, 2)) == pytest.approx(0.001 * 0.95)


def test_large_n_fidelity_approaches_asymptote():
    params = DepolarizingParams(0.4, 0.9, 40)
    assert abs(optimize_mixture(params).total - asymptote(params)) < 1e-8
