"""Tests for ber module."""

import math

import numpy as np
import pytest

import ber
from config import reset_config
from errors import DomainError, FormulaInconsistencyError
from scenario import build_scenario
from specfun import gaussian_q
from xcorr import BranchCorrelations, CorrelationVector, branch_correlations

SNR_GRID = [ber.db_to_linear(db) for db in (0, 2, 4, 6, 8, 10, 12)]


def _vector(*values):
    return CorrelationVector.from_values(list(values))


# ============================================================================
# SNR helpers and patterns
# ============================================================================


def test_db_conversions():
    assert ber.db_to_linear(10.0) == pytest.approx(10.0)
    assert ber.db_to_linear(0.0) == 1.0
    assert ber.linear_to_db(100.0) == pytest.approx(20.0)


def test_snr_point():
    point = ber.SnrPoint.from_db(3.0)
    assert point.db == pytest.approx(3.0)
    assert point.noise_density(2.0) == pytest.approx(2.0 / point.es_over_n0)

    unit = ber.SnrPoint(1.0)
    assert unit.correlator_sigma(symbol_energy=1.0, symbol_duration=1.0) == pytest.approx(1.0)

    with pytest.raises(DomainError):
        ber.SnrPoint(0.0)


def test_symbol_pattern_bits():
    pattern = ber.SymbolPattern(5, 3)
    assert pattern.bits == (1, 0, 1)
    assert pattern.complement == (0, 1, 0)
    assert pattern.signs == (-1, 1, -1)

    with pytest.raises(DomainError):
        ber.SymbolPattern(8, 3)


def test_pattern_matrix_matches_patterns():
    matrix = ber.pattern_matrix(4)
    assert matrix.shape == (16, 4)
    for row, pattern in zip(matrix, ber.symbol_patterns(4), strict=True):
        assert tuple(row) == pattern.bits

    np.testing.assert_array_equal(ber.pattern_matrix(3, 2, 4), [[0, 1, 0], [1, 1, 0]])


# ============================================================================
# Single-user and coherent formulas
# ============================================================================


def test_nc_single_known_values():
    assert ber.ber_nc_single(1.0) == pytest.approx(0.30326532985631671, abs=1e-15)
    assert ber.ber_nc_single(10.0) == pytest.approx(0.0033689734995427335, abs=1e-15)
    assert ber.ber_nc_single(0.0) == 0.5
    with pytest.raises(DomainError):
        ber.ber_nc_single(-1.0)


@pytest.mark.parametrize("es_over_n0", SNR_GRID)
def test_coherent_reduces_to_q_without_interference(es_over_n0):
    expected = gaussian_q(math.sqrt(es_over_n0))
    assert ber.ber_coherent_nuser(_vector(), es_over_n0) == pytest.approx(expected, abs=1e-12)
    assert ber.ber_coherent_nuser(_vector(0, 0, 0), es_over_n0) == pytest.approx(expected, abs=1e-12)


def test_coherent_two_user_average():
    es_over_n0 = 4.0
    rho = 0.3
    expected = 0.5 * (gaussian_q(1.3 * 2.0) + gaussian_q(0.7 * 2.0))
    assert ber.ber_coherent_nuser(_vector(rho), es_over_n0) == pytest.approx(expected, abs=1e-14)


def test_coherent_uses_real_part():
    assert ber.ber_coherent_nuser(_vector(0.3 + 0.5j), 4.0) == pytest.approx(
        ber.ber_coherent_nuser(_vector(0.3), 4.0)
    )


@pytest.mark.parametrize("value", [0.0, -1.0, math.nan, math.inf])
def test_formulas_reject_bad_snr(value):
    with pytest.raises(DomainError):
        ber.ber_coherent_nuser(_vector(0.1), value)
    with pytest.raises(DomainError):
        ber.ber_nc_twouser(0.1, value)


# ============================================================================
# Two-user noncoherent
# ============================================================================


@pytest.mark.parametrize("es_over_n0", SNR_GRID)
def test_nc_twouser_uncorrelated_is_single_user(es_over_n0):
    single = ber.ber_nc_single(es_over_n0)
    assert ber.ber_nc_twouser(0.0, es_over_n0) == pytest.approx(single, abs=1e-12)
    assert ber.ber_nc_twouser(0.0, es_over_n0, exponent_form="printed") == pytest.approx(
        single, abs=1e-12
    )


def test_nc_twouser_exponent_forms_differ_with_correlation():
    template = ber.ber_nc_twouser(0.4 + 0.2j, 4.0)
    printed = ber.ber_nc_twouser(0.4 + 0.2j, 4.0, exponent_form="printed")
    assert template != pytest.approx(printed, rel=1e-3)


def test_nc_twouser_degrades_with_correlation():
    es_over_n0 = ber.db_to_linear(10)
    clean = ber.ber_nc_twouser(0.0, es_over_n0)
    assert ber.ber_nc_twouser(0.5j, es_over_n0) > clean


def test_nc_twouser_validation():
    with pytest.raises(DomainError, match="must not exceed 1"):
        ber.ber_nc_twouser(1.2, 1.0)
    with pytest.raises(DomainError, match="exponent form"):
        ber.ber_nc_twouser(0.1, 1.0, exponent_form="sqrt")


# ============================================================================
# N-user closed forms
# ============================================================================


@pytest.mark.parametrize("rho", [0.0, 0.3, -0.2 + 0.4j, 0.9j])
def test_nuser_reconciled_matches_twouser(rho):
    for es_over_n0 in SNR_GRID:
        assert ber.ber_nc_nuser_paper(_vector(rho), es_over_n0, 2) == pytest.approx(
            ber.ber_nc_twouser(rho, es_over_n0), abs=1e-12
        )


@pytest.mark.parametrize("n_users", [1, 2, 4, 8])
def test_nuser_reconciled_reduces_to_single_user(n_users):
    vec = _vector(*([0.0] * (n_users - 1)))
    for es_over_n0 in SNR_GRID:
        assert ber.ber_nc_nuser_paper(vec, es_over_n0, n_users) == pytest.approx(
            ber.ber_nc_single(es_over_n0), abs=1e-12
        )


def test_nuser_printed_literal_value_without_correlation():
    """The literal coefficients keep only the first pattern when rho = 0."""
    es_over_n0 = 2.0
    value = ber.ber_nc_nuser_paper(_vector(0.0), es_over_n0, 2, variant="printed")
    assert value == pytest.approx(0.25 * math.exp(-1.0), abs=1e-12)


def test_nuser_printed_single_user():
    assert ber.ber_nc_nuser_paper(_vector(), 3.0, 1, variant="printed") == pytest.approx(
        ber.ber_nc_single(3.0)
    )


def test_nuser_printed_reports_inconsistency():
    with pytest.raises(FormulaInconsistencyError) as excinfo:
        ber.ber_nc_nuser_paper(_vector(-0.9, -0.9), 1.0, 3, variant="printed")
    assert excinfo.value.xi == 0
    assert excinfo.value.value == pytest.approx(-0.98)


def test_nuser_paper_validation():
    with pytest.raises(DomainError, match="Expected 2 correlations"):
        ber.ber_nc_nuser_paper(_vector(0.1), 1.0, 3)
    with pytest.raises(DomainError, match="Unknown variant"):
        ber.ber_nc_nuser_paper(_vector(0.1), 1.0, 2, variant="sqrt")


def test_pattern_limit():
    vec = _vector(*([0.0] * 24))
    with pytest.raises(DomainError, match="at most 24 users"):
        ber.ber_nc_nuser_paper(vec, 1.0, 25)


def test_pattern_sum_independent_of_chunking(monkeypatch):
    rng = np.random.default_rng(3)
    values = 0.15 * (rng.normal(size=7) + 1j * rng.normal(size=7))
    vec = CorrelationVector.from_values(values)
    reference = ber.ber_nc_nuser_paper(vec, 5.0, 8)

    monkeypatch.setenv("CHIRPMAI_PATTERN_CHUNK_SIZE", "5")
    reset_config()

    assert ber.ber_nc_nuser_paper(vec, 5.0, 8) == pytest.approx(reference, rel=1e-13)


# ============================================================================
# Derived formulas
# ============================================================================


@pytest.mark.parametrize("rho", [0.0, 0.25, 0.3 - 0.3j])
def test_derived_matches_twouser_for_idealised_tables(rho):
    branches = BranchCorrelations.from_vector(_vector(rho))
    for es_over_n0 in SNR_GRID:
        assert ber.ber_nc_nuser_derived(branches, es_over_n0) == pytest.approx(
            ber.ber_nc_twouser(rho, es_over_n0), abs=1e-12
        )


@pytest.mark.parametrize("n_users", [2, 4, 8])
def test_derived_reduces_to_single_user(n_users):
    branches = BranchCorrelations.from_vector(_vector(*([0.0] * (n_users - 1))))
    for es_over_n0 in SNR_GRID:
        assert ber.ber_nc_nuser_derived(branches, es_over_n0) == pytest.approx(
            ber.ber_nc_single(es_over_n0), abs=1e-12
        )
        assert ber.ber_coherent_derived(branches, es_over_n0) == pytest.approx(
            gaussian_q(math.sqrt(es_over_n0)), abs=1e-12
        )


def test_coherent_derived_matches_closed_coherent():
    vec = _vector(0.2, -0.1)
    branches = BranchCorrelations.from_vector(vec)
    for es_over_n0 in SNR_GRID:
        assert ber.ber_coherent_derived(branches, es_over_n0) == pytest.approx(
            ber.ber_coherent_nuser(vec, es_over_n0), abs=1e-12
        )


def test_derived_from_scenario():
    scen = build_scenario(4, epsilon=0.05, nu=0.1, samples_per_symbol=2000)

    from_scenario = ber.ber_nc_nuser_derived(scen, 4.0)
    closed = ber.ber_nc_nuser_derived(branch_correlations(scen, "closed"), 4.0)
    numeric = ber.ber_nc_nuser_derived(scen, 4.0, method="numeric")

    assert from_scenario == closed
    assert numeric == pytest.approx(closed, abs=1e-3)
    assert closed > ber.ber_nc_single(4.0)


def test_derived_single_user_scenario():
    scen = build_scenario(1, samples_per_symbol=64)
    assert ber.ber_nc_nuser_derived(scen, 2.0) == pytest.approx(ber.ber_nc_single(2.0), rel=1e-9)
    assert ber.ber_coherent_derived(scen, 2.0) == pytest.approx(gaussian_q(math.sqrt(2.0)), rel=1e-9)


# ============================================================================
# Two-user links from scenario tables
# ============================================================================


@pytest.mark.parametrize("epsilon", [0.05, 0.1, 0.2])
@pytest.mark.parametrize("method", ["closed", "numeric"])
def test_twouser_tables_equal_derived(epsilon, method):
    branches = branch_correlations(build_scenario(2, epsilon=epsilon), method)
    for es_over_n0 in SNR_GRID:
        assert ber.ber_nc_twouser(branches, es_over_n0) == pytest.approx(
            ber.ber_nc_nuser_derived(branches, es_over_n0), abs=1e-12
        )


def test_scalar_twouser_misses_cross_leakage():
    """A delayed interferer feeds both branches, which one bit-0 correlation cannot describe."""
    branches = branch_correlations(build_scenario(2, epsilon=0.1), "closed")
    table = branches.tables[1]
    assert abs(table[0, 1]) > 1e-2
    assert abs(table[1, 1] - table[0, 0]) > 1e-2

    rho = complex(branches.correlation_vector([0]).scaled()[0])
    scalar = ber.ber_nc_twouser(rho, 4.0)
    full = ber.ber_nc_twouser(branches, 4.0)
    assert full - scalar > 5e-3


def test_twouser_tables_validation():
    three_users = branch_correlations(build_scenario(3, epsilon=0.1), "closed")
    with pytest.raises(DomainError, match="N=2"):
        ber.ber_nc_twouser(three_users, 1.0)

    two_users = branch_correlations(build_scenario(2, epsilon=0.1), "closed")
    with pytest.raises(DomainError, match="scalar correlation"):
        ber.ber_nc_twouser(two_users, 1.0, exponent_form="printed")


def test_unequal_energies_scale_interference():
    weak = build_scenario(2, epsilon=0.1, symbol_energies=[1.0, 0.25])
    strong = build_scenario(2, epsilon=0.1, symbol_energies=[1.0, 4.0])

    clean = ber.ber_nc_single(4.0)
    assert clean < ber.ber_nc_nuser_derived(weak, 4.0) < ber.ber_nc_nuser_derived(strong, 4.0)


# ============================================================================
# Properties over the SNR axis
# ============================================================================


DENSE_GRID = [ber.db_to_linear(db) for db in np.arange(-10.0, 20.25, 0.25)]
TWO_USER_DELAY = branch_correlations(
    build_scenario(2, epsilon=0.2, samples_per_symbol=80), "closed"
)
FOUR_USERS = _vector(0.1, -0.15j, 0.05 + 0.1j)

PROPERTY_FORMULAS = {
    "nc-single": ber.ber_nc_single,
    "nc-twouser": lambda es: ber.ber_nc_twouser(0.4 - 0.3j, es),
    "nc-twouser-tables": lambda es: ber.ber_nc_twouser(TWO_USER_DELAY, es),
    "nc-paper": lambda es: ber.ber_nc_nuser_paper(FOUR_USERS, es, 4),
    "nc-derived": lambda es: ber.ber_nc_nuser_derived(TWO_USER_DELAY, es),
    "coherent": lambda es: ber.ber_coherent_nuser(FOUR_USERS, es),
    "coherent-derived": lambda es: ber.ber_coherent_derived(TWO_USER_DELAY, es),
}


@pytest.mark.parametrize("name", sorted(PROPERTY_FORMULAS))
def test_ber_bounded_and_nonincreasing(name):
    values = np.array([PROPERTY_FORMULAS[name](es) for es in DENSE_GRID])

    assert np.all(values >= 0.0)
    assert np.all(values <= 0.5)
    assert np.all(np.diff(values) <= 1e-15)


def test_coherent_beats_noncoherent_single_user():
    silent = _vector()
    for es_over_n0 in DENSE_GRID:
        assert ber.ber_coherent_nuser(silent, es_over_n0) < ber.ber_nc_single(es_over_n0)


# ============================================================================
# Interferer order
# ============================================================================


PERMUTATIONS = [(0, 1, 2, 3), (0, 3, 1, 2), (0, 2, 3, 1)]


@pytest.mark.parametrize("order", PERMUTATIONS)
def test_pattern_average_ignores_interferer_order(order):
    values = [0.2, -0.1 + 0.15j, 0.05j]
    permuted = _vector(*[values[i - 1] for i in order[1:]])
    original = _vector(*values)

    for es_over_n0 in SNR_GRID:
        assert ber.ber_nc_nuser_paper(permuted, es_over_n0, 4) == pytest.approx(
            ber.ber_nc_nuser_paper(original, es_over_n0, 4), rel=1e-12
        )
        assert ber.ber_coherent_nuser(permuted, es_over_n0) == pytest.approx(
            ber.ber_coherent_nuser(original, es_over_n0), rel=1e-12
        )


@pytest.mark.parametrize("order", PERMUTATIONS)
def test_derived_ignores_interferer_order(order):
    scen = build_scenario(4, epsilon=0.05, nu=0.1, symbol_energies=[1.0, 0.5, 2.0, 1.5])
    branches = branch_correlations(scen, "closed")
    permuted = BranchCorrelations(
        victim_user=0,
        tables=branches.tables[list(order)],
        energy_ratios=branches.energy_ratios[list(order)],
        victim_phase=branches.victim_phase,
    )

    for es_over_n0 in SNR_GRID:
        assert ber.ber_nc_nuser_derived(permuted, es_over_n0) == pytest.approx(
            ber.ber_nc_nuser_derived(branches, es_over_n0), rel=1e-12
        )
        assert ber.ber_coherent_derived(permuted, es_over_n0) == pytest.approx(
            ber.ber_coherent_derived(branches, es_over_n0), rel=1e-12
        )
