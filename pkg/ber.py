"""
Analytic bit error rates of binary chirp users.

Every function returns the BER of the victim user at a given Es/N0 (the
victim's symbol energy over the noise density). In normalised units the
correlator noise has unit scale and a victim branch mean of A*T*mu becomes
u*|mu| with u = sqrt(2*Es/N0).

Sums over interferer symbol patterns are evaluated in vectorised chunks and
combined with math.fsum, so results do not depend on chunking.
"""

import logging
import math
from collections.abc import Callable, Iterator
from dataclasses import dataclass

import numpy as np

from config import get_config
from errors import DomainError, FormulaInconsistencyError
from scenario import Scenario
from specfun import exp_bessel_i0, gaussian_q, marcum_q, rician_pair_error
from xcorr import BranchCorrelations, ComplexCorrelation, CorrelationVector, branch_correlations

logger = logging.getLogger(__name__)

EXPONENT_FORMS = ("template", "printed")
NUSER_VARIANTS = ("reconciled", "printed")

# Slack allowed before a literal formula term counts as leaving [0, 1]
_RANGE_SLACK = 1e-12


def db_to_linear(db: float) -> float:
    """10^(dB/10)."""
    return 10.0 ** (db / 10.0)


def linear_to_db(ratio: float) -> float:
    """10*log10(ratio)."""
    return 10.0 * math.log10(ratio)


@dataclass(frozen=True)
class SnrPoint:
    """A point on the Es/N0 axis (binary symbols, so Eb = Es)."""

    es_over_n0: float

    def __post_init__(self) -> None:
        if math.isnan(self.es_over_n0) or self.es_over_n0 <= 0:
            raise DomainError(f"Es/N0 must be positive, got {self.es_over_n0}")

    @classmethod
    def from_db(cls, db: float) -> "SnrPoint":
        return cls(db_to_linear(db))

    @property
    def db(self) -> float:
        return linear_to_db(self.es_over_n0)

    def noise_density(self, symbol_energy: float) -> float:
        """N0 for the given symbol energy (0 for a noise-free point)."""
        return symbol_energy / self.es_over_n0

    def correlator_sigma(self, symbol_energy: float, symbol_duration: float) -> float:
        """Per-dimension correlator noise scale sqrt(N0*T)."""
        return math.sqrt(self.noise_density(symbol_energy) * symbol_duration)


@dataclass(frozen=True)
class SymbolPattern:
    """Interferer symbols b_xi: bits[i] is bit i of the binary expansion of xi."""

    xi: int
    length: int

    def __post_init__(self) -> None:
        if self.length < 0 or not 0 <= self.xi < 2**self.length:
            raise DomainError(f"Pattern index {self.xi} out of range for {self.length} interferers")

    @property
    def bits(self) -> tuple[int, ...]:
        return tuple((self.xi >> i) & 1 for i in range(self.length))

    @property
    def complement(self) -> tuple[int, ...]:
        return tuple(1 - b for b in self.bits)

    @property
    def signs(self) -> tuple[int, ...]:
        """Antipodal form: bit 0 -> +1, bit 1 -> -1."""
        return tuple(1 - 2 * b for b in self.bits)


def symbol_patterns(length: int) -> Iterator[SymbolPattern]:
    """All 2^length interferer patterns in index order."""
    for xi in range(2**length):
        yield SymbolPattern(xi, length)


def pattern_matrix(length: int, start: int = 0, stop: int | None = None) -> np.ndarray:
    """Bits of patterns start..stop-1 as a (patterns, length) integer matrix."""
    stop = 2**length if stop is None else stop
    xi = np.arange(start, stop, dtype=np.int64)
    return ((xi[:, None] >> np.arange(length, dtype=np.int64)) & 1).astype(np.int8)


def _check_snr(es_over_n0: float) -> float:
    es_over_n0 = float(es_over_n0)
    if not (math.isfinite(es_over_n0) and es_over_n0 > 0):
        raise DomainError(f"Es/N0 must be finite and positive, got {es_over_n0}")
    return es_over_n0


def _check_pattern_users(n_users: int) -> None:
    limit = get_config().max_pattern_users
    if n_users > limit:
        raise DomainError(
            f"Exact pattern sums support at most {limit} users, got N={n_users} "
            f"({2 ** (n_users - 1)} patterns)"
        )


def _pattern_mean(length: int, evaluate: Callable[[np.ndarray, int], np.ndarray]) -> float:
    total = 2**length
    chunk = get_config().pattern_chunk_size
    partial = []
    for start in range(0, total, chunk):
        bits = pattern_matrix(length, start, min(start + chunk, total))
        partial.append(float(np.sum(evaluate(bits, start))))
    return math.fsum(partial) / total


def ber_coherent_nuser(rho_vec: CorrelationVector, es_over_n0: float) -> float:
    """
    Coherent BER averaged over all interferer sign patterns.

    Pb = mean over xi of Q(|1 + rho^T b_xi| * sqrt(Es/N0)) with b_xi in {+1, -1}^(N-1)
    and rho the real parts of the energy-scaled correlations.
    """
    es_over_n0 = _check_snr(es_over_n0)
    _check_pattern_users(len(rho_vec) + 1)
    rho = rho_vec.scaled().real
    amplitude = math.sqrt(es_over_n0)

    def evaluate(bits: np.ndarray, start: int) -> np.ndarray:
        signs = 1 - 2 * bits
        return np.asarray(gaussian_q(np.abs(1.0 + signs @ rho) * amplitude))

    return _pattern_mean(len(rho), evaluate)


def ber_nc_single(es_over_n0: float) -> float:
    """Noncoherent single-user BER 1/2*exp(-Es/(2*N0))."""
    if math.isnan(es_over_n0) or es_over_n0 < 0:
        raise DomainError(f"Es/N0 must be non-negative, got {es_over_n0}")
    return 0.5 * math.exp(-0.5 * es_over_n0)


def ber_nc_twouser(
    rho: ComplexCorrelation | complex | BranchCorrelations,
    es_over_n0: float,
    *,
    exponent_form: str = "template",
) -> float:
    """
    Noncoherent BER with one correlated interferer.

    For a scalar rho the interferer is idealised: half the time it adds rho to
    the victim's own branch, giving the Rician-versus-Rayleigh term
    1/2*exp(-Es*|1+rho|^2/(2*N0)); otherwise it feeds the competing branch,
    giving rician_pair_error(AT, AT*|rho|).

    A delayed or Doppler-shifted interferer leaks into both victim branches and
    its bit-0 and bit-1 waveforms correlate differently, so a scalar cannot
    describe it. Passing the BranchCorrelations of a two-user scenario averages
    the four (victim bit, interferer bit) cases over the full tables, which is
    ber_nc_nuser_derived at N = 2.

    Args:
        rho: Complex correlation of the interferer with the victim, or the
            BranchCorrelations of a two-user link
        es_over_n0: Es/N0 (linear)
        exponent_form: "template" uses |1+rho|^2 in the first exponent;
            "printed" uses |1+rho| (square root kept, scalar rho only)

    Raises:
        DomainError: If |rho| > 1, the exponent form is unknown, or the tables
            do not describe exactly two users
    """
    es_over_n0 = _check_snr(es_over_n0)
    if exponent_form not in EXPONENT_FORMS:
        raise DomainError(f"Unknown exponent form '{exponent_form}'")
    if isinstance(rho, BranchCorrelations):
        return _twouser_tables(rho, es_over_n0, exponent_form)
    z = complex(rho)
    if abs(z) > 1 + 1e-9:
        raise DomainError(f"|rho| must not exceed 1, got {abs(z)}")

    u = math.sqrt(2.0 * es_over_n0)
    overlap = abs(1 + z) ** 2 if exponent_form == "template" else abs(1 + z)
    same_branch = 0.5 * math.exp(-0.5 * es_over_n0 * overlap)
    other_branch = rician_pair_error(u, u * abs(z), 1.0)
    return 0.5 * (same_branch + other_branch)


def _twouser_tables(branches: BranchCorrelations, es_over_n0: float, exponent_form: str) -> float:
    if branches.n_users != 2:
        raise DomainError(f"Two-user formulas need N=2, got N={branches.n_users}")
    if exponent_form != "template":
        raise DomainError("The printed exponent form needs a scalar correlation")
    u = math.sqrt(2.0 * es_over_n0)
    interferer_bits = np.array([[0], [1]])
    terms = []
    for victim_bit in (0, 1):
        wanted, competing = _branch_means(branches, victim_bit)(interferer_bits)
        terms.extend(np.asarray(rician_pair_error(u * np.abs(wanted), u * np.abs(competing), 1.0)))
    return math.fsum(terms) / 4


def ber_nc_nuser_paper(
    rho_vec: CorrelationVector,
    es_over_n0: float,
    n_users: int,
    *,
    variant: str = "reconciled",
) -> float:
    """
    Closed-form noncoherent N-user BER over interferer patterns.

    With b = b_xi and its complement bb = 1 - b, pattern xi puts
    1 + bb^T rho on the victim's branch and b^T rho on the other one.

    "reconciled" averages rician_pair_error(u*|1 + bb^T rho|, u*|b^T rho|)
    uniformly over xi; it reduces to ber_nc_twouser for N = 2 and to
    ber_nc_single for rho = 0.

    "printed" evaluates the literal coefficients of the closed form: the xi = 0 term
    1/2*exp(-Es*sqrt(1 + sum(|rho|^2 + 2*Re(rho)))/(2*N0)), and for xi >= 1
    Q1(Y/sqrt2, X/sqrt2) - exp(-(X^2+Y^2)/4)*I0(X*Y/2) with
    X = u*|1 + 2*(bb^T rho)^2 + 2*bb^T rho| and Y = u*sqrt2*|b^T rho|; all
    2^(N-1) terms are summed and divided by 2^(N-1). This literal form does not
    reduce to ber_nc_single at rho = 0 for N > 1 and is kept for comparison.

    Raises:
        DomainError: If the vector length does not match n_users or N exceeds
            the exact pattern-sum limit
        FormulaInconsistencyError: If a printed term or the total leaves [0, 1]
    """
    es_over_n0 = _check_snr(es_over_n0)
    if variant not in NUSER_VARIANTS:
        raise DomainError(f"Unknown variant '{variant}'. Choose one of: {', '.join(NUSER_VARIANTS)}")
    if len(rho_vec) != n_users - 1:
        raise DomainError(f"Expected {n_users - 1} correlations for N={n_users}, got {len(rho_vec)}")
    _check_pattern_users(n_users)
    rho = rho_vec.scaled()
    u = math.sqrt(2.0 * es_over_n0)

    if variant == "reconciled":

        def evaluate(bits: np.ndarray, start: int) -> np.ndarray:
            wanted = u * np.abs(1.0 + (1 - bits) @ rho)
            competing = u * np.abs(bits @ rho)
            return np.asarray(rician_pair_error(wanted, competing, 1.0))

        return _pattern_mean(len(rho), evaluate)

    return _nuser_printed(rho, es_over_n0, u)


def _nuser_printed(rho: np.ndarray, es_over_n0: float, u: float) -> float:
    length = len(rho)
    inside = 1.0 + float(np.sum(np.abs(rho) ** 2 + 2.0 * rho.real))
    if inside < 0:
        raise FormulaInconsistencyError(
            f"Pattern 0 exponent takes the square root of {inside}", xi=0, value=inside
        )
    first = 0.5 * math.exp(-0.5 * es_over_n0 * math.sqrt(inside))
    if length == 0:
        return first

    def evaluate(bits: np.ndarray, start: int) -> np.ndarray:
        if start == 0:
            bits = bits[1:]
            start = 1
        complement = (1 - bits) @ rho
        X = u * np.abs(1.0 + 2.0 * complement**2 + 2.0 * complement)  # noqa: N806
        Y = u * math.sqrt(2.0) * np.abs(bits @ rho)  # noqa: N806
        terms = np.asarray(marcum_q(1, Y / math.sqrt(2.0), X / math.sqrt(2.0))) - np.asarray(
            exp_bessel_i0(-(X**2 + Y**2) / 4.0, X * Y / 2.0)
        )
        bad = np.flatnonzero((terms < -_RANGE_SLACK) | (terms > 1 + _RANGE_SLACK))
        if bad.size:
            xi = int(start + bad[0])
            value = float(terms[bad[0]])
            raise FormulaInconsistencyError(
                f"Pattern {xi} term {value} lies outside [0, 1]", xi=xi, value=value
            )
        return terms

    total = first / 2**length + _pattern_mean(length, evaluate)
    if not -_RANGE_SLACK <= total <= 1 + _RANGE_SLACK:
        raise FormulaInconsistencyError(f"Total probability {total} lies outside [0, 1]", value=total)
    if total > 0.5:
        logger.warning(f"Printed N-user formula gives BER {total} above 1/2")
    return total


def _resolve_branches(source: Scenario | BranchCorrelations, method: str) -> BranchCorrelations:
    if isinstance(source, BranchCorrelations):
        return source
    return branch_correlations(source, method)


def _branch_means(
    branches: BranchCorrelations, victim_bit: int
) -> Callable[[np.ndarray], tuple[np.ndarray, np.ndarray]]:
    """Normalised branch means (wanted, competing) as a function of interferer bits."""
    tables = branches.interferer_tables()
    ratios = branches.interferer_ratios()
    own = branches.victim_table[victim_bit]
    base = own + (ratios[:, None] * tables[:, 0, :]).sum(axis=0)
    step = ratios[:, None] * (tables[:, 1, :] - tables[:, 0, :])

    def means(bits: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        mu = base + bits @ step
        return mu[:, victim_bit], mu[:, 1 - victim_bit]

    return means


def ber_nc_nuser_derived(
    source: Scenario | BranchCorrelations, es_over_n0: float, *, method: str = "auto"
) -> float:
    """
    Noncoherent N-user BER built from per-branch correlations.

    For victim bit b and interferer symbols d the branch means are
    mu_v = C_victim[b, v] + sum_j r_j * C_j[d_j, v]; the pairwise error is
    rician_pair_error(u*|mu_b|, u*|mu_(1-b)|), averaged over b and all d.

    Args:
        source: Scenario (correlations computed with the given method) or
            precomputed BranchCorrelations
        es_over_n0: Victim Es/N0 (linear)
        method: Correlation method when source is a Scenario
    """
    es_over_n0 = _check_snr(es_over_n0)
    branches = _resolve_branches(source, method)
    _check_pattern_users(branches.n_users)
    u = math.sqrt(2.0 * es_over_n0)

    per_bit = []
    for victim_bit in (0, 1):
        means = _branch_means(branches, victim_bit)

        def evaluate(bits: np.ndarray, start: int, means=means) -> np.ndarray:
            wanted, competing = means(bits)
            return np.asarray(rician_pair_error(u * np.abs(wanted), u * np.abs(competing), 1.0))

        per_bit.append(_pattern_mean(branches.n_users - 1, evaluate))
    return 0.5 * (per_bit[0] + per_bit[1])


def ber_coherent_derived(
    source: Scenario | BranchCorrelations, es_over_n0: float, *, method: str = "auto"
) -> float:
    """
    Coherent N-user BER built from per-branch correlations.

    The receiver knows the victim's phase theta_m, so with the branch means of
    ber_nc_nuser_derived the pairwise error is
    Q(sqrt(Es/N0) * Re(exp(-j*theta_m) * (mu_b - mu_(1-b)))).
    """
    es_over_n0 = _check_snr(es_over_n0)
    branches = _resolve_branches(source, method)
    _check_pattern_users(branches.n_users)
    amplitude = math.sqrt(es_over_n0)
    derotate = np.exp(-1j * branches.victim_phase)

    per_bit = []
    for victim_bit in (0, 1):
        means = _branch_means(branches, victim_bit)

        def evaluate(bits: np.ndarray, start: int, means=means) -> np.ndarray:
            wanted, competing = means(bits)
            distance = np.real(derotate * (wanted - competing))
            return np.asarray(gaussian_q(amplitude * distance))

        per_bit.append(_pattern_mean(branches.n_users - 1, evaluate))
    return 0.5 * (per_bit[0] + per_bit[1])
