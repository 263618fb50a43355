"""
Cross-correlations between chirp users under delay and Doppler.

Correlations are normalised by the full-symbol energy of the two waveforms, so
a delayed (partially empty) interferer is compared on the same scale as a
synchronous one. The shifted user is m, the reference user k; sweeps use the
normalised Doppler axis nu = delta_f*T/N.

The linear family has a closed form. Over any window [t0, t1] of length L the
phase difference of two linear chirps with the same rate is linear in t, so

    (1/T) * integral exp(j*(phi0 + 2*pi*f*t)) dt
        = (L/T) * exp(j*(phi0 + 2*pi*f*t0 + pi*f*L)) * sinc(f*L)

with f = N*(a - c)/T^2 + delta_f and phi0 = pi*N*(a^2 - c^2)/T^2, where a and c
are the time offsets of the two chirps. np.sinc evaluates the removable
singularity at f*L = 0 exactly.
"""

import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass, replace

import numpy as np
from numpy.typing import ArrayLike

from errors import DomainError
from scenario import Scenario
from waveform import (
    ChirpParams,
    PhaseLaw,
    SampledSignal,
    UserOffset,
    apply_offset,
    sample_symbol,
    signal_energy,
)

logger = logging.getLogger(__name__)

CORRELATION_METHODS = ("auto", "closed", "numeric")


@dataclass(frozen=True)
class ComplexCorrelation:
    """A complex correlation coefficient re + j*im."""

    re: float
    im: float

    @classmethod
    def from_complex(cls, value: complex) -> "ComplexCorrelation":
        value = complex(value)
        return cls(re=float(value.real), im=float(value.imag))

    def __complex__(self) -> complex:
        return complex(self.re, self.im)

    @property
    def magnitude(self) -> float:
        return math.hypot(self.re, self.im)

    def conjugate(self) -> "ComplexCorrelation":
        return ComplexCorrelation(self.re, -self.im)


@dataclass(frozen=True)
class CorrelationVector:
    """
    Correlations of the N-1 interferers of one victim.

    entries[j] correlates interferer j (for its chosen symbol) with the victim
    branch of the same symbol; cross_entries[j] correlates it with the opposite
    branch. energy_ratios[j] is sqrt(Es_j / Es_victim).
    """

    entries: tuple[ComplexCorrelation, ...]
    energy_ratios: tuple[float, ...] = ()
    cross_entries: tuple[ComplexCorrelation, ...] = ()

    def __post_init__(self) -> None:
        entries = tuple(self.entries)
        ratios = tuple(float(r) for r in self.energy_ratios) or (1.0,) * len(entries)
        cross = tuple(self.cross_entries) or (ComplexCorrelation(0.0, 0.0),) * len(entries)
        if len(ratios) != len(entries) or len(cross) != len(entries):
            raise DomainError(
                f"Correlation vector lengths differ: {len(entries)} entries, "
                f"{len(ratios)} energy ratios, {len(cross)} cross entries"
            )
        values = [c.re for c in entries + cross] + [c.im for c in entries + cross] + list(ratios)
        if not all(math.isfinite(v) for v in values):
            raise DomainError("Correlation vector entries must be finite")
        if any(r <= 0 for r in ratios):
            raise DomainError("Energy ratios must be positive")
        object.__setattr__(self, "entries", entries)
        object.__setattr__(self, "energy_ratios", ratios)
        object.__setattr__(self, "cross_entries", cross)

    @classmethod
    def from_values(
        cls,
        values: Sequence[complex],
        energy_ratios: Sequence[float] | None = None,
        cross_values: Sequence[complex] | None = None,
    ) -> "CorrelationVector":
        return cls(
            entries=tuple(ComplexCorrelation.from_complex(v) for v in values),
            energy_ratios=tuple(energy_ratios or ()),
            cross_entries=tuple(ComplexCorrelation.from_complex(v) for v in cross_values or ()),
        )

    def __len__(self) -> int:
        return len(self.entries)

    def scaled(self) -> np.ndarray:
        """Entries multiplied by their energy ratios."""
        return np.array([complex(c) for c in self.entries], dtype=complex) * np.array(
            self.energy_ratios, dtype=float
        )

    def scaled_cross(self) -> np.ndarray:
        return np.array([complex(c) for c in self.cross_entries], dtype=complex) * np.array(
            self.energy_ratios, dtype=float
        )


@dataclass(frozen=True, eq=False)
class BranchCorrelations:
    """
    Per-user 2x2 correlation tables seen by one victim receiver.

    tables[j, d, v] is the correlation of user j's transmitted bit-d waveform
    (with all of its offsets and its phase applied) against the victim's
    unit-amplitude bit-v reference, normalised by T. The victim's own table is
    tables[victim_user]; energy_ratios[j] = sqrt(Es_j / Es_victim).
    """

    victim_user: int
    tables: np.ndarray
    energy_ratios: np.ndarray
    victim_phase: float = 0.0

    def __post_init__(self) -> None:
        tables = np.array(self.tables, dtype=complex)
        ratios = np.array(self.energy_ratios, dtype=float)
        if tables.ndim != 3 or tables.shape[1:] != (2, 2):
            raise DomainError(f"Branch tables must have shape (N, 2, 2), got {tables.shape}")
        if ratios.shape != (tables.shape[0],):
            raise DomainError("One energy ratio per user is required")
        if not 0 <= self.victim_user < tables.shape[0]:
            raise DomainError(f"victim_user {self.victim_user} out of range")
        if not (np.all(np.isfinite(tables)) and np.all(np.isfinite(ratios))):
            raise DomainError("Branch tables must be finite")
        tables.setflags(write=False)
        ratios.setflags(write=False)
        object.__setattr__(self, "tables", tables)
        object.__setattr__(self, "energy_ratios", ratios)

    @property
    def n_users(self) -> int:
        return self.tables.shape[0]

    @property
    def interferers(self) -> list[int]:
        return [j for j in range(self.n_users) if j != self.victim_user]

    @property
    def victim_table(self) -> np.ndarray:
        return self.tables[self.victim_user]

    def interferer_tables(self) -> np.ndarray:
        return self.tables[self.interferers]

    def interferer_ratios(self) -> np.ndarray:
        return self.energy_ratios[self.interferers]

    def correlation_vector(self, interferer_symbols: Sequence[int]) -> CorrelationVector:
        """
        Collapse the tables for one choice of interferer symbols.

        Raises:
            DomainError: If the number of symbols does not match the interferers
        """
        symbols = _check_bits(interferer_symbols, self.n_users - 1)
        tables = self.interferer_tables()
        same = [tables[i, d, d] for i, d in enumerate(symbols)]
        cross = [tables[i, d, 1 - d] for i, d in enumerate(symbols)]
        return CorrelationVector.from_values(same, self.interferer_ratios().tolist(), cross)

    @classmethod
    def from_vector(cls, rho_vec: CorrelationVector) -> "BranchCorrelations":
        """
        Idealised tables: interferer j adds rho_j to the branch of its own symbol
        and its cross entry to the other branch, whatever symbol it sends.
        """
        n = len(rho_vec) + 1
        tables = np.zeros((n, 2, 2), dtype=complex)
        tables[0] = np.eye(2)
        for j, (same, cross) in enumerate(zip(rho_vec.entries, rho_vec.cross_entries, strict=True)):
            tables[j + 1] = [[complex(same), complex(cross)], [complex(cross), complex(same)]]
        ratios = np.concatenate([[1.0], rho_vec.energy_ratios])
        return cls(victim_user=0, tables=tables, energy_ratios=ratios)


def _check_bits(bits: Sequence[int], length: int) -> list[int]:
    bits = [int(b) for b in bits]
    if len(bits) != length:
        raise DomainError(f"Expected {length} interferer symbols, got {len(bits)}")
    if any(b not in (0, 1) for b in bits):
        raise DomainError("Interferer symbols must be 0 or 1")
    return bits


def xcorr_numeric(
    a: SampledSignal, b: SampledSignal, *, reference_energy: float | None = None
) -> ComplexCorrelation:
    """
    Normalised discrete correlation sum(a * conj(b)) * dt / sqrt(Ea * Eb).

    Args:
        a: First waveform
        b: Second waveform (conjugated)
        reference_energy: Replaces sqrt(Ea * Eb) as the normaliser, e.g. the
            full-symbol energy when a is a truncated delayed copy

    Raises:
        DomainError: On mismatched grids or zero normalising energy
    """
    if not a.same_grid(b):
        raise DomainError("Cannot correlate signals on different sample grids")
    inner = complex(np.vdot(b.samples, a.samples)) * a.dt
    norm = (
        reference_energy
        if reference_energy is not None
        else math.sqrt(signal_energy(a) * signal_energy(b))
    )
    if not norm > 0:
        raise DomainError("Correlation of a zero-energy signal is undefined")
    return ComplexCorrelation.from_complex(inner / norm)


def _check_users(params: ChirpParams, *users: int) -> None:
    for user in users:
        if not 0 <= user < params.n_users:
            raise DomainError(f"User index {user} out of range for N={params.n_users}")


def _check_delay(params: ChirpParams, epsilon: float) -> None:
    if not 0 <= epsilon < params.symbol_duration:
        raise DomainError(f"Delay {epsilon} must lie in [0, T={params.symbol_duration})")


def linear_correlation(
    params: ChirpParams,
    m: int,
    b_m: int,
    k: int,
    b_k: int,
    delta_f: ArrayLike,
    epsilon: float = 0.0,
    previous_bit: int | None = None,
) -> complex | np.ndarray:
    """
    Closed-form correlation of two linear chirps.

    User m sends bit b_m, delayed by epsilon and shifted by delta_f; it is
    correlated with user k's bit-b_k reference over the receiver window [0, T).
    Without previous_bit the window before epsilon is empty; with it, the tail
    of user m's previous symbol fills it.

    Returns:
        Complex correlation (array when delta_f is an array)

    Raises:
        DomainError: If a user, bit or delay is out of range
    """
    _check_users(params, m, k)
    _check_delay(params, epsilon)
    for bit in (b_m, b_k) + (() if previous_bit is None else (previous_bit,)):
        if bit not in (0, 1):
            raise DomainError(f"Bit must be 0 or 1, got {bit!r}")

    T = params.symbol_duration  # noqa: N806
    n = params.n_users
    delta_f = np.asarray(delta_f, dtype=float)
    c = k * T / n + b_k * T

    def segment(a: float, t0: float, t1: float) -> np.ndarray:
        length = t1 - t0
        f = n * (a - c) / T**2 + delta_f
        phi0 = math.pi * n * (a * a - c * c) / T**2
        phase = phi0 + 2 * math.pi * f * t0 + math.pi * f * length
        return (length / T) * np.exp(1j * phase) * np.sinc(f * length)

    value = segment(m * T / n + b_m * T - epsilon, epsilon, T)
    if previous_bit is not None and epsilon > 0:
        value = value + segment(m * T / n + previous_bit * T - epsilon + T, 0.0, epsilon)
    return complex(value) if value.ndim == 0 else value


def rho_doppler_linear(params: ChirpParams, m: int, k: int, delta_f: float) -> ComplexCorrelation:
    """Correlation of linear users m (Doppler shifted) and k, both sending bit 0."""
    return ComplexCorrelation.from_complex(linear_correlation(params, m, 0, k, 0, float(delta_f)))


def rho_doppler_delay_linear(
    params: ChirpParams,
    m: int,
    k: int,
    delta_f: float,
    epsilon: float,
    previous_bit: int | None = None,
) -> ComplexCorrelation:
    """
    Correlation of linear users m (delayed and Doppler shifted) and k, both sending bit 0.

    The receiver window splits at t = epsilon: user m's current symbol covers
    [epsilon, T) and, when previous_bit is given, its previous symbol covers [0, epsilon).
    """
    return ComplexCorrelation.from_complex(
        linear_correlation(params, m, 0, k, 0, float(delta_f), epsilon, previous_bit)
    )


def numeric_pair_sweep(
    params: ChirpParams,
    law: PhaseLaw,
    pairs: Sequence[tuple[int, int]],
    delta_f: ArrayLike,
    epsilon: float,
    samples_per_symbol: int,
    *,
    previous_bit: int | None = None,
) -> np.ndarray:
    """
    Numeric correlations of many (m, k) pairs over a Doppler grid, bit 0 on both sides.

    Every point equals xcorr_numeric(apply_offset(s_m, offset), s_k,
    reference_energy=T) on unit-amplitude symbols; the Doppler rotation is
    applied as one matrix product shared by all pairs.

    Returns:
        Array of shape (len(pairs), len(delta_f))
    """
    _check_delay(params, epsilon)
    unit = params.with_amplitude(1.0)
    users = sorted({u for pair in pairs for u in pair})
    _check_users(params, *users)
    symbols = {u: sample_symbol(unit, law, u, 0, samples_per_symbol) for u in users}
    previous = (
        {u: sample_symbol(unit, law, u, previous_bit, samples_per_symbol) for u in users}
        if previous_bit is not None
        else {}
    )
    delay = UserOffset(epsilon=epsilon)
    delayed = {u: apply_offset(symbols[u], delay, previous=previous.get(u)) for u in users}

    dt = unit.symbol_duration / samples_per_symbol
    weights = np.array(
        [delayed[m].samples * np.conj(symbols[k].samples) for m, k in pairs], dtype=complex
    ) * (dt / unit.symbol_duration)
    times = np.arange(samples_per_symbol) * dt
    doppler = np.exp(2j * math.pi * np.outer(np.atleast_1d(delta_f), times))
    return weights @ doppler.T


def numeric_doppler_sweep(
    params: ChirpParams,
    law: PhaseLaw,
    m: int,
    k: int,
    delta_f: ArrayLike,
    epsilon: float,
    samples_per_symbol: int,
    *,
    previous_bit: int | None = None,
) -> np.ndarray:
    """Numeric correlation of one pair over a Doppler grid (see numeric_pair_sweep)."""
    return numeric_pair_sweep(
        params, law, [(m, k)], delta_f, epsilon, samples_per_symbol, previous_bit=previous_bit
    )[0]


def _use_closed_form(scenario: Scenario, method: str) -> bool:
    if method not in CORRELATION_METHODS:
        raise DomainError(
            f"Unknown correlation method '{method}'. Choose one of: {', '.join(CORRELATION_METHODS)}"
        )
    if method == "closed" and scenario.family != "linear":
        raise DomainError(f"No closed form for chirp family '{scenario.family}'")
    return method == "closed" or (method == "auto" and scenario.family == "linear")


def branch_correlations(scenario: Scenario, method: str = "auto") -> BranchCorrelations:
    """
    Correlate every user's offset waveforms with the victim's branch references.

    Args:
        scenario: Link scenario
        method: "closed" (linear family only), "numeric", or "auto" (closed
            form when available)

    Returns:
        BranchCorrelations for scenario.victim_user
    """
    closed = _use_closed_form(scenario, method)
    unit = scenario.chirp.with_amplitude(1.0)
    victim = scenario.victim_user
    n = scenario.n_users
    tables = np.zeros((n, 2, 2), dtype=complex)

    if closed:
        for j, off in enumerate(scenario.offsets):
            rotation = np.exp(1j * off.theta)
            for d in (0, 1):
                for v in (0, 1):
                    tables[j, d, v] = rotation * linear_correlation(
                        unit, j, d, victim, v, off.delta_f, off.epsilon
                    )
    else:
        law = scenario.law
        ns = scenario.samples_per_symbol
        refs = [sample_symbol(unit, law, victim, v, ns) for v in (0, 1)]
        for j, off in enumerate(scenario.offsets):
            for d in (0, 1):
                received = apply_offset(sample_symbol(unit, law, j, d, ns), off)
                for v in (0, 1):
                    rho = xcorr_numeric(received, refs[v], reference_energy=unit.symbol_duration)
                    tables[j, d, v] = complex(rho)

    ratios = [scenario.energy_ratio(j) for j in range(n)]
    logger.debug(f"Branch correlations ({'closed' if closed else 'numeric'}) for victim {victim}")
    return BranchCorrelations(
        victim_user=victim,
        tables=tables,
        energy_ratios=ratios,
        victim_phase=scenario.victim_offset.theta,
    )


def build_correlation_vector(
    scenario: Scenario,
    victim_user: int,
    interferer_symbols: Sequence[int],
    method: str = "auto",
) -> CorrelationVector:
    """
    Correlation vector of victim_user's interferers for one choice of their symbols.

    Entry j belongs to the j-th interferer in user-index order.

    Raises:
        DomainError: On a victim index or symbol count inconsistent with the scenario
    """
    if victim_user != scenario.victim_user:
        scenario = replace(scenario, victim_user=victim_user)
    return branch_correlations(scenario, method).correlation_vector(interferer_symbols)
