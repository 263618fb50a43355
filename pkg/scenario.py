"""Multi-user link scenarios shared by the correlation, BER and Monte Carlo modules."""

import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass, replace
from fractions import Fraction

from config import get_config
from errors import DomainError
from waveform import (
    ChirpParams,
    PhaseLaw,
    UserOffset,
    delay_in_samples,
    get_phase_law,
    min_samples_per_symbol,
)

logger = logging.getLogger(__name__)

PHASE_MODELS = ("uniform", "fixed")

# Largest denominator accepted when snapping a delay (in units of T) to a grid
_MAX_DELAY_DENOMINATOR = 100_000


@dataclass(frozen=True)
class Scenario:
    """
    One victim receiver and N transmitting users.

    Each user's amplitude follows from its own symbol energy, A_j = sqrt(2*Es_j/T);
    ChirpParams.amplitude only seeds the defaults of build_scenario().
    """

    chirp: ChirpParams
    offsets: tuple[UserOffset, ...]
    samples_per_symbol: int
    family: str = "linear"
    victim_user: int = 0
    phase_model: str = "uniform"

    def __post_init__(self) -> None:
        offsets = tuple(self.offsets)
        object.__setattr__(self, "offsets", offsets)
        n = self.chirp.n_users
        if len(offsets) != n:
            raise DomainError(f"Expected {n} user offsets, got {len(offsets)}")
        if not 0 <= self.victim_user < n:
            raise DomainError(f"victim_user {self.victim_user} out of range for N={n}")
        if self.phase_model not in PHASE_MODELS:
            raise DomainError(
                f"Unknown phase model '{self.phase_model}'. Choose one of: {', '.join(PHASE_MODELS)}"
            )
        get_phase_law(self.family)

        floor = min_samples_per_symbol(self.chirp)
        if self.samples_per_symbol < floor:
            raise DomainError(
                f"samples_per_symbol={self.samples_per_symbol} is below the floor of {floor}"
            )
        for j, off in enumerate(offsets):
            if off.epsilon >= self.chirp.symbol_duration:
                raise DomainError(f"User {j} delay {off.epsilon} is not shorter than T")
            delay_in_samples(off.epsilon, self.dt)

    @property
    def n_users(self) -> int:
        return self.chirp.n_users

    @property
    def dt(self) -> float:
        return self.chirp.symbol_duration / self.samples_per_symbol

    @property
    def law(self) -> PhaseLaw:
        return get_phase_law(self.family)

    @property
    def interferers(self) -> tuple[int, ...]:
        return tuple(j for j in range(self.n_users) if j != self.victim_user)

    @property
    def victim_offset(self) -> UserOffset:
        return self.offsets[self.victim_user]

    def amplitude(self, user: int) -> float:
        """Amplitude of a user's waveform, sqrt(2*Es/T)."""
        return math.sqrt(2.0 * self.offsets[user].symbol_energy / self.chirp.symbol_duration)

    def energy_ratio(self, user: int) -> float:
        """sqrt(Es_user / Es_victim)."""
        return math.sqrt(self.offsets[user].symbol_energy / self.victim_offset.symbol_energy)


def grid_samples_per_symbol(
    n_users: int,
    epsilons: Sequence[float],
    symbol_duration: float = 1.0,
    samples_per_user: int | None = None,
) -> int:
    """
    Choose a symbol grid on which every requested delay is a whole number of samples.

    Args:
        n_users: Number of users N
        epsilons: Delays in seconds
        symbol_duration: Symbol duration T in seconds
        samples_per_user: Minimum samples per symbol per user (default from config)

    Returns:
        The smallest multiple of the delays' common grid that is at least
        samples_per_user * N samples

    Raises:
        DomainError: If a delay is not a simple rational fraction of T
    """
    samples_per_user = samples_per_user or get_config().samples_per_user
    minimum = max(samples_per_user, 8) * n_users
    step = 1
    for eps in epsilons:
        ratio = eps / symbol_duration
        snapped = Fraction(ratio).limit_denominator(_MAX_DELAY_DENOMINATOR)
        if abs(float(snapped) - ratio) > 1e-12:
            raise DomainError(f"Delay {eps} is not a rational fraction of T={symbol_duration}")
        step = math.lcm(step, snapped.denominator)
    return math.ceil(minimum / step) * step


def build_scenario(
    n_users: int,
    *,
    epsilon: float = 0.0,
    nu: float = 0.0,
    victim_user: int = 0,
    family: str = "linear",
    symbol_duration: float = 1.0,
    amplitude: float = math.sqrt(2.0),
    samples_per_user: int | None = None,
    samples_per_symbol: int | None = None,
    phase_model: str = "uniform",
    interferer_theta: float = 0.0,
    symbol_energies: Sequence[float] | None = None,
    offsets: Sequence[UserOffset] | None = None,
) -> Scenario:
    """
    Build the standard experiment: a clean victim and interferers sharing one offset.

    Every interferer is delayed by epsilon seconds and Doppler shifted by
    delta_f = nu*N/T, nu being the normalised Doppler axis of the sweeps.

    Explicit per-user offsets replace the shared ones (epsilon, nu and
    interferer_theta are then ignored). Their delay, Doppler and phase are
    kept; energies always come from symbol_energies, which defaults to the
    chirp's A^2*T/2 for every user.

    Raises:
        DomainError: On any invalid parameter
    """
    chirp = ChirpParams(n_users=n_users, symbol_duration=symbol_duration, amplitude=amplitude)
    if symbol_energies is None:
        symbol_energies = [chirp.symbol_energy] * n_users
    if len(symbol_energies) != n_users:
        raise DomainError(f"Expected {n_users} symbol energies, got {len(symbol_energies)}")

    if offsets is not None:
        if len(offsets) != n_users:
            raise DomainError(f"Expected {n_users} user offsets, got {len(offsets)}")
        offsets = tuple(
            replace(off, symbol_energy=energy)
            for off, energy in zip(offsets, symbol_energies, strict=True)
        )
    else:
        delta_f = nu * n_users / symbol_duration
        offsets = tuple(
            UserOffset(symbol_energy=symbol_energies[j])
            if j == victim_user
            else UserOffset(
                epsilon=epsilon,
                delta_f=delta_f,
                theta=interferer_theta,
                symbol_energy=symbol_energies[j],
            )
            for j in range(n_users)
        )
    if samples_per_symbol is None:
        samples_per_symbol = grid_samples_per_symbol(
            n_users, sorted({off.epsilon for off in offsets}), symbol_duration, samples_per_user
        )
    logger.debug(
        f"Scenario N={n_users} delays={[off.epsilon for off in offsets]} family={family} "
        f"samples_per_symbol={samples_per_symbol}"
    )
    return Scenario(
        chirp=chirp,
        offsets=offsets,
        samples_per_symbol=samples_per_symbol,
        family=family,
        victim_user=victim_user,
        phase_model=phase_model,
    )
