"""
Sampled complex-baseband chirp symbols.

A user m of an N-user binary chirp set transmits bit b with phase
phi(t) = pi*(N/T^2)*(t + mT/N + bT)^2 for the built-in linear family. Other
families plug in through the phase-law registry, either programmatically with
register_phase_law() or from a "module:attribute" reference with
load_phase_law().
"""

import importlib
import logging
import math
from collections.abc import Callable
from dataclasses import dataclass, replace

import numpy as np
from numpy.typing import ArrayLike

from errors import DomainError

logger = logging.getLogger(__name__)

# Complex samples per symbol per user below which the 2N/T sweep is undersampled
SAMPLING_FLOOR_PER_USER = 8

# Relative slack when checking that a delay sits on the sample grid
_GRID_TOLERANCE = 1e-9


@dataclass(frozen=True)
class ChirpParams:
    """Parameters shared by every signal of the set."""

    n_users: int
    symbol_duration: float = 1.0
    amplitude: float = math.sqrt(2.0)

    def __post_init__(self) -> None:
        if isinstance(self.n_users, bool) or int(self.n_users) != self.n_users:
            raise DomainError(f"n_users must be an integer, got {self.n_users!r}")
        if self.n_users < 1:
            raise DomainError(f"n_users must be at least 1, got {self.n_users}")
        if not (math.isfinite(self.symbol_duration) and self.symbol_duration > 0):
            raise DomainError(f"symbol_duration must be positive, got {self.symbol_duration}")
        if not (math.isfinite(self.amplitude) and self.amplitude > 0):
            raise DomainError(f"amplitude must be positive, got {self.amplitude}")

    @property
    def chirp_rate(self) -> float:
        """Frequency sweep rate N/T^2 in Hz per second."""
        return self.n_users / self.symbol_duration**2

    @property
    def symbol_energy(self) -> float:
        """Symbol energy Es = A^2 T / 2 used on every Es/N0 axis."""
        return 0.5 * self.amplitude**2 * self.symbol_duration

    def with_amplitude(self, amplitude: float) -> "ChirpParams":
        return replace(self, amplitude=amplitude)


PhaseFunction = Callable[[ChirpParams, int, int, np.ndarray], np.ndarray]


def _check_symbol(params: ChirpParams, m: int, b: int) -> None:
    if not 0 <= m < params.n_users:
        raise DomainError(f"User index {m} out of range for N={params.n_users}")
    if b not in (0, 1):
        raise DomainError(f"Bit must be 0 or 1, got {b!r}")


def linear_phase(params: ChirpParams, m: int, b: int, t: ArrayLike) -> float | np.ndarray:
    """
    Phase of the linear chirp of user m for bit b.

    Args:
        params: Chirp set parameters
        m: User index in [0, N)
        b: Bit (0 or 1)
        t: Time(s) in seconds

    Returns:
        pi*(N/T^2)*(t + mT/N + bT)^2 in radians

    Raises:
        DomainError: If m or b is out of range
    """
    _check_symbol(params, m, b)
    T = params.symbol_duration  # noqa: N806
    shifted = np.asarray(t, dtype=float) + m * T / params.n_users + b * T
    phase = math.pi * params.chirp_rate * shifted**2
    return float(phase) if np.ndim(phase) == 0 else phase


@dataclass(frozen=True)
class PhaseLaw:
    """A chirp family: identifier plus the rule phi(params, m, b, t) in radians."""

    family: str
    phase: PhaseFunction
    description: str = ""

    def __call__(self, params: ChirpParams, m: int, b: int, t: ArrayLike) -> np.ndarray:
        _check_symbol(params, m, b)
        return np.asarray(self.phase(params, m, b, np.asarray(t, dtype=float)), dtype=float)


LINEAR = PhaseLaw(
    family="linear",
    phase=linear_phase,
    description="pi*(N/T^2)*(t + mT/N + bT)^2",
)

_REGISTRY: dict[str, PhaseLaw] = {LINEAR.family: LINEAR}


def available_families() -> list[str]:
    """Registered chirp family identifiers, sorted."""
    return sorted(_REGISTRY)


def register_phase_law(law: PhaseLaw, *, replace_existing: bool = False) -> PhaseLaw:
    """
    Register a chirp family.

    Raises:
        DomainError: If the family is already registered and replace_existing is False,
            or if the built-in linear family would be replaced
    """
    if law.family == LINEAR.family and law is not LINEAR:
        raise DomainError("The built-in 'linear' family cannot be replaced")
    if law.family in _REGISTRY and not replace_existing and _REGISTRY[law.family] is not law:
        raise DomainError(f"Chirp family '{law.family}' is already registered")
    _REGISTRY[law.family] = law
    logger.debug(f"Registered chirp family '{law.family}'")
    return law


def unregister_phase_law(family: str) -> None:
    """Remove a registered family (the linear family stays)."""
    if family == LINEAR.family:
        raise DomainError("The built-in 'linear' family cannot be removed")
    _REGISTRY.pop(family, None)


def get_phase_law(family: str) -> PhaseLaw:
    """
    Look up a registered chirp family.

    Raises:
        DomainError: Naming the available families when the family is unknown
    """
    try:
        return _REGISTRY[family]
    except KeyError:
        raise DomainError(
            f"Unknown chirp family '{family}'. Available families: {', '.join(available_families())}"
        ) from None


def load_phase_law(family: str, target: str) -> PhaseLaw:
    """
    Import a phase function from a "module:attribute" reference and register it.

    The attribute may be a PhaseLaw or a plain callable phi(params, m, b, t).

    Raises:
        DomainError: If the reference is malformed or does not resolve to a callable
    """
    module_name, sep, attribute = target.partition(":")
    if not sep or not module_name or not attribute:
        raise DomainError(f"Phase law reference must look like 'module:attribute', got '{target}'")
    try:
        module = importlib.import_module(module_name)
        obj = getattr(module, attribute)
    except (ImportError, AttributeError) as e:
        raise DomainError(f"Cannot load phase law '{target}': {e}") from e

    if isinstance(obj, PhaseLaw):
        law = replace(obj, family=family)
    elif callable(obj):
        law = PhaseLaw(family=family, phase=obj, description=target)
    else:
        raise DomainError(f"Phase law '{target}' is not callable")
    return register_phase_law(law, replace_existing=True)


@dataclass(frozen=True, eq=False)
class SampledSignal:
    """Complex baseband waveform on a uniform grid. The sample buffer is read-only."""

    samples: np.ndarray
    dt: float

    def __post_init__(self) -> None:
        samples = np.array(self.samples, dtype=complex)
        if samples.ndim != 1:
            raise DomainError("samples must be one-dimensional")
        if not np.all(np.isfinite(samples)):
            raise DomainError("samples must be finite")
        if not (math.isfinite(self.dt) and self.dt > 0):
            raise DomainError(f"dt must be positive, got {self.dt}")
        samples.setflags(write=False)
        object.__setattr__(self, "samples", samples)

    def __len__(self) -> int:
        return len(self.samples)

    @property
    def duration(self) -> float:
        return len(self.samples) * self.dt

    @property
    def times(self) -> np.ndarray:
        return np.arange(len(self.samples)) * self.dt

    def same_grid(self, other: "SampledSignal") -> bool:
        return len(self) == len(other) and math.isclose(self.dt, other.dt, rel_tol=_GRID_TOLERANCE)


@dataclass(frozen=True)
class UserOffset:
    """Impairments of one user relative to the receiver."""

    epsilon: float = 0.0  # delay in seconds
    delta_f: float = 0.0  # Doppler shift in Hz
    theta: float = 0.0  # carrier phase in radians, reduced to [0, 2pi)
    symbol_energy: float = 1.0

    def __post_init__(self) -> None:
        if not (math.isfinite(self.epsilon) and self.epsilon >= 0):
            raise DomainError(f"epsilon must be non-negative, got {self.epsilon}")
        if not math.isfinite(self.delta_f):
            raise DomainError("delta_f must be finite")
        if not math.isfinite(self.theta):
            raise DomainError("theta must be finite")
        if not (math.isfinite(self.symbol_energy) and self.symbol_energy > 0):
            raise DomainError(f"symbol_energy must be positive, got {self.symbol_energy}")
        object.__setattr__(self, "theta", self.theta % (2 * math.pi))


def min_samples_per_symbol(params: ChirpParams) -> int:
    """Smallest accepted number of samples per symbol."""
    return SAMPLING_FLOOR_PER_USER * params.n_users


def sample_symbol(
    params: ChirpParams, law: PhaseLaw, m: int, b: int, samples_per_symbol: int
) -> SampledSignal:
    """
    Sample one chirp symbol.

    Args:
        params: Chirp set parameters (the amplitude scales every sample)
        law: Phase law of the chirp family
        m: User index
        b: Bit
        samples_per_symbol: Number of samples over [0, T)

    Returns:
        SampledSignal with samples[i] = A*exp(j*phi(m, b, i*dt)), dt = T/samples_per_symbol

    Raises:
        DomainError: If the grid is below the sampling floor of 8 samples per user
            or the phase law returns non-finite values
    """
    floor = min_samples_per_symbol(params)
    if samples_per_symbol < floor:
        raise DomainError(
            f"samples_per_symbol={samples_per_symbol} undersamples N={params.n_users} users "
            f"(at least {floor} required)"
        )
    dt = params.symbol_duration / samples_per_symbol
    phase = law(params, m, b, np.arange(samples_per_symbol) * dt)
    if phase.shape != (samples_per_symbol,) or not np.all(np.isfinite(phase)):
        raise DomainError(f"Phase law '{law.family}' returned invalid phases for user {m}, bit {b}")
    return SampledSignal(params.amplitude * np.exp(1j * phase), dt)


def delay_in_samples(epsilon: float, dt: float) -> int:
    """
    Convert a delay to a whole number of samples.

    Raises:
        DomainError: If epsilon is not an integer multiple of dt
    """
    shift = round(epsilon / dt)
    if abs(shift * dt - epsilon) > _GRID_TOLERANCE * max(dt, epsilon):
        raise DomainError(f"Delay {epsilon} is not a multiple of the sample spacing {dt}")
    return int(shift)


def apply_offset(
    sig: SampledSignal, off: UserOffset, previous: SampledSignal | None = None
) -> SampledSignal:
    """
    Delay, Doppler-shift and phase-rotate a symbol inside the receiver's window.

    output[i] = sig[i - d] * exp(j*2*pi*delta_f*i*dt) * exp(j*theta) with d = epsilon/dt.
    The first d samples are zero, or the last d samples of previous when given.

    Raises:
        DomainError: If epsilon >= T, epsilon is off the sample grid, or previous
            does not share the grid of sig
    """
    n = len(sig)
    if n == 0:
        raise DomainError("Cannot offset an empty signal")
    if off.epsilon >= sig.duration * (1 - _GRID_TOLERANCE):
        raise DomainError(f"Delay {off.epsilon} must be shorter than the symbol ({sig.duration})")
    d = delay_in_samples(off.epsilon, sig.dt)
    if previous is not None and not previous.same_grid(sig):
        raise DomainError("previous symbol must share the sample grid")

    shifted = np.zeros(n, dtype=complex)
    shifted[d:] = sig.samples[: n - d]
    if previous is not None and d:
        shifted[:d] = previous.samples[n - d :]

    rotation = np.exp(1j * (2 * math.pi * off.delta_f * sig.times + off.theta))
    return SampledSignal(shifted * rotation, sig.dt)


def signal_energy(sig: SampledSignal) -> float:
    """
    Discrete energy sum(|s|^2) * dt.

    Raises:
        DomainError: If the signal is empty
    """
    if len(sig) == 0:
        raise DomainError("Energy of an empty signal is undefined")
    return float(np.sum(np.abs(sig.samples) ** 2) * sig.dt)
