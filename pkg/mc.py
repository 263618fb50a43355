"""
Monte Carlo link simulator for the victim of a multi-user chirp scenario.

Each trial draws fresh equiprobable symbols for every user, superposes their
offset waveforms, rotates the sum by the receiver phase, adds complex AWGN and
correlates against the victim's two unit-amplitude branch references.

Noise samples have per-dimension variance N0/dt, so a correlator
sum(n * conj(ref)) * dt over a unit-amplitude reference of duration T has
variance N0*T per real dimension.

Every SNR point is split into seeded partitions that run concurrently in
worker threads; the result depends only on (scenario, seed, partitions,
batch size), never on scheduling.
"""

import asyncio
import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass
try:
    from enum import StrEnum
except ImportError:  # Python < 3.11
    from enum import Enum

    class StrEnum(str, Enum):
        __str__ = str.__str__
        __format__ = str.__format__

import numpy as np

from config import Config, get_config
from errors import DomainError
from scenario import Scenario
from waveform import LINEAR, ChirpParams, SampledSignal, apply_offset, sample_symbol

logger = logging.getLogger(__name__)

__all__ = [
    "BerEstimate",
    "Detector",
    "StopRule",
    "decide",
    "detect_coherent",
    "detect_noncoherent",
    "estimate_ber",
    "estimate_ber_async",
    "sample_correlator_noise",
    "synthesize_rx",
    "victim_references",
]

# Two-sided 95% normal quantile
_Z95 = 1.959963984540054


class Detector(StrEnum):
    COHERENT = "coherent"
    NONCOHERENT = "noncoherent"


@dataclass(frozen=True)
class StopRule:
    """Stop an SNR point after min_errors errors or max_bits bits, whichever comes first."""

    min_errors: int = 200
    max_bits: int = 10_000_000

    def __post_init__(self) -> None:
        if self.min_errors < 1:
            raise DomainError(f"min_errors must be positive, got {self.min_errors}")
        if self.max_bits < 1:
            raise DomainError(f"max_bits must be positive, got {self.max_bits}")

    @classmethod
    def from_config(cls, cfg: Config | None = None) -> "StopRule":
        cfg = cfg or get_config()
        return cls(min_errors=cfg.mc_min_errors, max_bits=cfg.mc_max_bits)


@dataclass(frozen=True)
class BerEstimate:
    """Monte Carlo BER at one Es/N0 point."""

    es_over_n0: float
    errors: int
    bits: int
    seed: int
    stop_reason: str = "min_errors"

    def __post_init__(self) -> None:
        if not 0 <= self.errors <= self.bits:
            raise DomainError(f"Invalid counts: {self.errors} errors in {self.bits} bits")

    @property
    def ber(self) -> float:
        return self.errors / self.bits if self.bits else 0.0

    @property
    def ci95_halfwidth(self) -> float:
        """Normal-approximation 95% half-width; 0 when no errors occurred."""
        if not self.bits:
            return 0.0
        p = self.ber
        return _Z95 * math.sqrt(p * (1.0 - p) / self.bits)

    @property
    def es_over_n0_db(self) -> float:
        return 10.0 * math.log10(self.es_over_n0)


def _correlate(rx: SampledSignal, branch: SampledSignal) -> complex:
    if not rx.same_grid(branch):
        raise DomainError("Received signal and branch reference use different grids")
    return complex(np.vdot(branch.samples, rx.samples)) * rx.dt


def decide(
    z: np.ndarray, detector: Detector, phase_reference: float | np.ndarray = 0.0
) -> np.ndarray:
    """
    Bit decisions from branch outputs z[..., 2] (ties go to bit 0).

    The noncoherent rule compares |z|^2; the coherent rule compares
    Re(exp(-j*phase_reference) * z), with one phase reference per leading index.
    """
    if detector is Detector.NONCOHERENT:
        power = np.abs(z) ** 2
        return power[..., 1] > power[..., 0]
    aligned = (z * np.exp(-1j * np.asarray(phase_reference, dtype=float))[..., None]).real
    return aligned[..., 1] > aligned[..., 0]


def _branch_outputs(rx: SampledSignal, branch0: SampledSignal, branch1: SampledSignal) -> np.ndarray:
    return np.array([_correlate(rx, branch0), _correlate(rx, branch1)])


def detect_noncoherent(rx: SampledSignal, branch0: SampledSignal, branch1: SampledSignal) -> int:
    """Envelope detector: pick the branch with the larger |<rx, branch>|^2."""
    return int(decide(_branch_outputs(rx, branch0, branch1), Detector.NONCOHERENT))


def detect_coherent(
    rx: SampledSignal,
    branch0: SampledSignal,
    branch1: SampledSignal,
    phase_reference: float = 0.0,
) -> int:
    """Coherent detector: pick the branch with the larger Re(exp(-j*phase_reference) * <rx, branch>)."""
    return int(decide(_branch_outputs(rx, branch0, branch1), Detector.COHERENT, phase_reference))


def _awgn(rng: np.random.Generator, shape: tuple[int, ...], n0: float, dt: float) -> np.ndarray:
    std = math.sqrt(n0 / dt)
    return std * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def _check_noise_density(n0: float) -> None:
    if not (math.isfinite(n0) and n0 >= 0):
        raise DomainError(f"Noise density must be finite and non-negative, got {n0}")


def _check_symbols(scenario: Scenario, symbols: Sequence[int]) -> list[int]:
    symbols = [int(s) for s in symbols]
    if len(symbols) != scenario.n_users:
        raise DomainError(f"Expected one symbol per user ({scenario.n_users}), got {len(symbols)}")
    if any(s not in (0, 1) for s in symbols):
        raise DomainError("Symbols must be 0 or 1")
    return symbols


def _transmitted(scenario: Scenario, user: int, bit: int) -> SampledSignal:
    params = scenario.chirp.with_amplitude(scenario.amplitude(user))
    symbol = sample_symbol(params, scenario.law, user, bit, scenario.samples_per_symbol)
    return apply_offset(symbol, scenario.offsets[user])


def synthesize_rx(
    scenario: Scenario,
    symbols: Sequence[int],
    n0: float,
    rng_seed: int | np.random.Generator | None,
    *,
    receiver_phase: float = 0.0,
) -> SampledSignal:
    """
    Received waveform for one symbol per user.

    Args:
        scenario: Link scenario
        symbols: One bit per user, in user order
        n0: Noise density (0 for a noiseless waveform)
        rng_seed: Seed or generator for the noise
        receiver_phase: Common phase rotation applied to every user

    Raises:
        DomainError: On an invalid symbol vector or noise density
    """
    symbols = _check_symbols(scenario, symbols)
    _check_noise_density(n0)
    rng = np.random.default_rng(rng_seed)

    rx = np.zeros(scenario.samples_per_symbol, dtype=complex)
    for user, bit in enumerate(symbols):
        rx += _transmitted(scenario, user, bit).samples
    rx *= np.exp(1j * receiver_phase)
    if n0 > 0:
        rx += _awgn(rng, rx.shape, n0, scenario.dt)
    return SampledSignal(rx, scenario.dt)


def victim_references(scenario: Scenario) -> tuple[SampledSignal, SampledSignal]:
    """The victim's unit-amplitude bit-0 and bit-1 references."""
    unit = scenario.chirp.with_amplitude(1.0)
    return tuple(
        sample_symbol(unit, scenario.law, scenario.victim_user, bit, scenario.samples_per_symbol)
        for bit in (0, 1)
    )


def sample_correlator_noise(
    n0: float,
    trials: int,
    samples_per_symbol: int,
    symbol_duration: float = 1.0,
    rng: int | np.random.Generator | None = None,
) -> np.ndarray:
    """
    Correlator outputs for noise-only inputs.

    Uses the simulator's noise generator against a unit-amplitude reference
    of duration T; each output has variance N0*T per real dimension.
    """
    _check_noise_density(n0)
    params = ChirpParams(n_users=1, symbol_duration=symbol_duration, amplitude=1.0)
    reference = sample_symbol(params, LINEAR, 0, 0, samples_per_symbol)
    noise = _awgn(np.random.default_rng(rng), (trials, samples_per_symbol), n0, reference.dt)
    return noise @ np.conj(reference.samples) * reference.dt


class _LinkModel:
    """Precomputed waveforms of a scenario, shared read-only by all partitions."""

    def __init__(self, scenario: Scenario):
        self.n_users = scenario.n_users
        self.victim = scenario.victim_user
        self.victim_theta = scenario.victim_offset.theta
        self.uniform_phase = scenario.phase_model == "uniform"
        self.dt = scenario.dt
        self.victim_energy = scenario.victim_offset.symbol_energy
        self.waveforms = np.array(
            [[_transmitted(scenario, j, d).samples for d in (0, 1)] for j in range(self.n_users)]
        )
        self.references = np.array([ref.samples for ref in victim_references(scenario)])

    def count_errors(
        self, rng: np.random.Generator, trials: int, n0: float, detector: Detector
    ) -> int:
        symbols = rng.integers(0, 2, size=(trials, self.n_users))
        if self.uniform_phase:
            phases = rng.uniform(0.0, 2 * math.pi, size=trials)
        else:
            phases = np.zeros(trials)

        rx = np.zeros((trials, self.waveforms.shape[-1]), dtype=complex)
        for j in range(self.n_users):
            rx += self.waveforms[j][symbols[:, j]]
        rx *= np.exp(1j * phases)[:, None]
        if n0 > 0:
            rx += _awgn(rng, rx.shape, n0, self.dt)

        z = rx @ self.references.conj().T * self.dt
        decisions = decide(z, detector, phases + self.victim_theta)
        return int(np.count_nonzero(decisions != symbols[:, self.victim].astype(bool)))


def _simulate_partition(
    model: _LinkModel,
    seed_sequence: np.random.SeedSequence,
    n0: float,
    detector: Detector,
    min_errors: int,
    max_bits: int,
    batch_size: int,
) -> tuple[int, int]:
    rng = np.random.default_rng(seed_sequence)
    errors = 0
    bits = 0
    while errors < min_errors and bits < max_bits:
        trials = min(batch_size, max_bits - bits)
        errors += model.count_errors(rng, trials, n0, detector)
        bits += trials
    return errors, bits


def _partition_budgets(stop: StopRule, partitions: int) -> list[tuple[int, int]]:
    """Per-partition (min_errors, max_bits) shares; the bit shares sum to max_bits."""
    min_share = math.ceil(stop.min_errors / partitions)
    base, extra = divmod(stop.max_bits, partitions)
    return [(min_share, base + (1 if p < extra else 0)) for p in range(partitions)]


async def estimate_ber_async(
    scenario: Scenario,
    detector: Detector | str,
    snr_grid: Sequence[float],
    stop: StopRule | None = None,
    seed: int = 0,
    *,
    partitions: int | None = None,
    max_workers: int | None = None,
    batch_size: int | None = None,
) -> list[BerEstimate]:
    """
    Estimate the victim's BER at every Es/N0 point.

    Args:
        scenario: Link scenario
        detector: "coherent" or "noncoherent"
        snr_grid: Victim Es/N0 values (linear; inf simulates a noiseless link)
        stop: Stop rule (default from config)
        seed: Non-negative master seed
        partitions: Seeded partitions per point (default from config)
        max_workers: Partitions simulated concurrently (default from config)
        batch_size: Trials per vectorised batch (default from config)

    Returns:
        One BerEstimate per grid point, in grid order

    Raises:
        DomainError: On an invalid detector, seed, grid point or execution setting
    """
    cfg = get_config()
    try:
        detector = Detector(detector)
    except ValueError:
        raise DomainError(
            f"Unknown detector '{detector}'. Choose one of: {', '.join(d.value for d in Detector)}"
        ) from None
    if seed < 0:
        raise DomainError(f"seed must be non-negative, got {seed}")
    stop = stop or StopRule.from_config(cfg)
    partitions = partitions or cfg.mc_partitions
    max_workers = max_workers or cfg.mc_max_workers
    batch_size = batch_size or cfg.mc_batch_size
    if partitions < 1 or max_workers < 1 or batch_size < 1:
        raise DomainError("partitions, max_workers and batch_size must be positive")

    model = _LinkModel(scenario)
    budgets = _partition_budgets(stop, partitions)

    # Semaphore to bound the number of partitions running in worker threads
    semaphore = asyncio.Semaphore(max_workers)

    async def run_partition(
        sequence: np.random.SeedSequence, n0: float, budget: tuple[int, int]
    ) -> tuple[int, int]:
        async with semaphore:
            return await asyncio.to_thread(
                _simulate_partition, model, sequence, n0, detector, *budget, batch_size
            )

    estimates = []
    for index, es_over_n0 in enumerate(snr_grid):
        es_over_n0 = float(es_over_n0)
        if math.isnan(es_over_n0) or es_over_n0 <= 0:
            raise DomainError(f"Es/N0 must be positive, got {es_over_n0}")
        n0 = model.victim_energy / es_over_n0
        sequences = np.random.SeedSequence([seed, index]).spawn(partitions)

        results = await asyncio.gather(
            *[run_partition(seq, n0, budget) for seq, budget in zip(sequences, budgets, strict=True)],
            return_exceptions=True,
        )

        failures = [r for r in results if isinstance(r, BaseException)]
        for failure in failures:
            logger.error(f"Monte Carlo partition failed at Es/N0={es_over_n0}: {failure!r}")
        if failures:
            raise failures[0]

        errors = sum(r[0] for r in results)
        bits = sum(r[1] for r in results)
        reason = "min_errors" if errors >= stop.min_errors else "max_bits"
        estimate = BerEstimate(
            es_over_n0=es_over_n0, errors=errors, bits=bits, seed=seed, stop_reason=reason
        )
        estimates.append(estimate)

        logger.info(
            f"{detector.value} Es/N0={es_over_n0:.4g}: {errors} errors in {bits} bits "
            f"(BER {estimate.ber:.3e} +/- {estimate.ci95_halfwidth:.1e})"
        )
        if reason == "max_bits":
            logger.warning(
                f"Stop rule not met at Es/N0={es_over_n0:.4g}: {errors} < {stop.min_errors} "
                f"errors after {bits} bits"
            )

    return estimates


def estimate_ber(
    scenario: Scenario,
    detector: Detector | str,
    snr_grid: Sequence[float],
    stop: StopRule | None = None,
    seed: int = 0,
    **kwargs,
) -> list[BerEstimate]:
    """Synchronous wrapper around estimate_ber_async."""
    return asyncio.run(estimate_ber_async(scenario, detector, snr_grid, stop, seed, **kwargs))
