"""
Run configuration parsing and validation for the command-line handlers.

A run is described by a JSON document whose keys are RunConfig fields.
Precedence: RunConfig defaults < JSON document < command-line flags.

Each validate_* function returns a tuple (is_valid, value, error_message) so
that load_run_config() can report every problem of a document at once.
"""

import math
from dataclasses import asdict, dataclass, field, fields
from typing import Any

import numpy as np

from utils.output import OUTPUT_FORMATS
from waveform import ChirpParams, UserOffset

COMMANDS = ("corr-sweep", "ber-analytic", "ber-mc", "corr-hist")

ANALYTIC_VARIANTS = (
    "coherent",
    "coherent-derived",
    "nc-single",
    "nc-twouser",
    "nc-twouser-printed",
    "nc-paper",
    "nc-paper-printed",
    "nc-derived",
)
DETECTORS = ("coherent", "noncoherent")
PHASE_MODELS = ("uniform", "fixed")
INTERFERER_TAILS = ("truncate", "repeat")
CORRELATION_METHODS = ("auto", "closed", "numeric")

MAX_SEED = 2**64 - 1


@dataclass(frozen=True)
class RunConfig:
    """
    Everything one command needs. Delays are fractions of the symbol duration T
    and Doppler values use the normalised axis nu = delta_f*T/N.
    """

    command: str
    # Signal set
    n_users: int = 2
    symbol_duration: float = 1.0
    amplitude: float = math.sqrt(2.0)
    family: str = "linear"
    phase_laws: dict[str, str] = field(default_factory=dict)
    samples_per_user: int | None = None
    # Correlation sweeps
    pairs: tuple[tuple[int, int], ...] = ()
    epsilons: tuple[float, ...] = (0.0,)
    nu_start: float = 0.0
    nu_stop: float = 1.0
    nu_points: int = 201
    interferer_tail: str = "truncate"
    # Histograms
    families: tuple[str, ...] = ()
    hist_points: int | None = None
    hist_bins: int | None = None
    # BER scenario
    ebn0_db: tuple[float, ...] = (0.0, 2.0, 4.0, 6.0, 8.0, 10.0, 12.0)
    variants: tuple[str, ...] = ("coherent", "nc-single", "nc-paper", "nc-derived")
    victim_user: int = 0
    interferer_epsilon: float = 0.0
    interferer_nu: float = 0.0
    # Per-user {"epsilon", "nu", "theta"} objects; empty means the shared values above
    offsets: tuple[dict[str, float], ...] = ()
    symbol_energies: tuple[float, ...] = ()
    # "numeric" correlates the same sampled waveforms ber-mc transmits
    correlation_method: str = "numeric"
    # Monte Carlo
    detector: str = "noncoherent"
    phase_model: str = "uniform"
    min_errors: int | None = None
    max_bits: int | None = None
    partitions: int | None = None
    threads: int | None = None
    seed: int | None = None
    # Output
    out: str | None = None
    format: str = "csv"

    def chirp_params(self) -> ChirpParams:
        return ChirpParams(
            n_users=self.n_users, symbol_duration=self.symbol_duration, amplitude=self.amplitude
        )

    def user_offsets(self) -> tuple[UserOffset, ...] | None:
        """Per-user offsets in seconds and Hz, or None when the interferers share one offset."""
        if not self.offsets:
            return None
        return tuple(
            UserOffset(
                epsilon=off.get("epsilon", 0.0) * self.symbol_duration,
                delta_f=off.get("nu", 0.0) * self.n_users / self.symbol_duration,
                theta=off.get("theta", 0.0),
            )
            for off in self.offsets
        )

    def doppler_grid(self) -> np.ndarray:
        """Normalised Doppler values nu."""
        return np.linspace(self.nu_start, self.nu_stop, self.nu_points)

    def ordered_pairs(self) -> tuple[tuple[int, int], ...]:
        """Configured pairs, or every ordered (m, k) with m != k."""
        if self.pairs:
            return self.pairs
        return tuple((m, k) for m in range(self.n_users) for k in range(self.n_users) if m != k)

    def to_metadata(self) -> dict[str, Any]:
        """All fields as JSON-compatible values."""
        values = asdict(self)
        values["pairs"] = [list(p) for p in self.pairs]
        return {k: list(v) if isinstance(v, tuple) else v for k, v in values.items()}


RUN_CONFIG_KEYS = frozenset(f.name for f in fields(RunConfig))


def _is_number(value: Any) -> bool:
    return isinstance(value, int | float) and not isinstance(value, bool)


def validate_choice(
    value: Any, name: str, choices: tuple[str, ...]
) -> tuple[bool, str | None, str | None]:
    """
    Validate that a value is one of a fixed set of strings.

    Returns:
        Tuple of (is_valid, value, error_message)
    """
    if value not in choices:
        return False, None, f"{name} must be one of {', '.join(choices)}, got {value!r}"
    return True, value, None


def validate_int(
    value: Any, name: str, minimum: int = 1, maximum: int | None = None
) -> tuple[bool, int | None, str | None]:
    """
    Validate an integer within [minimum, maximum].

    Returns:
        Tuple of (is_valid, value, error_message)
    """
    if isinstance(value, bool) or not isinstance(value, int):
        return False, None, f"{name} must be an integer, got {value!r}"
    if value < minimum:
        return False, None, f"{name} must be at least {minimum}, got {value}"
    if maximum is not None and value > maximum:
        return False, None, f"{name} must be at most {maximum}, got {value}"
    return True, value, None


def validate_float(
    value: Any, name: str, minimum: float | None = None, *, strict: bool = False
) -> tuple[bool, float | None, str | None]:
    """
    Validate a finite number, optionally bounded below (strictly when strict=True).

    Returns:
        Tuple of (is_valid, value, error_message)
    """
    if not _is_number(value) or not math.isfinite(value):
        return False, None, f"{name} must be a finite number, got {value!r}"
    if minimum is not None and (value <= minimum if strict else value < minimum):
        relation = "greater than" if strict else "at least"
        return False, None, f"{name} must be {relation} {minimum}, got {value}"
    return True, float(value), None


def validate_grid(
    values: Any, name: str, *, allow_infinite: bool = False
) -> tuple[bool, tuple[float, ...] | None, str | None]:
    """
    Validate a non-empty list of numbers.

    Args:
        values: Candidate list
        name: Field name used in the error message
        allow_infinite: Accept +inf entries (noise-free Monte Carlo points)

    Returns:
        Tuple of (is_valid, grid, error_message)
    """
    if isinstance(values, str) or not isinstance(values, list | tuple) or not values:
        return False, None, f"{name} must be a non-empty list of numbers"
    grid = []
    for value in values:
        if not _is_number(value) or math.isnan(value):
            return False, None, f"{name} contains a non-numeric value {value!r}"
        if math.isinf(value) and not (allow_infinite and value > 0):
            return False, None, f"{name} contains a non-finite value {value!r}"
        grid.append(float(value))
    return True, tuple(grid), None


def validate_epsilons(values: Any) -> tuple[bool, tuple[float, ...] | None, str | None]:
    """
    Validate delays given as fractions of T, each in [0, 1).

    Returns:
        Tuple of (is_valid, delays, error_message)
    """
    is_valid, grid, error = validate_grid(values, "epsilons")
    if not is_valid:
        return is_valid, grid, error
    for eps in grid:
        if not 0 <= eps < 1:
            return False, None, f"epsilons must lie in [0, 1) (fractions of T), got {eps}"
    return True, grid, None


def validate_pairs(
    values: Any, n_users: int
) -> tuple[bool, tuple[tuple[int, int], ...] | None, str | None]:
    """
    Validate a list of [m, k] user pairs for an N-user set.

    Returns:
        Tuple of (is_valid, pairs, error_message)
    """
    if not isinstance(values, list | tuple):
        return False, None, "pairs must be a list of [m, k] pairs"
    pairs = []
    for pair in values:
        if (
            not isinstance(pair, list | tuple)
            or len(pair) != 2
            or not all(isinstance(u, int) and not isinstance(u, bool) for u in pair)
        ):
            return False, None, f"Invalid pair {pair!r}; expected [m, k]"
        m, k = pair
        if not (0 <= m < n_users and 0 <= k < n_users):
            return False, None, f"Pair {pair!r} out of range for N={n_users}"
        pairs.append((m, k))
    return True, tuple(pairs), None


OFFSET_KEYS = ("epsilon", "nu", "theta")


def validate_offsets(
    values: Any, n_users: int
) -> tuple[bool, tuple[dict[str, float], ...] | None, str | None]:
    """
    Validate one {"epsilon", "nu", "theta"} object per user.

    epsilon is a fraction of T in [0, 1), nu a normalised Doppler shift and theta
    a phase in radians; missing keys default to 0.

    Returns:
        Tuple of (is_valid, offsets, error_message)
    """
    if not isinstance(values, list | tuple) or len(values) != n_users:
        return False, None, f"offsets must list one object per user ({n_users})"
    offsets = []
    for user, off in enumerate(values):
        if not isinstance(off, dict):
            return False, None, f"offsets[{user}] must be an object"
        unknown = sorted(set(off) - set(OFFSET_KEYS))
        if unknown:
            return False, None, f"offsets[{user}] has unknown keys: {', '.join(unknown)}"
        cleaned = {}
        for key, value in off.items():
            if key == "epsilon":
                is_valid, eps, error = validate_epsilons([value])
                value = eps[0] if is_valid else None
            else:
                is_valid, value, error = validate_float(value, key)
            if not is_valid:
                return False, None, f"offsets[{user}]: {error}"
            cleaned[key] = value
        offsets.append(cleaned)
    return True, tuple(offsets), None


def validate_symbol_energies(
    values: Any, n_users: int
) -> tuple[bool, tuple[float, ...] | None, str | None]:
    """
    Validate one positive symbol energy per user.

    Returns:
        Tuple of (is_valid, energies, error_message)
    """
    is_valid, grid, error = validate_grid(values, "symbol_energies")
    if not is_valid:
        return is_valid, grid, error
    if len(grid) != n_users:
        return False, None, f"symbol_energies must list one value per user ({n_users})"
    if any(e <= 0 for e in grid):
        return False, None, "symbol_energies must be positive"
    return True, grid, None


def validate_phase_laws(values: Any) -> tuple[bool, dict[str, str] | None, str | None]:
    """
    Validate a mapping of chirp family name to "module:attribute" reference.

    Returns:
        Tuple of (is_valid, mapping, error_message)
    """
    if not isinstance(values, dict):
        return False, None, "phase_laws must map family names to 'module:attribute' strings"
    for family, target in values.items():
        if not isinstance(target, str) or ":" not in target:
            return False, None, f"phase_laws['{family}'] must look like 'module:attribute'"
    return True, dict(values), None


def _validate_field(name: str, value: Any, n_users: int) -> tuple[bool, Any, str | None]:
    if name == "command":
        return validate_choice(value, name, COMMANDS)
    if name in ("n_users",):
        return validate_int(value, name)
    if name in ("nu_points", "hist_points", "hist_bins", "samples_per_user"):
        return validate_int(value, name, minimum=1)
    if name in ("min_errors", "max_bits", "partitions", "threads"):
        return validate_int(value, name, minimum=1)
    if name == "victim_user":
        return validate_int(value, name, minimum=0, maximum=n_users - 1)
    if name == "seed":
        return validate_int(value, name, minimum=0, maximum=MAX_SEED)
    if name in ("symbol_duration", "amplitude"):
        return validate_float(value, name, 0.0, strict=True)
    if name in ("nu_start", "nu_stop", "interferer_nu"):
        return validate_float(value, name)
    if name == "interferer_epsilon":
        is_valid, eps, error = validate_epsilons([value])
        return is_valid, (eps[0] if eps else None), error
    if name == "epsilons":
        return validate_epsilons(value)
    if name == "ebn0_db":
        return validate_grid(value, name, allow_infinite=True)
    if name == "pairs":
        return validate_pairs(value, n_users)
    if name == "offsets":
        return validate_offsets(value, n_users)
    if name == "symbol_energies":
        return validate_symbol_energies(value, n_users)
    if name == "variants":
        if not isinstance(value, list | tuple) or not value:
            return False, None, "variants must be a non-empty list"
        for variant in value:
            is_valid, _, error = validate_choice(variant, "variants", ANALYTIC_VARIANTS)
            if not is_valid:
                return False, None, error
        return True, tuple(value), None
    if name == "families":
        if not isinstance(value, list | tuple) or not all(isinstance(f, str) for f in value):
            return False, None, "families must be a list of family names"
        return True, tuple(value), None
    if name == "family":
        if not isinstance(value, str) or not value:
            return False, None, "family must be a non-empty string"
        return True, value, None
    if name == "phase_laws":
        return validate_phase_laws(value)
    if name == "detector":
        return validate_choice(value, name, DETECTORS)
    if name == "phase_model":
        return validate_choice(value, name, PHASE_MODELS)
    if name == "interferer_tail":
        return validate_choice(value, name, INTERFERER_TAILS)
    if name == "correlation_method":
        return validate_choice(value, name, CORRELATION_METHODS)
    if name == "format":
        return validate_choice(value, name, OUTPUT_FORMATS)
    if name == "out":
        if not isinstance(value, str) or not value:
            return False, None, "out must be a non-empty path"
        return True, value, None
    return False, None, f"Unknown configuration key '{name}'"


def load_run_config(
    command: str, document: dict[str, Any], overrides: dict[str, Any] | None = None
) -> tuple[RunConfig | None, list[str]]:
    """
    Merge and validate a run configuration.

    Args:
        command: Sub-command name
        document: Parsed JSON configuration (may be empty)
        overrides: Values from command-line flags (None values are ignored)

    Returns:
        Tuple of (run_config, errors): run_config is None whenever errors is non-empty
    """
    if not isinstance(document, dict):
        return None, ["Configuration document must be a JSON object"]

    merged: dict[str, Any] = dict(document)
    merged.update({k: v for k, v in (overrides or {}).items() if v is not None})
    if merged.get("command", command) != command:
        return None, [f"Configuration is for '{merged['command']}', not '{command}'"]
    merged["command"] = command

    errors = [f"Unknown configuration key '{k}'" for k in sorted(set(merged) - RUN_CONFIG_KEYS)]

    n_users = merged.get("n_users", RunConfig.n_users)
    is_valid, n_users, error = validate_int(n_users, "n_users")
    if not is_valid:
        return None, [*errors, error]

    cleaned: dict[str, Any] = {}
    for name in sorted(set(merged) & RUN_CONFIG_KEYS):
        is_valid, value, error = _validate_field(name, merged[name], n_users)
        if is_valid:
            cleaned[name] = value
        else:
            errors.append(error)

    nu_start = cleaned.get("nu_start", RunConfig.nu_start)
    nu_stop = cleaned.get("nu_stop", RunConfig.nu_stop)
    if nu_stop < nu_start:
        errors.append(f"nu_stop ({nu_stop}) must not be below nu_start ({nu_start})")

    if errors:
        return None, errors
    return RunConfig(**cleaned), []
