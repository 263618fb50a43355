"""Centralized configuration management for chirpmai."""

import os
from dataclasses import dataclass

VERSION = "0.1.0"


@dataclass(frozen=True)
class Config:
    """
    Application configuration loaded from environment variables.

    Only execution and numerical tuning lives here. What to compute (users,
    offsets, grids) is described by the run configuration handed to the CLI.
    """

    # Logging
    log_level: str
    log_file: str  # Empty string disables the rotating file handler

    # Special functions
    quad_abs_tol: float
    quad_rel_tol: float
    quad_max_subdiv: int

    # Waveform sampling
    samples_per_user: int  # Default samples per symbol is samples_per_user * N

    # Monte Carlo
    mc_min_errors: int
    mc_max_bits: int
    mc_batch_size: int  # Trials simulated per vectorised batch
    mc_partitions: int  # Independent seeded partitions per SNR point
    mc_max_workers: int  # Partitions running at the same time

    # Analytic BER
    max_pattern_users: int
    pattern_chunk_size: int

    # Correlation histograms
    hist_doppler_points: int
    hist_bins: int

    @classmethod
    def from_env(cls) -> "Config":
        """
        Load configuration from environment variables.

        Returns:
            Config instance with all settings loaded from environment
        """
        return cls(
            # Logging
            log_level=os.getenv("CHIRPMAI_LOG_LEVEL", "INFO"),
            log_file=os.getenv("CHIRPMAI_LOG_FILE", "data/chirpmai.log"),
            # Special functions
            quad_abs_tol=float(os.getenv("CHIRPMAI_QUAD_ABS_TOL", "1e-10")),
            quad_rel_tol=float(os.getenv("CHIRPMAI_QUAD_REL_TOL", "1e-10")),
            quad_max_subdiv=int(os.getenv("CHIRPMAI_QUAD_MAX_SUBDIV", "200")),
            # Waveform sampling
            samples_per_user=int(os.getenv("CHIRPMAI_SAMPLES_PER_USER", "64")),
            # Monte Carlo
            mc_min_errors=int(os.getenv("CHIRPMAI_MC_MIN_ERRORS", "200")),
            mc_max_bits=int(os.getenv("CHIRPMAI_MC_MAX_BITS", "10000000")),
            mc_batch_size=int(os.getenv("CHIRPMAI_MC_BATCH_SIZE", "2048")),
            mc_partitions=int(os.getenv("CHIRPMAI_MC_PARTITIONS", "8")),
            mc_max_workers=int(os.getenv("CHIRPMAI_MC_MAX_WORKERS", "4")),
            # Analytic BER
            max_pattern_users=int(os.getenv("CHIRPMAI_MAX_PATTERN_USERS", "24")),
            pattern_chunk_size=int(os.getenv("CHIRPMAI_PATTERN_CHUNK_SIZE", "65536")),
            # Correlation histograms
            hist_doppler_points=int(os.getenv("CHIRPMAI_HIST_DOPPLER_POINTS", "200")),
            hist_bins=int(os.getenv("CHIRPMAI_HIST_BINS", "50")),
        )


# Cached by get_config()
_config: Config | None = None


def get_config() -> Config:
    """
    Return the process-wide Config, reading the environment on first use.

    Later calls return the cached instance until reset_config() is called.
    """
    global _config
    if _config is None:
        _config = Config.from_env()
    return _config


def reset_config() -> None:
    """Drop the cached Config so the next get_config() re-reads the environment."""
    global _config
    _config = None
