"""Handler for the corr-hist command."""

import logging

import numpy as np

import xcorr
from config import get_config
from handlers.validators import RunConfig
from scenario import grid_samples_per_symbol
from utils.output import ResultTable
from waveform import get_phase_law

logger = logging.getLogger(__name__)

COLUMNS = ["family", "bin_lo", "bin_hi", "count"]

# Reference standard deviations of |rho| for N=50, epsilon=0.05T
REFERENCE_STD = {"linear": 0.0714, "sinusoidal": 0.0691, "quartic": 0.0614}

# Pairs correlated per numeric batch
_PAIR_BATCH = 128


def _magnitudes(
    run: RunConfig, family: str, delta_f: np.ndarray, delay: float, samples_per_symbol: int
) -> np.ndarray:
    params = run.chirp_params()
    pairs = run.ordered_pairs()
    if family == "linear":
        rows = [
            np.abs(np.atleast_1d(xcorr.linear_correlation(params, m, 0, k, 0, delta_f, delay)))
            for m, k in pairs
        ]
        return np.concatenate(rows) if rows else np.empty(0)

    law = get_phase_law(family)
    rows = []
    for start in range(0, len(pairs), _PAIR_BATCH):
        batch = pairs[start : start + _PAIR_BATCH]
        rows.append(
            np.abs(xcorr.numeric_pair_sweep(params, law, batch, delta_f, delay, samples_per_symbol))
        )
    return np.concatenate([r.ravel() for r in rows]) if rows else np.empty(0)


async def cmd_corr_hist(run: RunConfig) -> ResultTable:
    """
    Histogram |rho| over every ordered pair (m != k), delay and Doppler grid point.

    Families default to the run's family; the linear family uses the closed form
    and every other family the sampled correlation. The Doppler grid is
    hist_points values of nu spread uniformly over [nu_start, nu_stop].

    Args:
        run: Validated run configuration

    Returns:
        ResultTable with one row per (family, bin); per-family mean, std, max and
        count of |rho| under the "summary" metadata key

    Raises:
        DomainError: On an unknown family (the message lists the available ones)
    """
    cfg = get_config()
    families = run.families or (run.family,)
    for family in families:
        get_phase_law(family)

    T = run.symbol_duration  # noqa: N806
    points = run.hist_points or cfg.hist_doppler_points
    bins = run.hist_bins or cfg.hist_bins
    nu = np.linspace(run.nu_start, run.nu_stop, points)
    delta_f = nu * run.n_users / T
    delays = [eps * T for eps in run.epsilons]
    samples_per_symbol = grid_samples_per_symbol(run.n_users, delays, T, run.samples_per_user)
    edges = np.linspace(0.0, 1.0, bins + 1)

    table = ResultTable(columns=list(COLUMNS))
    summary = {}
    for family in families:
        values = np.concatenate(
            [_magnitudes(run, family, delta_f, delay, samples_per_symbol) for delay in delays]
        )
        counts, _ = np.histogram(np.clip(values, 0.0, 1.0), bins=edges)
        for lo, hi, count in zip(edges[:-1], edges[1:], counts, strict=True):
            table.add_row(family, float(lo), float(hi), int(count))

        stats = {
            "count": int(values.size),
            "max": float(values.max()) if values.size else None,
            "mean": float(values.mean()) if values.size else None,
            "std": float(values.std()) if values.size else None,
        }
        if family in REFERENCE_STD:
            stats["reference_std"] = REFERENCE_STD[family]
        summary[family] = stats
        logger.info(f"corr-hist {family}: {stats}")

    table.metadata["samples_per_symbol"] = samples_per_symbol
    table.metadata["summary"] = summary
    return table
