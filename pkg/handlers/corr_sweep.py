"""Handler for the corr-sweep command."""

import logging

import numpy as np

import xcorr
from handlers.validators import RunConfig
from scenario import grid_samples_per_symbol
from utils.output import ResultTable
from waveform import get_phase_law

logger = logging.getLogger(__name__)

COLUMNS = [
    "m",
    "k",
    "epsilon",
    "nu",
    "abs",
    "re",
    "im",
    "analytic_abs",
    "analytic_re",
    "analytic_im",
    "numeric_abs",
    "numeric_re",
    "numeric_im",
]


def _parts(value: complex | None) -> tuple[float | None, float | None, float | None]:
    if value is None:
        return None, None, None
    return abs(value), value.real, value.imag


async def cmd_corr_sweep(run: RunConfig) -> ResultTable:
    """
    Sweep the cross-correlation of user pairs over normalised Doppler.

    For every (m, k) pair and every delay, user m (shifted by delta_f = nu*N/T and
    delayed by epsilon*T) is correlated with user k's reference, both sending bit 0.
    The closed form is reported for the linear family; the sampled correlation
    for every family. abs/re/im repeat the closed form when present, else the
    numeric value.

    Args:
        run: Validated run configuration

    Returns:
        ResultTable with one row per (pair, epsilon, nu)

    Raises:
        DomainError: On an unknown family, bad pair or unrepresentable delay
    """
    params = run.chirp_params()
    law = get_phase_law(run.family)
    T = params.symbol_duration  # noqa: N806
    pairs = run.ordered_pairs()
    nu = run.doppler_grid()
    delta_f = nu * params.n_users / T
    delays = [eps * T for eps in run.epsilons]
    samples_per_symbol = grid_samples_per_symbol(
        params.n_users, delays, T, run.samples_per_user
    )
    previous_bit = 0 if run.interferer_tail == "repeat" else None
    closed = run.family == "linear"

    logger.info(
        f"corr-sweep: family={run.family} N={params.n_users} pairs={len(pairs)} "
        f"delays={len(delays)} points={len(nu)} samples_per_symbol={samples_per_symbol}"
    )

    table = ResultTable(columns=list(COLUMNS))
    for eps, delay in zip(run.epsilons, delays, strict=True):
        numeric = xcorr.numeric_pair_sweep(
            params, law, pairs, delta_f, delay, samples_per_symbol, previous_bit=previous_bit
        )
        for row, (m, k) in enumerate(pairs):
            analytic = (
                np.atleast_1d(
                    xcorr.linear_correlation(params, m, 0, k, 0, delta_f, delay, previous_bit)
                )
                if closed
                else None
            )
            for i, point in enumerate(nu):
                exact = complex(analytic[i]) if analytic is not None else None
                sampled = complex(numeric[row, i])
                table.add_row(
                    m,
                    k,
                    eps,
                    float(point),
                    *_parts(exact if exact is not None else sampled),
                    *_parts(exact),
                    *_parts(sampled),
                )

    table.metadata["samples_per_symbol"] = samples_per_symbol
    table.metadata["units"] = "epsilon in units of T; nu = delta_f*T/N"
    return table
