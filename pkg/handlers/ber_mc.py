"""Handler for the ber-mc command."""

import logging
import math

import numpy as np

import ber
import mc
from config import get_config
from errors import DomainError
from handlers.ber_analytic import build_run_scenario
from handlers.validators import MAX_SEED, RunConfig
from utils.output import ResultTable
from xcorr import BranchCorrelations, branch_correlations

logger = logging.getLogger(__name__)

COLUMNS = ["EbN0_dB", "ber", "errors", "bits", "ci95", "stop_reason", "analytic"]


def new_seed() -> int:
    """Fresh master seed drawn from OS entropy."""
    return int(np.random.SeedSequence().entropy % (MAX_SEED + 1))


def _analytic(branches: BranchCorrelations, detector: mc.Detector, es_over_n0: float) -> float | None:
    if not math.isfinite(es_over_n0):
        return None
    if detector is mc.Detector.COHERENT:
        return ber.ber_coherent_derived(branches, es_over_n0)
    return ber.ber_nc_nuser_derived(branches, es_over_n0)


async def cmd_ber_mc(run: RunConfig) -> ResultTable:
    """
    Simulate the victim's BER over the Eb/N0 grid.

    An Eb/N0 of +inf simulates a noiseless link. The analytic column holds the
    derived formula of the chosen detector, evaluated on correlations of the same
    sampled waveforms the simulator transmits.

    Args:
        run: Validated run configuration; a missing seed is drawn and recorded

    Returns:
        ResultTable with one row per grid point; points that hit max_bits before
        min_errors are listed under the "warnings" metadata key
    """
    cfg = get_config()
    seed = run.seed if run.seed is not None else new_seed()
    detector = mc.Detector(run.detector)
    stop = mc.StopRule(
        min_errors=run.min_errors or cfg.mc_min_errors,
        max_bits=run.max_bits or cfg.mc_max_bits,
    )
    scenario = build_run_scenario(run)
    snr_grid = [math.inf if math.isinf(db) else ber.db_to_linear(db) for db in run.ebn0_db]

    logger.info(
        f"ber-mc: N={run.n_users} detector={detector.value} points={len(snr_grid)} seed={seed}"
    )
    estimates = await mc.estimate_ber_async(
        scenario,
        detector,
        snr_grid,
        stop,
        seed,
        partitions=run.partitions,
        max_workers=run.threads,
    )

    warnings = []
    try:
        branches = branch_correlations(scenario, "numeric")
    except DomainError as e:
        logger.warning(f"Analytic column unavailable: {e}")
        warnings.append(f"analytic column unavailable: {e}")
        branches = None

    table = ResultTable(columns=list(COLUMNS))
    for db, estimate in zip(run.ebn0_db, estimates, strict=True):
        analytic = None
        if branches is not None:
            try:
                analytic = _analytic(branches, detector, estimate.es_over_n0)
            except DomainError as e:
                logger.warning(f"Analytic value at {db} dB unavailable: {e}")
                warnings.append(f"analytic value at {db} dB unavailable: {e}")
        if estimate.stop_reason == "max_bits":
            warnings.append(
                f"stop rule not met at {db} dB: {estimate.errors} < {stop.min_errors} errors "
                f"after {estimate.bits} bits"
            )
        table.add_row(
            db,
            estimate.ber,
            estimate.errors,
            estimate.bits,
            estimate.ci95_halfwidth,
            estimate.stop_reason,
            analytic,
        )

    table.metadata["seed"] = seed
    table.metadata["samples_per_symbol"] = scenario.samples_per_symbol
    if warnings:
        table.metadata["warnings"] = warnings
    return table
