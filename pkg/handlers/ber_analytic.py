"""Handler for the ber-analytic command."""

import logging
import math
from collections.abc import Callable

import ber
from errors import DomainError, FormulaInconsistencyError
from handlers.validators import RunConfig
from scenario import Scenario, build_scenario
from utils.output import ResultTable
from xcorr import BranchCorrelations, CorrelationVector, branch_correlations

logger = logging.getLogger(__name__)

Formula = Callable[[float], float]


def build_run_scenario(run: RunConfig) -> Scenario:
    """
    Scenario of a BER run.

    Interferers share the configured delay and Doppler unless per-user offsets
    are given; symbol energies default to the chirp's for every user.
    """
    return build_scenario(
        run.n_users,
        epsilon=run.interferer_epsilon * run.symbol_duration,
        nu=run.interferer_nu,
        victim_user=run.victim_user,
        family=run.family,
        symbol_duration=run.symbol_duration,
        amplitude=run.amplitude,
        samples_per_user=run.samples_per_user,
        phase_model=run.phase_model,
        symbol_energies=run.symbol_energies or None,
        offsets=run.user_offsets(),
    )


def _two_user_rho(rho_vec: CorrelationVector) -> complex:
    if len(rho_vec) != 1:
        raise DomainError(f"Two-user formulas need N=2, got N={len(rho_vec) + 1}")
    return complex(rho_vec.scaled()[0])


def _formulas(
    run: RunConfig, branches: BranchCorrelations, rho_vec: CorrelationVector
) -> dict[str, Formula]:
    n = run.n_users
    return {
        "coherent": lambda es: ber.ber_coherent_nuser(rho_vec, es),
        "coherent-derived": lambda es: ber.ber_coherent_derived(branches, es),
        "nc-single": ber.ber_nc_single,
        "nc-twouser": lambda es: ber.ber_nc_twouser(branches, es),
        "nc-twouser-printed": lambda es: ber.ber_nc_twouser(
            _two_user_rho(rho_vec), es, exponent_form="printed"
        ),
        "nc-paper": lambda es: ber.ber_nc_nuser_paper(rho_vec, es, n),
        "nc-paper-printed": lambda es: ber.ber_nc_nuser_paper(rho_vec, es, n, variant="printed"),
        "nc-derived": lambda es: ber.ber_nc_nuser_derived(branches, es),
    }


async def cmd_ber_analytic(run: RunConfig) -> ResultTable:
    """
    Evaluate the analytic BER variants over the Eb/N0 grid.

    Binary symbols make Eb = Es, so EbN0_dB = 10*log10(Es/N0). Correlations are
    taken once from the run scenario. The scalar-correlation variants use the
    correlations of every interferer sending bit 0; nc-twouser and the derived
    variants use the full per-bit tables, so at N = 2 nc-twouser equals nc-derived
    and nc-twouser-printed differs from it by the idealisation as well as the exponent.

    A literal-formula variant that leaves [0, 1] yields an empty cell and a
    "diagnostics" metadata entry instead of failing the run.

    Args:
        run: Validated run configuration

    Returns:
        ResultTable with columns EbN0_dB plus one per requested variant

    Raises:
        DomainError: On a non-finite grid point, a two-user variant with N != 2,
            or N above the exact pattern-sum limit
    """
    for db in run.ebn0_db:
        if not math.isfinite(db):
            raise DomainError(f"ber-analytic needs finite Eb/N0 values, got {db}")

    scenario = build_run_scenario(run)
    branches = branch_correlations(scenario, run.correlation_method)
    rho_vec = branches.correlation_vector([0] * (run.n_users - 1))
    formulas = _formulas(run, branches, rho_vec)

    logger.info(
        f"ber-analytic: N={run.n_users} variants={','.join(run.variants)} "
        f"points={len(run.ebn0_db)}"
    )

    table = ResultTable(columns=["EbN0_dB", *run.variants])
    diagnostics = []
    for db in run.ebn0_db:
        es_over_n0 = ber.db_to_linear(db)
        values = []
        for variant in run.variants:
            try:
                values.append(formulas[variant](es_over_n0))
            except FormulaInconsistencyError as e:
                logger.warning(f"{variant} at {db} dB: {e}")
                diagnostics.append(
                    {
                        "EbN0_dB": db,
                        "message": str(e),
                        "value": e.value,
                        "variant": variant,
                        "xi": e.xi,
                    }
                )
                values.append(None)
        table.add_row(db, *values)

    table.metadata["correlations"] = [
        {"re": c.re, "im": c.im} for c in rho_vec.entries
    ]
    if diagnostics:
        table.metadata["diagnostics"] = diagnostics
    return table
