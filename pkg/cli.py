"""
Command-line entry point.

    chirpmai corr-sweep   --config sweep.json --out sweep.csv
    chirpmai ber-analytic --config ber.json --format json
    chirpmai ber-mc       --config mc.json --seed 7 --threads 4
    chirpmai corr-hist    --config hist.json

Run settings come from the JSON document given with --config (keys are
RunConfig fields); --seed, --out, --format and --threads override it.
Execution and numerical tuning come from CHIRPMAI_* environment variables
(a .env file is honoured).

Exit status: 0 on success, 2 for invalid configuration or parameters, 1 for
any other failure.
"""

import argparse
import asyncio
import json
import logging
import sys
from collections.abc import Awaitable, Callable, Sequence
from pathlib import Path
from typing import Any

from dotenv import load_dotenv

from config import VERSION, Config, get_config
from errors import DomainError
from handlers.ber_analytic import cmd_ber_analytic
from handlers.ber_mc import cmd_ber_mc
from handlers.corr_hist import cmd_corr_hist
from handlers.corr_sweep import cmd_corr_sweep
from handlers.validators import COMMANDS, RunConfig, load_run_config
from utils.logging_config import configure_logging
from utils.output import OUTPUT_FORMATS, ResultTable, write_table
from waveform import load_phase_law

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_INVALID = 2

HANDLERS: dict[str, Callable[[RunConfig], Awaitable[ResultTable]]] = {
    "corr-sweep": cmd_corr_sweep,
    "ber-analytic": cmd_ber_analytic,
    "ber-mc": cmd_ber_mc,
    "corr-hist": cmd_corr_hist,
}

_HELP = {
    "corr-sweep": "cross-correlation of user pairs versus normalised Doppler",
    "ber-analytic": "analytic BER curves for the configured formula variants",
    "ber-mc": "Monte Carlo BER of the victim user",
    "corr-hist": "histogram of |rho| over all user pairs and Doppler points",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="chirpmai",
        description="Multi-user binary chirp spread spectrum correlation and BER toolkit",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {VERSION}")
    subparsers = parser.add_subparsers(dest="command", required=True)
    for command in COMMANDS:
        sub = subparsers.add_parser(command, help=_HELP[command])
        sub.add_argument("--config", type=Path, help="JSON run configuration")
        sub.add_argument("--seed", type=int, help="master seed (ber-mc)")
        sub.add_argument("--out", help="output path (default: stdout)")
        sub.add_argument("--format", choices=OUTPUT_FORMATS, help="output format (default: csv)")
        sub.add_argument("--threads", type=int, help="concurrent Monte Carlo partitions")
        sub.add_argument("--log-level", help="override CHIRPMAI_LOG_LEVEL")
    return parser


def validate_environment(cfg: Config) -> list[str]:
    """
    Check the environment-derived settings.

    Returns:
        Names of invalid settings (empty if all are usable)
    """
    positive = {
        "CHIRPMAI_SAMPLES_PER_USER": cfg.samples_per_user,
        "CHIRPMAI_MC_MIN_ERRORS": cfg.mc_min_errors,
        "CHIRPMAI_MC_MAX_BITS": cfg.mc_max_bits,
        "CHIRPMAI_MC_BATCH_SIZE": cfg.mc_batch_size,
        "CHIRPMAI_MC_PARTITIONS": cfg.mc_partitions,
        "CHIRPMAI_MC_MAX_WORKERS": cfg.mc_max_workers,
        "CHIRPMAI_MAX_PATTERN_USERS": cfg.max_pattern_users,
        "CHIRPMAI_PATTERN_CHUNK_SIZE": cfg.pattern_chunk_size,
        "CHIRPMAI_HIST_DOPPLER_POINTS": cfg.hist_doppler_points,
        "CHIRPMAI_HIST_BINS": cfg.hist_bins,
        "CHIRPMAI_QUAD_ABS_TOL": cfg.quad_abs_tol,
        "CHIRPMAI_QUAD_REL_TOL": cfg.quad_rel_tol,
    }
    invalid = [name for name, value in positive.items() if not value > 0]
    if cfg.quad_max_subdiv < 64:
        invalid.append("CHIRPMAI_QUAD_MAX_SUBDIV")
    return invalid


def read_run_document(path: Path | None) -> dict[str, Any]:
    """
    Parse the JSON run configuration (empty when no path is given).

    Raises:
        OSError: If the file cannot be read
        ValueError: If it is not valid JSON
    """
    if path is None:
        return {}
    return json.loads(path.read_text(encoding="utf-8"))


def main(argv: Sequence[str] | None = None) -> int:
    """Parse arguments, run one command and write its artifact."""
    load_dotenv()
    args = build_parser().parse_args(argv)

    cfg = get_config()
    configure_logging(cfg, args.log_level)

    invalid = validate_environment(cfg)
    if invalid:
        logger.error(f"Invalid environment settings: {', '.join(invalid)}")
        return EXIT_INVALID

    try:
        document = read_run_document(args.config)
    except (OSError, ValueError) as e:
        logger.error(f"Cannot read run configuration {args.config}: {e}")
        return EXIT_INVALID

    overrides = {"seed": args.seed, "out": args.out, "format": args.format, "threads": args.threads}
    run, errors = load_run_config(args.command, document, overrides)
    if errors:
        for error in errors:
            logger.error(f"Invalid run configuration: {error}")
        return EXIT_INVALID

    logger.info(f"Running {run.command} (chirpmai {VERSION})")
    try:
        for family, target in run.phase_laws.items():
            load_phase_law(family, target)
        table = asyncio.run(HANDLERS[run.command](run))
    except DomainError as e:
        logger.error(f"{run.command} rejected its parameters: {e}")
        return EXIT_INVALID
    except Exception:
        logger.exception(f"{run.command} failed")
        return EXIT_FAILURE

    table.metadata["version"] = VERSION
    table.metadata["command"] = run.command
    table.metadata["config"] = run.to_metadata()
    table.metadata.setdefault("seed", run.seed)

    try:
        write_table(table, run.out, run.format)
    except OSError as e:
        logger.error(f"Cannot write output {run.out}: {e}")
        return EXIT_FAILURE
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
