"""Tests for ber-mc handler."""

import math

import pytest

import ber
from handlers.ber_analytic import build_run_scenario
from handlers.ber_mc import COLUMNS, cmd_ber_mc, new_seed
from handlers.validators import MAX_SEED

SMALL_RUN = {"min_errors": 200, "max_bits": 40_000, "partitions": 2, "samples_per_user": 16}


async def test_noiseless_point_has_no_errors(make_run):
    run = make_run(
        "ber-mc",
        n_users=1,
        ebn0_db=[math.inf],
        min_errors=1,
        max_bits=2048,
        partitions=2,
        seed=5,
        samples_per_user=16,
    )
    table = await cmd_ber_mc(run)

    assert table.columns == COLUMNS
    (row,) = table.rows
    values = dict(zip(COLUMNS, row, strict=True))
    assert values["ber"] == 0.0
    assert values["errors"] == 0
    assert values["bits"] == 2048
    assert values["ci95"] == 0.0
    assert values["stop_reason"] == "max_bits"
    assert values["analytic"] is None
    assert table.metadata["seed"] == 5
    assert "stop rule not met" in table.metadata["warnings"][0]


async def test_same_seed_reproduces_table(make_run):
    run = make_run("ber-mc", ebn0_db=[0.0, 4.0], seed=77, **SMALL_RUN)
    first = await cmd_ber_mc(run)
    second = await cmd_ber_mc(run)

    assert first.rows == second.rows
    assert first.metadata == second.metadata


async def test_missing_seed_is_drawn_and_recorded(make_run):
    run = make_run("ber-mc", ebn0_db=[0.0], **SMALL_RUN)
    table = await cmd_ber_mc(run)

    seed = table.metadata["seed"]
    assert isinstance(seed, int)
    assert 0 <= seed <= MAX_SEED


def test_new_seed_range():
    seeds = {new_seed() for _ in range(5)}
    assert all(0 <= s <= MAX_SEED for s in seeds)
    assert len(seeds) > 1


async def test_estimate_tracks_analytic_column(make_run):
    run = make_run("ber-mc", ebn0_db=[0.0], interferer_nu=0.25, seed=3, **SMALL_RUN)
    table = await cmd_ber_mc(run)

    (row,) = table.rows
    values = dict(zip(COLUMNS, row, strict=True))
    expected = ber.ber_nc_nuser_derived(build_run_scenario(run), 1.0, method="numeric")
    assert values["analytic"] == pytest.approx(expected, rel=1e-12)
    assert values["stop_reason"] == "min_errors"
    window = 4 * math.sqrt(expected * (1 - expected) / values["bits"])
    assert abs(values["ber"] - expected) < window


async def test_coherent_detector_uses_coherent_analytic(make_run):
    run = make_run("ber-mc", ebn0_db=[2.0], detector="coherent", seed=4, **SMALL_RUN)
    table = await cmd_ber_mc(run)

    expected = ber.ber_coherent_derived(build_run_scenario(run), ber.db_to_linear(2.0), method="numeric")
    assert table.column("analytic")[0] == pytest.approx(expected, rel=1e-12)
    assert "warnings" not in table.metadata
