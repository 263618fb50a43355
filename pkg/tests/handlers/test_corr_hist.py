"""Tests for corr-hist handler."""

import pytest

import waveform
from config import reset_config
from errors import DomainError
from handlers.corr_hist import COLUMNS, REFERENCE_STD, cmd_corr_hist


@pytest.fixture
def copy_family():
    waveform.register_phase_law(waveform.PhaseLaw(family="copy", phase=waveform.linear_phase))
    yield "copy"
    waveform.unregister_phase_law("copy")


async def test_orthogonal_grid_is_degenerate(make_run):
    """With no delay and no Doppler every pair is orthogonal."""
    run = make_run("corr-hist", n_users=4, nu_start=0.0, nu_stop=0.0, hist_points=1, hist_bins=10)
    table = await cmd_corr_hist(run)

    assert table.columns == COLUMNS
    counts = table.column("count")
    assert counts == [12] + [0] * 9
    summary = table.metadata["summary"]["linear"]
    assert summary["count"] == 12
    assert summary["max"] < 1e-12
    assert summary["reference_std"] == REFERENCE_STD["linear"]


async def test_counts_cover_pairs_points_and_delays(make_run):
    run = make_run("corr-hist", n_users=4, epsilons=[0.0, 0.05], hist_points=20, hist_bins=25)
    table = await cmd_corr_hist(run)

    assert sum(table.column("count")) == 12 * 20 * 2
    assert len(table.rows) == 25
    assert table.rows[0][1] == 0.0
    assert table.rows[-1][2] == 1.0
    stats = table.metadata["summary"]["linear"]
    assert 0.0 < stats["mean"] < stats["max"] <= 1.0 + 1e-12
    assert stats["std"] > 0.0


async def test_config_defaults_for_points_and_bins(make_run, monkeypatch):
    monkeypatch.setenv("CHIRPMAI_HIST_DOPPLER_POINTS", "7")
    monkeypatch.setenv("CHIRPMAI_HIST_BINS", "4")
    reset_config()

    table = await cmd_corr_hist(make_run("corr-hist", n_users=3))
    assert len(table.rows) == 4
    assert sum(table.column("count")) == 6 * 7


async def test_numeric_family_close_to_closed_form(make_run, copy_family):
    run = make_run(
        "corr-hist",
        n_users=3,
        families=["linear", copy_family],
        epsilons=[0.0, 0.25],
        hist_points=15,
        hist_bins=5,
    )
    table = await cmd_corr_hist(run)

    summary = table.metadata["summary"]
    assert set(summary) == {"linear", "copy"}
    assert "reference_std" not in summary["copy"]
    assert summary["copy"]["count"] == summary["linear"]["count"] == 6 * 15 * 2
    assert summary["copy"]["mean"] == pytest.approx(summary["linear"]["mean"], abs=0.01)
    assert {row[0] for row in table.rows} == {"linear", "copy"}


async def test_unknown_family_lists_available(make_run):
    run = make_run("corr-hist", families=["linear", "quartic"])
    with pytest.raises(DomainError, match="Available families"):
        await cmd_corr_hist(run)
