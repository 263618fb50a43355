"""Tests for corr-sweep handler."""

import numpy as np
import pytest

import waveform
from errors import DomainError
from handlers.corr_sweep import COLUMNS, cmd_corr_sweep


@pytest.fixture
def copy_family():
    """The linear law registered under a name without a closed form."""
    waveform.register_phase_law(waveform.PhaseLaw(family="copy", phase=waveform.linear_phase))
    yield "copy"
    waveform.unregister_phase_law("copy")


def _pair_rows(table, m, k):
    rows = [dict(zip(table.columns, row, strict=True)) for row in table.rows]
    return [r for r in rows if (r["m"], r["k"]) == (m, k)]


async def test_doppler_peaks_without_delay(make_run):
    """User m meets user k when the Doppler shift covers their frequency offset."""
    run = make_run("corr-sweep", n_users=5, pairs=[[0, 1], [0, 2]])
    table = await cmd_corr_sweep(run)

    assert table.columns == COLUMNS
    assert len(table.rows) == 2 * 201
    for k, expected_nu in ((1, 0.2), (2, 0.4)):
        rows = _pair_rows(table, 0, k)
        peak = max(rows, key=lambda r: r["abs"])
        assert peak["nu"] == pytest.approx(expected_nu)
        assert peak["abs"] == pytest.approx(1.0, abs=1e-12)


async def test_delay_lowers_peak_and_fills_nulls(make_run):
    run = make_run("corr-sweep", n_users=5, pairs=[[0, 2]], epsilons=[0.1])
    table = await cmd_corr_sweep(run)

    magnitudes = np.array(table.column("abs"))
    peak = table.rows[int(np.argmax(magnitudes))]
    assert table.columns.index("nu") == 3
    assert peak[3] == pytest.approx(0.5)
    assert magnitudes.max() == pytest.approx(0.9, abs=1e-6)
    assert magnitudes.min() > 1e-3
    assert set(table.column("epsilon")) == {0.1}


async def test_closed_and_numeric_columns_agree(make_run):
    run = make_run("corr-sweep", n_users=4, pairs=[[1, 3]], epsilons=[0.0, 0.25], nu_points=41)
    table = await cmd_corr_sweep(run)

    analytic = np.array(table.column("analytic_abs"))
    numeric = np.array(table.column("numeric_abs"))
    np.testing.assert_allclose(numeric, analytic, atol=0.02)
    assert table.column("abs") == table.column("analytic_abs")
    assert table.metadata["samples_per_symbol"] == 256


async def test_family_without_closed_form_reports_numeric_only(make_run, copy_family):
    run = make_run("corr-sweep", n_users=3, pairs=[[0, 1]], family=copy_family, nu_points=11)
    table = await cmd_corr_sweep(run)

    assert set(table.column("analytic_abs")) == {None}
    assert table.column("abs") == table.column("numeric_abs")


async def test_repeat_tail_changes_delayed_correlation(make_run):
    values = {"n_users": 4, "pairs": [[0, 1]], "epsilons": [0.25], "nu_points": 21}
    truncated = await cmd_corr_sweep(make_run("corr-sweep", **values))
    repeated = await cmd_corr_sweep(make_run("corr-sweep", interferer_tail="repeat", **values))

    assert not np.allclose(truncated.column("abs"), repeated.column("abs"))


async def test_default_pairs_cover_every_ordered_pair(make_run):
    run = make_run("corr-sweep", n_users=3, nu_points=2)
    table = await cmd_corr_sweep(run)

    pairs = {(row[0], row[1]) for row in table.rows}
    assert pairs == {(0, 1), (0, 2), (1, 0), (1, 2), (2, 0), (2, 1)}


async def test_unknown_family(make_run):
    run = make_run("corr-sweep", family="quartic")
    with pytest.raises(DomainError, match="Available families"):
        await cmd_corr_sweep(run)
