"""Tests for scenario module."""

import math

import pytest

import scenario
from errors import DomainError
from waveform import ChirpParams, UserOffset


def test_grid_samples_per_symbol_default():
    assert scenario.grid_samples_per_symbol(5, [0.0]) == 320


def test_grid_samples_per_symbol_places_delays_on_grid():
    ns = scenario.grid_samples_per_symbol(5, [0.05, 0.1], samples_per_user=10)

    assert ns >= 50
    assert ns % 20 == 0
    for eps in (0.05, 0.1):
        assert (eps * ns) == pytest.approx(round(eps * ns))


def test_grid_samples_per_symbol_enforces_floor():
    """samples_per_user below the floor of 8 is raised to it."""
    assert scenario.grid_samples_per_symbol(4, [0.0], samples_per_user=2) == 32


def test_grid_samples_per_symbol_rejects_irrational_delay():
    with pytest.raises(DomainError, match="rational"):
        scenario.grid_samples_per_symbol(2, [1 / math.pi])


def test_build_scenario_offsets():
    scen = scenario.build_scenario(3, epsilon=0.1, nu=0.2, victim_user=1)

    assert scen.n_users == 3
    assert scen.interferers == (0, 2)
    victim = scen.victim_offset
    assert (victim.epsilon, victim.delta_f, victim.theta) == (0.0, 0.0, 0.0)
    for j in scen.interferers:
        assert scen.offsets[j].epsilon == 0.1
        assert scen.offsets[j].delta_f == pytest.approx(0.2 * 3)
    assert scen.samples_per_symbol % 10 == 0


def test_build_scenario_energies():
    scen = scenario.build_scenario(2, symbol_energies=[1.0, 4.0])

    assert scen.amplitude(0) == pytest.approx(math.sqrt(2.0))
    assert scen.amplitude(1) == pytest.approx(math.sqrt(8.0))
    assert scen.energy_ratio(1) == pytest.approx(2.0)

    with pytest.raises(DomainError):
        scenario.build_scenario(2, symbol_energies=[1.0])


def test_build_scenario_explicit_offsets():
    offsets = [
        UserOffset(),
        UserOffset(epsilon=0.05, delta_f=0.3),
        UserOffset(epsilon=0.2, theta=1.0, symbol_energy=9.0),
    ]
    scen = scenario.build_scenario(
        3, epsilon=0.5, nu=0.4, offsets=offsets, symbol_energies=[1.0, 0.5, 2.0]
    )

    assert scen.offsets[1].epsilon == 0.05
    assert scen.offsets[1].delta_f == 0.3
    assert scen.offsets[2].theta == 1.0
    assert [off.symbol_energy for off in scen.offsets] == [1.0, 0.5, 2.0]
    assert scen.samples_per_symbol % 20 == 0

    default = scenario.build_scenario(3, offsets=offsets)
    assert [off.symbol_energy for off in default.offsets] == pytest.approx([1.0, 1.0, 1.0])

    with pytest.raises(DomainError, match="Expected 3 user offsets"):
        scenario.build_scenario(3, offsets=offsets[:2])


def test_scenario_properties():
    scen = scenario.build_scenario(2, samples_per_symbol=64)
    assert scen.dt == pytest.approx(1 / 64)
    assert scen.law.family == "linear"


@pytest.mark.parametrize(
    "kwargs, message",
    [
        ({"victim_user": 2}, "victim_user"),
        ({"phase_model": "random"}, "phase model"),
        ({"family": "quartic"}, "Available families"),
        ({"samples_per_symbol": 8}, "floor"),
    ],
)
def test_scenario_validation(kwargs, message):
    values = {
        "chirp": ChirpParams(n_users=2),
        "offsets": (UserOffset(), UserOffset()),
        "samples_per_symbol": 64,
    }
    values.update(kwargs)
    with pytest.raises(DomainError, match=message):
        scenario.Scenario(**values)


def test_scenario_rejects_wrong_offset_count():
    with pytest.raises(DomainError, match="Expected 2"):
        scenario.Scenario(ChirpParams(n_users=2), (UserOffset(),), 64)


def test_scenario_rejects_off_grid_delay():
    with pytest.raises(DomainError, match="multiple"):
        scenario.Scenario(ChirpParams(n_users=2), (UserOffset(), UserOffset(epsilon=0.1)), 64)
