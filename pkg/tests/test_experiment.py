import numpy as np
import pytest

from phaseprop.exceptions import ConfigError, SolverError
from phaseprop.experiment import (DEFAULT_SWEEP, ExperimentConfig, central_profile, run_double_slit,
                                  summarize, sweep_sigma_s)
from phaseprop.propagator import Grid, SolverOptions


@pytest.fixture(scope="module")
def base():
    return ExperimentConfig(grid=Grid.symmetric(10e-6, 2048))


def test_defaults_are_the_baseline_geometry():
    c = ExperimentConfig()
    assert (c.half_separation_X, c.sigma_rho, c.sigma_s, c.t_final) == (500e-9, 100e-9, 100e-9, 2e-9)
    assert c.grid == Grid.symmetric(10e-6, 16384)
    assert c.constants.mass == 9.1093837015e-31
    assert DEFAULT_SWEEP == (100e-9, 100.5e-9, 101e-9, 101.5e-9)


@pytest.mark.parametrize("kwargs", [dict(sigma_s=99e-9), dict(sigma_rho=0.0), dict(t_final=-1.0),
                                    dict(half_separation_X=float("nan"))])
def test_config_invariants(kwargs):
    with pytest.raises(ConfigError):
        ExperimentConfig(**kwargs)


def test_born_equivalent_run(base):
    result = run_double_slit(base)
    s = summarize(result)
    assert s["linf_born_discrepancy"] < 0.01
    assert not s["central_is_minimum"] and s["split_depth"] == 0.0
    assert result.metadata["born_reference_sigma"] == base.sigma_s
    assert result.metadata["normalization_defect"] == pytest.approx(np.exp(-12.5))
    assert result.metadata["solver"]["mass_drift"] < 1e-12
    assert result.grid is base.grid


def test_anomalous_run_dips_at_centre(base):
    s = summarize(run_double_slit(base.with_sigma_s(101.5e-9)))
    assert s["central_is_minimum"] and s["split_depth"] > 0.02


def test_zero_time_returns_initial_density(base):
    result = run_double_slit(ExperimentConfig(grid=base.grid, t_final=0.0))
    np.testing.assert_array_equal(result.rho_final.values, result.born_reference.values)


def test_sweep_keeps_order_and_duplicates(base):
    entries = sweep_sigma_s(base, [101.5e-9, 100e-9, 101.5e-9])
    assert [e.sigma_s for e in entries] == [101.5e-9, 100e-9, 101.5e-9]
    assert all(e.ok for e in entries)
    np.testing.assert_array_equal(entries[0].result.rho_final.values, entries[2].result.rho_final.values)


def test_parallel_sweep_matches_serial(base):
    serial = sweep_sigma_s(base, [100e-9, 101e-9])
    parallel = sweep_sigma_s(base, [100e-9, 101e-9], jobs=2)
    for a, b in zip(serial, parallel):
        np.testing.assert_array_equal(a.result.rho_final.values, b.result.rho_final.values)


def test_sweep_validation(base):
    with pytest.raises(ConfigError):
        sweep_sigma_s(base, [])
    with pytest.raises(ConfigError, match="below sigma_rho"):
        sweep_sigma_s(base, [100e-9, 99e-9])


def test_failing_point_is_reported_not_raised(base):
    starved = ExperimentConfig(grid=base.grid, solver=SolverOptions(max_steps=5))
    (entry,) = sweep_sigma_s(starved, [100e-9])
    assert not entry.ok and "CFL stall" in entry.error
    with pytest.raises(SolverError, match="sigma_s="):
        run_double_slit(starved)


def test_central_profile(base):
    result = run_double_slit(ExperimentConfig(grid=base.grid, t_final=0.0))
    x, y = central_profile(result.rho_final, 1e-6)
    assert np.all(np.abs(x) <= 1e-6) and x.size == y.size == 204
