import logging

import pytest

from phaseprop.configfile import KEYS, format_config, from_si, parse_config, parse_config_text, to_si
from phaseprop.exceptions import ConfigError
from phaseprop.experiment import ExperimentConfig
from phaseprop.propagator import Grid, SolverOptions


def test_empty_file_gives_baseline(caplog):
    with caplog.at_level(logging.INFO, logger="phaseprop"):
        config = parse_config_text("")
    assert config == ExperimentConfig()
    assert config.solver == SolverOptions(cfl=0.5, node_epsilon=1e-12)
    assert sum("using default" in r.message for r in caplog.records) == len(KEYS)


def test_sigma_s_for_the_dipped_curve():
    config = parse_config_text("sigma_s_nm = 101.5\n")
    assert config.sigma_s == 101.5e-9
    assert config.sigma_rho == 100e-9


def test_sigma_s_below_sigma_rho_names_both_keys():
    with pytest.raises(ConfigError, match=r"sigma_s_nm must be >= sigma_rho_nm.*99.*100"):
        parse_config_text("sigma_s_nm = 99")


def test_unknown_key_rejected():
    with pytest.raises(ConfigError, match="unknown key.*sigma_nm"):
        parse_config_text("sigma_nm = 100")


@pytest.mark.parametrize("line, key", [("cfl = fast", "cfl"), ("grid_cells = 8", "grid_cells"),
                                       ("grid_cells = 1e4", "grid_cells"), ("scheme = lax", "scheme"),
                                       ("cfl = 1.5", "cfl"), ("t_final_ns = -1", "t_final_ns"),
                                       ("mass_kg = 0", "mass_kg"), ("node_epsilon = nan", "node_epsilon")])
def test_bad_values_name_the_key(line, key):
    with pytest.raises(ConfigError, match=key):
        parse_config_text(line)


def test_malformed_text():
    with pytest.raises(ConfigError, match="malformed"):
        parse_config_text("this line has no separator")


def test_missing_file(tmp_path):
    with pytest.raises(ConfigError, match="cannot read"):
        parse_config(tmp_path / "absent.cfg")


def test_comments_and_units(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("# comment\nt_final_ns = 0.02  ; short run\ngrid_x_max_um = 12\ngrid_cells = 1024\n"
                    "scheme = upwind\n")
    config = parse_config(path)
    assert config.t_final == 0.02e-9
    assert config.grid == Grid.symmetric(12e-6, 1024)
    assert config.solver.scheme == "upwind"


def test_unit_conversion_is_decimal_exact():
    assert to_si("101.5", -9) == 101.5e-9
    assert to_si("0.1", -9) == 1e-10
    assert from_si(101.5e-9, -9) == "101.5"
    assert from_si(2e-9, -9) == "2"


def test_echo_round_trip():
    config = parse_config_text("sigma_s_nm = 100.5\nt_final_ns = 1.25\ncfl = 0.4\nmax_steps = 5000\n")
    assert parse_config_text(format_config(config)) == config


def test_echo_requires_symmetric_grid():
    with pytest.raises(ConfigError):
        format_config(ExperimentConfig(grid=Grid(-10e-6, 12e-6, 1024)))
