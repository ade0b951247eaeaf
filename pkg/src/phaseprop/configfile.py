"""Flat ``key = value`` configuration files with units in the key names."""
from __future__ import annotations

import configparser
import logging
from decimal import Decimal, InvalidOperation
from pathlib import Path

from ._validation import check_choice, check_interval, check_positive_int
from .exceptions import ConfigError
from .experiment import ExperimentConfig
from .propagator import SCHEMES, Grid, SolverOptions
from .wavefield import PhysicalConstants

logger = logging.getLogger(__name__)

_SECTION = "config"

# key -> (decimal exponent converting the file value to SI, or None for non-scaled)
UNITS = {
    "mass_kg": 0,
    "slit_half_separation_nm": -9,
    "sigma_rho_nm": -9,
    "sigma_s_nm": -9,
    "t_final_ns": -9,
    "grid_x_max_um": -6,
    "grid_cells": None,
    "cfl": 0,
    "node_epsilon": 0,
    "scheme": None,
    "max_steps": None,
}
KEYS = tuple(UNITS)


def _defaults() -> dict:
    base = ExperimentConfig()
    return {
        "mass_kg": base.constants.mass,
        "slit_half_separation_nm": base.half_separation_X,
        "sigma_rho_nm": base.sigma_rho,
        "sigma_s_nm": base.sigma_s,
        "t_final_ns": base.t_final,
        "grid_x_max_um": base.grid.x_max,
        "grid_cells": base.grid.cells,
        "cfl": base.solver.cfl,
        "node_epsilon": base.solver.node_epsilon,
        "scheme": base.solver.scheme,
        "max_steps": base.solver.max_steps,
    }


def to_si(text: str, exponent: int) -> float:
    """Exact decimal rescaling followed by a single rounding to float."""
    return float(Decimal(text).scaleb(exponent))


def from_si(value: float, exponent: int) -> str:
    """Inverse of :func:`to_si`: ``to_si(from_si(v, e), e) == v`` for every float v."""
    scaled = Decimal(repr(float(value))).scaleb(-exponent).normalize()
    text = format(scaled, "f") if -30 < scaled.adjusted() < 30 else str(scaled)
    return text


def _parse_value(key: str, raw: str):
    raw = raw.strip().strip('"').strip("'")
    exponent = UNITS[key]
    try:
        if key == "scheme":
            return check_choice(key, raw, SCHEMES)
        if key in ("grid_cells", "max_steps"):
            return check_positive_int(key, int(raw), minimum=16 if key == "grid_cells" else 1)
        value = to_si(raw, exponent)
    except (ValueError, InvalidOperation) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"{key}: cannot parse {raw!r} as a number") from None
    return value


def parse_config_text(text: str, source: str = "<string>") -> ExperimentConfig:
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"),
                                       comment_prefixes=("#", ";"))
    try:
        parser.read_string(f"[{_SECTION}]\n" + text, source=source)
    except configparser.Error as exc:
        raise ConfigError(f"{source}: malformed config: {exc}") from None
    items = dict(parser.items(_SECTION))
    unknown = sorted(set(items) - set(KEYS))
    if unknown:
        raise ConfigError(f"{source}: unknown key(s) {', '.join(unknown)}; allowed: {', '.join(KEYS)}")

    values = _defaults()
    for key in KEYS:
        if key in items:
            values[key] = _parse_value(key, items[key])
        else:
            logger.info("%s: %s not set, using default %r", source, key, values[key])

    check_interval("mass_kg", values["mass_kg"], low=0, closed="neither")
    for key in ("slit_half_separation_nm", "sigma_rho_nm", "grid_x_max_um"):
        check_interval(key, values[key], low=0, closed="neither")
    check_interval("t_final_ns", values["t_final_ns"], low=0)
    check_interval("cfl", values["cfl"], low=0, high=1, closed="right")
    check_interval("node_epsilon", values["node_epsilon"], low=0)
    if not values["sigma_s_nm"] >= values["sigma_rho_nm"]:
        raise ConfigError(f"sigma_s_nm must be >= sigma_rho_nm "
                          f"(got sigma_s_nm={from_si(values['sigma_s_nm'], -9)}, "
                          f"sigma_rho_nm={from_si(values['sigma_rho_nm'], -9)})")

    return ExperimentConfig(
        constants=PhysicalConstants(mass=values["mass_kg"]),
        half_separation_X=values["slit_half_separation_nm"],
        sigma_rho=values["sigma_rho_nm"],
        sigma_s=values["sigma_s_nm"],
        t_final=values["t_final_ns"],
        grid=Grid.symmetric(values["grid_x_max_um"], values["grid_cells"]),
        solver=SolverOptions(cfl=values["cfl"], scheme=values["scheme"],
                             node_epsilon=values["node_epsilon"], max_steps=values["max_steps"]),
    )


def parse_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc.strerror or exc}") from None
    return parse_config_text(text, source=str(path))


def format_config(config: ExperimentConfig) -> str:
    """Config echo in the file format; parse_config_text(format_config(c)) == c."""
    grid = config.grid
    if grid.x_min != -grid.x_max:
        raise ConfigError("only grids symmetric about x = 0 can be written to a config file")
    values = {
        "mass_kg": from_si(config.constants.mass, 0),
        "slit_half_separation_nm": from_si(config.half_separation_X, -9),
        "sigma_rho_nm": from_si(config.sigma_rho, -9),
        "sigma_s_nm": from_si(config.sigma_s, -9),
        "t_final_ns": from_si(config.t_final, -9),
        "grid_x_max_um": from_si(grid.x_max, -6),
        "grid_cells": str(grid.cells),
        "cfl": from_si(config.solver.cfl, 0),
        "node_epsilon": from_si(config.solver.node_epsilon, 0),
        "scheme": config.solver.scheme,
        "max_steps": str(config.solver.max_steps),
    }
    if config.constants.hbar != PhysicalConstants().hbar:
        raise ConfigError("hbar is fixed in config files; a custom value cannot be written")
    return "".join(f"{k} = {v}\n" for k, v in values.items())
