"""The double-slit scenario: configuration, single runs and sigma_S sweeps."""
from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from . import __version__
from .exceptions import ConfigError, SolverError
from .fringes import born_discrepancy, fringe_analysis
from .phaseflow import VelocitySampler
from .propagator import (DensityField, Grid, SolverOptions, born_field, initial_density,
                         propagate_fv)
from .wavefield import DoubleSlitWave, PhysicalConstants, normalization_defect

logger = logging.getLogger(__name__)

# baseline: 2X = 1 um, sigma_rho = 100 nm, t = 2 ns (electrons)
DEFAULT_X = 500e-9
DEFAULT_SIGMA_RHO = 100e-9
DEFAULT_T_FINAL = 2e-9
DEFAULT_SWEEP = (100e-9, 100.5e-9, 101.0e-9, 101.5e-9)


def _default_grid():
    return Grid.symmetric(10e-6, 16384)


@dataclass(frozen=True)
class ExperimentConfig:
    constants: PhysicalConstants = field(default_factory=PhysicalConstants)
    half_separation_X: float = DEFAULT_X
    sigma_rho: float = DEFAULT_SIGMA_RHO
    sigma_s: float = DEFAULT_SIGMA_RHO
    t_final: float = DEFAULT_T_FINAL
    grid: Grid = field(default_factory=_default_grid)
    solver: SolverOptions = field(default_factory=SolverOptions)

    def __post_init__(self):
        if not (math.isfinite(self.half_separation_X) and self.half_separation_X > 0):
            raise ConfigError(f"half_separation_X must be > 0, got {self.half_separation_X!r}")
        if not (math.isfinite(self.sigma_rho) and self.sigma_rho > 0):
            raise ConfigError(f"sigma_rho must be > 0, got {self.sigma_rho!r}")
        if not (math.isfinite(self.sigma_s) and self.sigma_s >= self.sigma_rho):
            raise ConfigError(f"sigma_s must be >= sigma_rho ({self.sigma_rho!r}), got {self.sigma_s!r}")
        if not (math.isfinite(self.t_final) and self.t_final >= 0):
            raise ConfigError(f"t_final must be >= 0, got {self.t_final!r}")

    @property
    def wave_rho(self) -> DoubleSlitWave:
        return DoubleSlitWave(self.half_separation_X, self.sigma_rho, self.constants)

    @property
    def wave_s(self) -> DoubleSlitWave:
        return DoubleSlitWave(self.half_separation_X, self.sigma_s, self.constants)

    def with_sigma_s(self, sigma_s: float) -> "ExperimentConfig":
        return replace(self, sigma_s=sigma_s)

    def as_dict(self) -> dict:
        return asdict(self)


@dataclass
class RunResult:
    rho_final: DensityField
    born_reference: DensityField
    metadata: dict = field(default_factory=dict)

    @property
    def grid(self) -> Grid:
        return self.rho_final.grid


def run_double_slit(config: ExperimentConfig) -> RunResult:
    """Propagate |psi(x, 0, sigma_rho)|^2 with the phase of psi(x, t, sigma_S).

    The Born reference is |psi(x, t_final, sigma_S)|^2, which is the quantum
    prediction whenever sigma_S == sigma_rho.
    """
    rho0 = initial_density(config.wave_rho, config.grid)
    sampler = VelocitySampler(config.wave_s, node_epsilon=config.solver.node_epsilon)
    try:
        rho = propagate_fv(rho0, sampler, config.t_final, config.solver)
    except SolverError as exc:
        diag = dict(exc.diagnostics, config=config.as_dict())
        raise SolverError(f"{exc} [sigma_s={config.sigma_s!r} m, sigma_rho={config.sigma_rho!r} m, "
                          f"t_final={config.t_final!r} s, grid={config.grid}]", diag) from exc
    reference = born_field(config.wave_s, config.grid, config.t_final)
    metadata = dict(
        version=__version__,
        config=config.as_dict(),
        born_reference_sigma=config.sigma_s,
        initial_mass=rho0.mass_audit,
        normalization_defect=normalization_defect(config.wave_rho),
        solver=dict(rho.diagnostics),
    )
    return RunResult(rho, reference, metadata)


@dataclass
class SweepEntry:
    sigma_s: float
    result: RunResult | None = None
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.error is None


def _run_one(config: ExperimentConfig) -> SweepEntry:
    try:
        return SweepEntry(config.sigma_s, run_double_slit(config))
    except (SolverError, ConfigError, ArithmeticError) as exc:
        logger.warning("sweep point sigma_s=%r failed: %s", config.sigma_s, exc)
        return SweepEntry(config.sigma_s, error=f"{type(exc).__name__}: {exc}")


def sweep_sigma_s(base: ExperimentConfig, sigma_s_values, jobs: int = 1) -> list[SweepEntry]:
    """One independent run per sigma_S value, in input order; failures are kept per entry."""
    values = [float(v) for v in sigma_s_values]
    if not values:
        raise ConfigError("sigma_s sweep needs at least one value")
    configs = []
    for v in values:
        if not (math.isfinite(v) and v >= base.sigma_rho):
            raise ConfigError(f"sweep value sigma_s={v!r} m is below sigma_rho={base.sigma_rho!r} m")
        configs.append(base.with_sigma_s(v))
    if jobs > 1 and len(configs) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_run_one, configs))
    return [_run_one(c) for c in configs]


def summarize(result: RunResult) -> dict:
    """Fringe report and Born discrepancy of a run, flattened for tables."""
    fringes = fringe_analysis(result.rho_final)
    discrepancy = born_discrepancy(result.rho_final, result.born_reference)
    return dict(
        split_depth=fringes.split_depth,
        central_is_minimum=fringes.central_is_minimum,
        linf_born_discrepancy=discrepancy.linf_relative,
        l2_born_discrepancy=discrepancy.l2_relative,
        fringe_spacing_estimate=fringes.fringe_spacing_estimate,
    )


def central_profile(rho: DensityField, half_width: float):
    """Cells with |x| <= half_width, for inspecting the main maximum."""
    x = rho.grid.centers
    mask = np.abs(x) <= half_width
    return x[mask], rho.values[mask]
