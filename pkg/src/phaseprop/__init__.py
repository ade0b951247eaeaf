"""Phase-guided probability propagation for the double-slit experiment.

A density rho0 is transported with the velocity field (1/m) dS/dx taken from
the phase S of a closed-form double-slit wave function. Transporting
|psi(x, 0)|^2 reproduces Born's rule; any other rho0 gives the generalized
prediction.
"""
__version__ = "0.1.0"

from .exceptions import ConfigError, DomainError, NodeError, PhasePropError, SolverError
from .wavefield import (ELECTRON_MASS, HBAR, DoubleSlitWave, PhysicalConstants, born_density,
                        dpsi_dx, gamma, psi_double, psi_single)
from .phaseflow import VelocitySampler, divergence_term, phase, velocity, velocity_and_density
from .propagator import (DensityField, Grid, SolverOptions, initial_density,
                         propagate_characteristics, propagate_fv, propagate_series, total_mass)
from .fringes import FringeReport, born_discrepancy, fringe_analysis
from .experiment import ExperimentConfig, RunResult, run_double_slit, sweep_sigma_s
from .estimator import PhaseGuidedPropagator

__all__ = [
    "ConfigError", "DomainError", "NodeError", "PhasePropError", "SolverError",
    "ELECTRON_MASS", "HBAR", "DoubleSlitWave", "PhysicalConstants", "born_density",
    "dpsi_dx", "gamma", "psi_double", "psi_single",
    "VelocitySampler", "divergence_term", "phase", "velocity", "velocity_and_density",
    "DensityField", "Grid", "SolverOptions", "initial_density",
    "propagate_characteristics", "propagate_fv", "propagate_series", "total_mass",
    "FringeReport", "born_discrepancy", "fringe_analysis",
    "ExperimentConfig", "RunResult", "run_double_slit", "sweep_sigma_s",
    "PhaseGuidedPropagator",
]
