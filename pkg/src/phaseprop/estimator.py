"""scikit-learn style front end.

``PhaseGuidedPropagator`` is a transformer whose samples are densities on a
fixed grid (one row per density, one column per cell). ``fit`` builds the
grid and the phase-derived velocity field; ``transform`` propagates every row
to ``t_final``. Because it follows the estimator protocol it can be cloned,
grid-searched over ``sigma_s`` and dropped into a ``Pipeline``.
"""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from ._validation import check_choice, check_interval, check_positive_int
from .phaseflow import VelocitySampler
from .propagator import (DensityField, Grid, SolverOptions, initial_density,
                         propagate_characteristics, propagate_fv, propagate_series)
from .wavefield import ELECTRON_MASS, HBAR, DoubleSlitWave, PhysicalConstants, born_density

METHODS = ("fv", "series", "characteristics")


class PhaseGuidedPropagator(TransformerMixin, BaseEstimator):
    """Propagate densities with the phase of a double-slit wave function.

    Parameters
    ----------
    half_separation : float, default=5e-7
        Half the slit separation X in metres.
    sigma_s : float, default=1e-7
        Single-slit width of the wave function whose phase drives the flow.
    t_final : float, default=2e-9
        Propagation time in seconds (densities start at t = 0).
    x_max : float, default=1e-5
        Grid spans [-x_max, x_max].
    cells : int, default=16384
    method : {"fv", "series", "characteristics"}, default="fv"
    scheme : {"upwind", "upwind-MUSCL"}, default="upwind-MUSCL"
        Finite-volume flux, used when ``method="fv"``.
    cfl, node_epsilon, max_steps
        Solver controls, see :class:`~phaseprop.propagator.SolverOptions`.
    series_order, quadrature_steps
        Truncation order and time nodes for ``method="series"``.
    n_traj : int or None
        Trajectory count for ``method="characteristics"``.
    mass, hbar : float
        Particle mass (electron by default) and the reduced Planck constant.

    Attributes
    ----------
    grid_ : Grid
    sampler_ : VelocitySampler
    x_ : ndarray of shape (cells,)
        Cell centres.
    n_features_in_ : int
    diagnostics_ : list of dict
        Solver diagnostics of the last ``transform`` call, one per row.
    """

    def __init__(self, half_separation=5e-7, sigma_s=1e-7, t_final=2e-9, x_max=1e-5,
                 cells=16384, method="fv", scheme="upwind-MUSCL", cfl=0.5,
                 node_epsilon=1e-12, max_steps=1_000_000, series_order=3,
                 quadrature_steps=200, n_traj=None, mass=ELECTRON_MASS, hbar=HBAR):
        self.half_separation = half_separation
        self.sigma_s = sigma_s
        self.t_final = t_final
        self.x_max = x_max
        self.cells = cells
        self.method = method
        self.scheme = scheme
        self.cfl = cfl
        self.node_epsilon = node_epsilon
        self.max_steps = max_steps
        self.series_order = series_order
        self.quadrature_steps = quadrature_steps
        self.n_traj = n_traj
        self.mass = mass
        self.hbar = hbar

    def _validate_params(self):
        check_interval("half_separation", self.half_separation, low=0, closed="neither")
        check_interval("sigma_s", self.sigma_s, low=0, closed="neither")
        check_interval("t_final", self.t_final, low=0)
        check_interval("x_max", self.x_max, low=0, closed="neither")
        check_positive_int("cells", self.cells)
        check_choice("method", self.method, METHODS)
        check_positive_int("series_order", self.series_order, minimum=0)
        check_positive_int("quadrature_steps", self.quadrature_steps)
        if self.n_traj is not None:
            check_positive_int("n_traj", self.n_traj, minimum=self.cells)

    def fit(self, X=None, y=None):
        """Build the grid and velocity field; ``X`` (if given) only fixes the feature count."""
        self._validate_params()
        self.grid_ = Grid.symmetric(self.x_max, self.cells)
        self.options_ = SolverOptions(cfl=self.cfl, scheme=self.scheme,
                                      node_epsilon=self.node_epsilon, max_steps=self.max_steps)
        constants = PhysicalConstants(hbar=self.hbar, mass=self.mass)
        self.wave_ = DoubleSlitWave(self.half_separation, self.sigma_s, constants)
        self.sampler_ = VelocitySampler(self.wave_, node_epsilon=self.node_epsilon)
        self.x_ = self.grid_.centers
        self.n_features_in_ = self.cells
        if X is not None:
            self._check_X(X)
        return self

    def _check_X(self, X):
        X = check_array(X, dtype=np.float64, ensure_2d=True)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"X has {X.shape[1]} features, but {type(self).__name__} "
                             f"is expecting {self.n_features_in_} (one per grid cell)")
        if np.any(X < 0):
            raise ValueError("densities must be nonnegative")
        return X

    def _propagate(self, row):
        rho0 = DensityField(self.grid_, row, 0.0)
        if self.method == "fv":
            return propagate_fv(rho0, self.sampler_, self.t_final, self.options_)
        if self.method == "series":
            return propagate_series(rho0, self.sampler_, self.t_final, self.series_order,
                                    self.quadrature_steps)
        return propagate_characteristics(rho0, self.sampler_, self.t_final, self.n_traj)

    def transform(self, X):
        """Propagate each row of ``X`` from t = 0 to ``t_final``."""
        check_is_fitted(self, "grid_")
        X = self._check_X(X)
        out = np.empty_like(X)
        self.diagnostics_ = []
        for i, row in enumerate(X):
            rho = self._propagate(row)
            out[i] = rho.values
            self.diagnostics_.append(rho.diagnostics)
        return out

    def initial_density(self, sigma_rho):
        """Row vector |psi(x, 0, sigma_rho)|^2 on the fitted grid, ready for ``transform``."""
        check_is_fitted(self, "grid_")
        wave = DoubleSlitWave(self.half_separation, sigma_rho, self.wave_.constants)
        return initial_density(wave, self.grid_).values[np.newaxis, :]

    def born_reference(self):
        """|psi(x, t_final, sigma_s)|^2 on the fitted grid."""
        check_is_fitted(self, "grid_")
        return born_density(self.x_, self.t_final, self.wave_)
