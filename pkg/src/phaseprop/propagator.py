"""Transport of a probability density along a phase-derived velocity field.

Three independent routes solve drho/dt = -d/dx (v rho):

* :func:`propagate_fv` -- conservative finite volumes with upwind fluxes and
  CFL-adaptive steps (the production solver),
* :func:`propagate_series` -- the time-ordered series obtained by iterating the
  integral form of the continuity equation (short times only),
* :func:`propagate_characteristics` -- trajectories dx/dt = v carrying
  rho0 / J, where J is the spacing Jacobian (an oracle for the other two).
"""
from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field
from typing import Literal

import numpy as np
from scipy.integrate import cumulative_trapezoid, solve_ivp
from scipy.interpolate import PchipInterpolator

from .exceptions import ConfigError, DomainError, SolverError
from .phaseflow import VelocitySampler, velocity, velocity_and_density
from .wavefield import DoubleSlitWave, Which, born_density, peak_reference_density, psi_single

logger = logging.getLogger(__name__)

Scheme = Literal["upwind", "upwind-MUSCL"]
SCHEMES = ("upwind", "upwind-MUSCL")

LEAKAGE_LIMIT = 1e-6
BOUNDARY_FRACTION = 1e-12
WEIGHT_FLOOR = 1e-12


@dataclass(frozen=True)
class Grid:
    """Uniform cell-centred grid on [x_min, x_max].

    Faces and centres are built as ``mid + dx * k`` with (half-)integer ``k``
    so a grid with x_min = -x_max is mirror symmetric bit for bit.
    """

    x_min: float
    x_max: float
    cells: int

    def __post_init__(self):
        if not (math.isfinite(self.x_min) and math.isfinite(self.x_max)):
            raise ConfigError("grid bounds must be finite")
        if not self.x_max > self.x_min:
            raise ConfigError(f"grid needs x_max > x_min, got [{self.x_min}, {self.x_max}]")
        if int(self.cells) != self.cells or self.cells < 16:
            raise ConfigError(f"grid needs an integer number of cells >= 16, got {self.cells!r}")

    @classmethod
    def symmetric(cls, half_width: float, cells: int) -> "Grid":
        return cls(-half_width, half_width, cells)

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / self.cells

    @property
    def _mid(self) -> float:
        return 0.5 * (self.x_min + self.x_max)

    @property
    def centers(self) -> np.ndarray:
        k = np.arange(self.cells) - (self.cells - 1) / 2.0
        return self._mid + self.dx * k

    @property
    def faces(self) -> np.ndarray:
        k = np.arange(self.cells + 1) - self.cells / 2.0
        return self._mid + self.dx * k


def total_mass(rho: "DensityField") -> float:
    """Midpoint quadrature of the cell values."""
    return float(np.sum(rho.values) * rho.grid.dx)


@dataclass
class DensityField:
    grid: Grid
    values: np.ndarray
    time: float = 0.0
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.grid.cells,):
            raise ConfigError(f"density has shape {self.values.shape}, grid expects ({self.grid.cells},)")
        if not np.all(np.isfinite(self.values)):
            raise SolverError("density contains non-finite values")

    @property
    def mass_audit(self) -> float:
        return total_mass(self)

    @property
    def x(self) -> np.ndarray:
        return self.grid.centers

    def copy(self) -> "DensityField":
        return DensityField(self.grid, self.values.copy(), self.time, dict(self.diagnostics))


@dataclass(frozen=True)
class SolverOptions:
    cfl: float = 0.5
    scheme: Scheme = "upwind-MUSCL"
    node_epsilon: float = 1e-12
    max_steps: int = 1_000_000

    def __post_init__(self):
        if not (0 < self.cfl <= 1):
            raise ConfigError(f"cfl must lie in (0, 1], got {self.cfl!r}")
        if self.scheme not in SCHEMES:
            raise ConfigError(f"scheme must be one of {SCHEMES}, got {self.scheme!r}")
        if not (math.isfinite(self.node_epsilon) and self.node_epsilon >= 0):
            raise ConfigError(f"node_epsilon must be >= 0, got {self.node_epsilon!r}")
        if int(self.max_steps) != self.max_steps or self.max_steps < 1:
            raise ConfigError(f"max_steps must be a positive integer, got {self.max_steps!r}")


def initial_density(wave_rho: DoubleSlitWave, grid: Grid, which: Which = "both") -> DensityField:
    """Sample |psi(x, 0, sigma_rho)|^2 at the cell centres."""
    x = grid.centers
    if which == "both":
        values = born_density(x, 0.0, wave_rho)
    else:
        psi = psi_single(x, 0.0, wave_rho, which)
        values = psi.real**2 + psi.imag**2
    peak = float(values.max())
    edge = max(values[0], values[-1])
    if not peak > 0 or edge > BOUNDARY_FRACTION * peak:
        need = wave_rho.half_separation_X + wave_rho.sigma * math.sqrt(2.0 * math.log(1.0 / BOUNDARY_FRACTION))
        raise ConfigError(
            f"grid [{grid.x_min:.4g}, {grid.x_max:.4g}] m is too narrow for the initial density: "
            f"boundary cells hold {edge / peak if peak else math.inf:.3g} of the peak; "
            f"need |x| >= {need:.4g} m"
        )
    return DensityField(grid, values, 0.0)


def born_field(wave: DoubleSlitWave, grid: Grid, t: float) -> DensityField:
    return DensityField(grid, born_density(grid.centers, t, wave), t)


# --------------------------------------------------------------------------
# finite volumes


def _upwind_flux(v, left, right):
    return np.maximum(v, 0.0) * left + np.minimum(v, 0.0) * right


def _flux_first_order(rho, v):
    # zero-gradient ghost cells at both ends
    padded = np.concatenate(([rho[0]], rho, [rho[-1]]))
    return _upwind_flux(v, padded[:-1], padded[1:])


def _mc_slope(a, b):
    """Monotonized central limiter: minmod(2a, 2b, (a+b)/2), branch free."""
    mean = 0.5 * (a + b)
    up = np.maximum(np.minimum(np.minimum(2.0 * a, 2.0 * b), mean), 0.0)
    down = np.minimum(np.maximum(np.maximum(2.0 * a, 2.0 * b), mean), 0.0)
    return up + down


def _stagnation_faces(v):
    """Interior faces where v vanishes and the flow on both sides points away."""
    f = np.flatnonzero(v[1:-1] == 0.0) + 1
    return f[(v[f - 1] <= 0.0) & (v[f + 1] >= 0.0)]


def _flow_and_weights(faces, t, sampler: VelocitySampler):
    """Face velocities and |psi_S|^2 (plus a tiny floor) at the faces.

    The weights are the density the flow carries unchanged.
    """
    v, born = velocity_and_density(faces, t, sampler)
    weight = 2.0 if sampler.which == "both" else 1.0
    floor = WEIGHT_FLOOR * weight * peak_reference_density(t, sampler.wave)
    return v, born + floor


def _flux_muscl(rho, v, w_faces):
    """Limited reconstruction of rho / |psi_S|^2, rescaled to densities at the faces.

    The ratio is constant along the flow, so a density proportional to
    |psi_S|^2 is reconstructed without limiter clipping and keeps its extrema.
    Cell weights are geometric means of the face weights, exact for a
    Gaussian and second order in general.
    """
    n = rho.size
    u = np.empty(n + 4)
    u[2:-2] = rho / np.sqrt(w_faces[:-1] * w_faces[1:])
    u[:2] = u[2]
    u[-2:] = u[-3]
    d = np.diff(u)
    below, above = d[:-1], d[1:]  # differences on either side of each padded interior cell
    cells = u[1:-1]
    slope = _mc_slope(below, above)
    stagnation = _stagnation_faces(v)
    if stagnation.size:
        # no mass crosses a divergent stagnation face, so slopes must not see
        # across it either: use the one-sided difference, capped for positivity.
        # Padded cell j sits left of face j and right of face j - 1.
        for j, diff in ((stagnation, below), (stagnation + 1, above)):
            slope[j] = np.clip(diff[j], -2.0 * cells[j], 2.0 * cells[j])
    cap = np.empty(n + 2)
    cap[1:-1] = 2.0 * rho
    cap[0] = cap[1]
    cap[-1] = cap[-2]
    left = np.minimum(w_faces * (cells[:-1] + 0.5 * slope[:-1]), cap[:-1])
    right = np.minimum(w_faces * (cells[1:] - 0.5 * slope[1:]), cap[1:])
    return _upwind_flux(v, left, right)


def propagate_fv(rho0: DensityField, sampler: VelocitySampler, t_final: float,
                 opts: SolverOptions = SolverOptions()) -> DensityField:
    """Integrate the continuity equation with conservative upwind finite volumes.

    First order upwind samples the face velocity at the half step time.
    ``upwind-MUSCL`` reconstructs rho / |psi_S|^2 with monotonized-central
    slopes and advances with a two stage SSP Runge-Kutta step (velocity at the
    stage times). Slopes never reach across a divergent stagnation face such
    as x = 0 of the symmetric double slit, which keeps the cusp that forms
    there when the transported density differs from |psi_S|^2. Face values
    are capped at twice the upwind cell, so cfl <= 0.5 keeps the update
    nonnegative. Outflow boundaries use zero-gradient ghost cells; the mass
    crossing them is audited as leakage.
    """
    if not (math.isfinite(t_final) and t_final >= rho0.time):
        raise DomainError(f"t_final must be >= the initial time {rho0.time}, got {t_final!r}")
    if sampler.node_epsilon != opts.node_epsilon:
        sampler = sampler.with_options(node_epsilon=opts.node_epsilon)

    grid = rho0.grid
    dx = grid.dx
    faces = grid.faces
    rho = rho0.values.copy()
    mass0 = total_mass(rho0)
    t = rho0.time
    duration = t_final - t
    min_dt = duration / opts.max_steps
    leaked = 0.0
    steps = 0
    dt_smallest = math.inf
    muscl = opts.scheme == "upwind-MUSCL"

    def fail(msg, **extra):
        diag = dict(time=t, steps=steps, leakage=leaked, scheme=opts.scheme, cfl=opts.cfl)
        diag.update(extra)
        raise SolverError(msg, diag)

    if muscl:
        v_prev, w_prev = _flow_and_weights(faces, t, sampler)
    else:
        v_prev = velocity(faces, t, sampler)
    vmax_prev = float(np.max(np.abs(v_prev)))
    vmax_older = vmax_prev
    while t < t_final:
        remaining = t_final - t
        vmax_pred = max(vmax_prev, 2.0 * vmax_prev - vmax_older)
        dt = opts.cfl * dx / vmax_pred if vmax_pred > 0 else remaining
        if dt >= remaining * (1.0 - 1e-12):
            dt = remaining
        while True:
            if dt < min_dt and dt < remaining:
                fail(f"CFL stall: dt={dt:.3e} s below duration/max_steps={min_dt:.3e} s "
                     f"at t={t:.4e} s (max|v|={vmax_pred:.4e} m/s)", dt=dt)
            if muscl:
                v_mid, w_mid = _flow_and_weights(faces, t + dt, sampler)
                vmax = max(float(np.max(np.abs(v_mid))), float(np.max(np.abs(v_prev))))
            else:
                v_mid = velocity(faces, t + 0.5 * dt, sampler)
                vmax = float(np.max(np.abs(v_mid)))
            courant = vmax * dt / dx
            if courant <= min(1.0, opts.cfl * 1.02):
                break
            dt = opts.cfl * dx / vmax
        if muscl:
            f1 = _flux_muscl(rho, v_prev, w_prev)
            stage = rho - (dt / dx) * (f1[1:] - f1[:-1])
            f2 = _flux_muscl(stage, v_mid, w_mid)
            rho = 0.5 * rho + 0.5 * (stage - (dt / dx) * (f2[1:] - f2[:-1]))
            leaked += dt * (abs(0.5 * (f1[-1] + f2[-1])) + abs(0.5 * (f1[0] + f2[0])))
            v_prev, w_prev = v_mid, w_mid
        else:
            flux = _flux_first_order(rho, v_mid)
            rho -= (dt / dx) * (flux[1:] - flux[:-1])
            leaked += dt * (abs(flux[-1]) + abs(flux[0]))
        steps += 1
        dt_smallest = min(dt_smallest, dt)
        t = t_final if dt == remaining else t + dt
        vmax_older, vmax_prev = vmax_prev, vmax
        if steps > opts.max_steps:
            fail(f"exceeded max_steps={opts.max_steps} before reaching t_final")
        if leaked > LEAKAGE_LIMIT:
            fail(f"boundary leakage {leaked:.3e} exceeds {LEAKAGE_LIMIT:g}; widen the grid")

    out = DensityField(grid, rho, t_final)
    out.diagnostics = dict(
        method="fv",
        scheme=opts.scheme,
        cfl=opts.cfl,
        node_epsilon=sampler.node_epsilon,
        steps=steps,
        min_dt=dt_smallest if steps else 0.0,
        leakage=float(leaked),
        mass_drift=abs(out.mass_audit - mass0),
        min_value=float(rho.min()),
    )
    logger.debug("fv run finished: %s", out.diagnostics)
    return out


# --------------------------------------------------------------------------
# time-ordered series


def propagate_series(rho0: DensityField, sampler: VelocitySampler, t_final: float,
                     order: int = 3, quadrature_steps: int = 200,
                     return_terms: bool = False):
    """Truncated time-ordered exponential applied to ``rho0``.

    The k-th term is -int_0^t dt' d/dx[v(t') term_{k-1}(t')], evaluated on a
    shared time grid by cumulative trapezoidal quadrature, so later times
    always act to the left of earlier ones. Spatial derivatives are centred
    differences.

    If the term norms start growing with the order the sum is cut at the last
    shrinking term, ``diagnostics["diverging"]`` is set and a warning is issued.
    """
    if int(order) != order or order < 0:
        raise DomainError(f"order must be a nonnegative integer, got {order!r}")
    if int(quadrature_steps) != quadrature_steps or quadrature_steps < 1:
        raise DomainError(f"quadrature_steps must be a positive integer, got {quadrature_steps!r}")
    if not (math.isfinite(t_final) and t_final >= rho0.time):
        raise DomainError(f"t_final must be >= the initial time {rho0.time}, got {t_final!r}")

    grid = rho0.grid
    x = grid.centers
    times = np.linspace(rho0.time, t_final, quadrature_steps + 1)
    terms = [rho0.values.copy()]
    norms = [float(np.linalg.norm(rho0.values))]
    diverging = False
    if order > 0 and t_final > rho0.time:
        v = np.stack([velocity(x, float(tj), sampler) for tj in times])
        previous = np.broadcast_to(rho0.values, v.shape)
        for k in range(1, order + 1):
            integrand = -np.gradient(v * previous, grid.dx, axis=1)
            history = cumulative_trapezoid(integrand, times, axis=0, initial=0.0)
            norm = float(np.linalg.norm(history[-1]))
            if k >= 2 and norm > norms[-1]:
                diverging = True
                warnings.warn(f"time-ordered series diverging at order {k}; "
                              f"returning partial sum through order {k - 1}", RuntimeWarning)
                break
            terms.append(history[-1].copy())
            norms.append(norm)
            previous = history
    else:
        terms.extend(np.zeros_like(rho0.values) for _ in range(order))
        norms.extend(0.0 for _ in range(order))

    total = np.sum(terms, axis=0)
    out = DensityField(grid, total, t_final)
    out.diagnostics = dict(method="series", order=len(terms) - 1, requested_order=order,
                           quadrature_steps=quadrature_steps, term_norms=norms,
                           diverging=diverging, node_epsilon=sampler.node_epsilon)
    if return_terms:
        return out, terms
    return out


# --------------------------------------------------------------------------
# characteristics


def propagate_characteristics(rho0: DensityField, sampler: VelocitySampler, t_final: float,
                              n_traj: int | None = None, rtol: float = 1e-10,
                              atol: float | None = None) -> DensityField:
    """Carry rho0 along the characteristics dx/dt = v.

    Trajectories are traced backwards, with an adaptive Runge-Kutta 4(5)
    integrator, from ``n_traj + 1`` uniformly spaced end points spanning the
    grid (the cell faces when ``n_traj`` equals the number of cells). The
    probability between two neighbouring trajectories is conserved, so the
    density between them is the rho0 mass between their foot points divided
    by their final spacing, i.e. rho0 / J with J the trajectory-spacing
    Jacobian. The rho0 mass comes from the antiderivative of a monotone cubic
    interpolant of the input cells; finer trajectory sets are folded back onto
    the grid through a monotone interpolant of the cumulative mass.

    Tracing backwards from evenly spaced end points keeps every output cell
    resolved, both at fringe minima (where the flow spreads trajectories
    apart) and at the centre (where it squeezes a wide initial region).
    """
    grid = rho0.grid
    if n_traj is None:
        n_traj = grid.cells
    if int(n_traj) != n_traj or n_traj < grid.cells:
        raise DomainError(f"n_traj must be an integer >= the number of cells ({grid.cells}), got {n_traj!r}")
    if not (math.isfinite(t_final) and t_final >= rho0.time):
        raise DomainError(f"t_final must be >= the initial time {rho0.time}, got {t_final!r}")
    if t_final == rho0.time:
        out = rho0.copy()
        out.diagnostics = dict(method="characteristics", n_traj=n_traj, nfev=0)
        return out

    faces = grid.faces
    ends = faces if n_traj == grid.cells else np.linspace(grid.x_min, grid.x_max, n_traj + 1)
    if atol is None:
        atol = 1e-6 * grid.dx

    sol = solve_ivp(lambda t, y: velocity(y, t, sampler), (t_final, rho0.time), ends,
                    method="RK45", rtol=rtol, atol=atol)
    if not sol.success:
        raise SolverError(f"trajectory integration failed: {sol.message}",
                          dict(method="characteristics", t=float(sol.t[-1])))
    feet = sol.y[:, -1]
    gaps = np.diff(feet)
    if np.any(gaps <= 0):
        i = int(np.argmin(gaps))
        raise SolverError(f"trajectories crossed near x={ends[i]:.6e} m (foot point x0={feet[i]:.6e} m)",
                          dict(method="characteristics", x=float(ends[i]), x0=float(feet[i])))

    # cumulative rho0 mass, flat outside the grid (nothing enters through the boundary)
    centers = grid.centers
    knots = np.concatenate(([grid.x_min], centers, [grid.x_max]))
    samples = np.concatenate(([rho0.values[0]], rho0.values, [rho0.values[-1]]))
    with np.errstate(over="ignore"):  # PCHIP slope weights on underflowed tail samples
        cumulative = PchipInterpolator(knots, samples).antiderivative()
        mass_at = cumulative(np.clip(feet, grid.x_min, grid.x_max))
        if n_traj != grid.cells:
            mass_at = PchipInterpolator(ends, mass_at)(faces)
    values = np.clip(np.diff(mass_at), 0.0, None) / grid.dx

    spacing = np.diff(ends)
    out = DensityField(grid, values, t_final)
    out.diagnostics = dict(method="characteristics", n_traj=n_traj, nfev=int(sol.nfev),
                           rtol=rtol, node_epsilon=sampler.node_epsilon,
                           max_jacobian=float(np.max(spacing / gaps)),
                           min_jacobian=float(np.min(spacing / gaps)))
    return out
