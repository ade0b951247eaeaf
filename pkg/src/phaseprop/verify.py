"""Invariant checks run by ``phaseprop verify``.

``quick`` works on reduced grids and finishes in well under a minute;
``full`` uses the production grid (+-10 um, 16384 cells) and adds the
first-order convergence study.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .fringes import fringe_analysis
from .phaseflow import VelocitySampler, single_packet_velocity, velocity
from .propagator import (Grid, SolverOptions, born_field, initial_density,
                         propagate_characteristics, propagate_fv, propagate_series)
from .wavefield import DoubleSlitWave, gamma

X = 500e-9
SIGMA_RHO = 100e-9
SIGMA_ANOMALOUS = 101.5e-9
T_FINAL = 2e-9


@dataclass
class Check:
    name: str
    passed: bool
    value: float
    threshold: float
    detail: str = ""

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status}  {self.name:<34} {self.value:<12.4g} {self.threshold:<10.3g} {self.detail}"


def relative_linf(values, reference, fraction=0.01):
    mask = reference > fraction * reference.max()
    return float(np.max(np.abs(values[mask] - reference[mask]) / reference[mask]))


def relative_l2(values, reference, mask=None):
    if mask is None:
        mask = slice(None)
    return float(np.linalg.norm(values[mask] - reference[mask]) / np.linalg.norm(reference[mask]))


def asymmetry(values):
    return float(np.max(np.abs(values - values[::-1])) / np.max(values))


class _Runs:
    """Caches the propagations shared between checks."""

    def __init__(self, cells):
        self.grid = Grid.symmetric(10e-6, cells)
        self.rho0 = initial_density(DoubleSlitWave(X, SIGMA_RHO), self.grid)
        self._cache = {}

    def sampler(self, sigma_s, eps=1e-12):
        return VelocitySampler(DoubleSlitWave(X, sigma_s), node_epsilon=eps)

    def fv(self, sigma_s, scheme="upwind-MUSCL"):
        key = ("fv", sigma_s, scheme)
        if key not in self._cache:
            opts = SolverOptions(scheme=scheme)
            self._cache[key] = propagate_fv(self.rho0, self.sampler(sigma_s), T_FINAL, opts)
        return self._cache[key]

    def characteristics(self, sigma_s):
        key = ("mc", sigma_s)
        if key not in self._cache:
            # the unregularised field keeps the trajectories smooth out in the far tails
            self._cache[key] = propagate_characteristics(self.rho0, self.sampler(sigma_s, 0.0), T_FINAL)
        return self._cache[key]


def _checks(runs: _Runs, level: str) -> list[Callable[[], Check]]:
    born = born_field(DoubleSlitWave(X, SIGMA_RHO), runs.grid, T_FINAL)

    def conservation():
        worst = 0.0
        for s in (SIGMA_RHO, SIGMA_ANOMALOUS):
            d = runs.fv(s).diagnostics
            worst = max(worst, d["mass_drift"], d["leakage"])
            if d["min_value"] < -1e-15 * runs.fv(s).values.max():
                return Check("conservation", False, d["min_value"], 0.0, "negative density")
        return Check("conservation", worst < 1e-6, worst, 1e-6, "max(mass drift, leakage)")

    def symmetry():
        worst = max(asymmetry(runs.fv(s).values) for s in (SIGMA_RHO, SIGMA_ANOMALOUS))
        return Check("mirror symmetry", worst < 1e-10, worst, 1e-10, "max|rho(x)-rho(-x)|/peak")

    def born_limit():
        err = relative_linf(runs.fv(SIGMA_RHO).values, born.values)
        return Check("Born limit (FV vs |psi|^2)", err < 0.01, err, 0.01, "relative Linf, rho > 1% peak")

    def cross_agreement():
        worst = 0.0
        for s in (SIGMA_RHO, SIGMA_ANOMALOUS):
            worst = max(worst, relative_linf(runs.fv(s).values, runs.characteristics(s).values))
        return Check("FV vs characteristics", worst < 0.01, worst, 0.01, "relative Linf, both sigma_S")

    def anomaly():
        split = fringe_analysis(runs.fv(SIGMA_ANOMALOUS))
        plain = fringe_analysis(runs.fv(SIGMA_RHO))
        ok = split.central_is_minimum and plain.central_is_maximum
        return Check("central split (101.5 nm)", ok, split.split_depth, 0.0,
                     f"dip={split.central_is_minimum}, Born max={plain.central_is_maximum}")

    def series_short_time():
        t = 0.02e-9
        sampler = runs.sampler(SIGMA_RHO)
        fv = propagate_fv(runs.rho0, sampler, t)
        series = propagate_series(runs.rho0, sampler, t, order=3, quadrature_steps=100)
        err = relative_l2(series.values, fv.values)
        return Check("series order 3 vs FV (0.02 ns)", err < 1e-3, err, 1e-3, "relative L2")

    def analytic_velocity():
        wave = DoubleSlitWave(X, SIGMA_RHO)
        x = np.linspace(X - 6 * SIGMA_RHO, X + 6 * SIGMA_RHO, 1001)
        v = velocity(x, T_FINAL, VelocitySampler(wave, 0.0, which="upper"))
        exact = single_packet_velocity(x, T_FINAL, wave, X)
        err = float(np.max(np.abs(v - exact)) / np.max(np.abs(exact)))
        g = gamma(T_FINAL, SIGMA_RHO)
        ok = err < 1e-8 and abs(g - 11.576) < 1e-3
        return Check("single-packet velocity, gamma", ok, err, 1e-8, f"gamma={g:.4f}")

    def convergence():
        errs = []
        for cells in (4096, 8192):
            r = _Runs(cells)
            fv = r.fv(SIGMA_RHO, scheme="upwind")
            oracle = r.characteristics(SIGMA_RHO)
            mask = oracle.values > 0.01 * oracle.values.max()
            errs.append(relative_l2(fv.values, oracle.values, mask))
        ratio = errs[0] / errs[1]
        return Check("first-order convergence ratio", ratio >= 1.8, ratio, 1.8,
                     f"L2 errors {errs[0]:.3g} -> {errs[1]:.3g}")

    checks = [analytic_velocity, conservation, symmetry, born_limit, anomaly,
              cross_agreement, series_short_time]
    if level == "full":
        checks.append(convergence)
    return checks


def run_checks(level: str = "quick", echo: Callable[[str], None] | None = None,
               cells: int | None = None, only=None) -> list[Check]:
    """Run the checks of ``level``; ``cells`` overrides the grid, ``only`` picks checks by name."""
    if level not in ("quick", "full"):
        raise ValueError(f"level must be 'quick' or 'full', got {level!r}")
    runs = _Runs(cells or (4096 if level == "quick" else 16384))
    results = []
    for check in _checks(runs, level):
        if only is not None and check.__name__ not in only:
            continue
        start = time.perf_counter()
        try:
            result = check()
        except Exception as exc:  # a crashing check is a failing check
            result = Check(check.__name__, False, math.nan, math.nan, f"{type(exc).__name__}: {exc}")
        results.append(result)
        if echo:
            echo(result.line() + f"  [{time.perf_counter() - start:.1f}s]")
    return results
