"""Extrema, central-split metric and Born discrepancy of an interference pattern."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .exceptions import ConfigError
from .propagator import DensityField

HIGH_DENSITY_FRACTION = 0.01


@dataclass
class FringeReport:
    maxima: list = field(default_factory=list)  # (position m, height 1/m), sorted by position
    minima: list = field(default_factory=list)
    central_value: float = math.nan
    central_is_minimum: bool = False
    central_is_maximum: bool = False
    split_depth: float = 0.0
    fringe_spacing_estimate: float | None = None

    def as_dict(self) -> dict:
        return dict(
            n_maxima=len(self.maxima),
            n_minima=len(self.minima),
            central_value=self.central_value,
            central_is_minimum=self.central_is_minimum,
            central_is_maximum=self.central_is_maximum,
            split_depth=self.split_depth,
            fringe_spacing_estimate=self.fringe_spacing_estimate,
        )


def _refine(x, y, i, dx):
    """Vertex of the parabola through (i-1, i, i+1)."""
    if i <= 0 or i >= len(y) - 1:
        return float(x[i]), float(y[i])
    a, b, c = y[i - 1], y[i], y[i + 1]
    curvature = a - 2.0 * b + c
    if curvature == 0:
        return float(x[i]), float(b)
    offset = 0.5 * (a - c) / curvature
    offset = min(max(offset, -1.0), 1.0)
    return float(x[i] + offset * dx), float(b - 0.25 * (a - c) * offset)


def _extrema(x, y, dx, threshold):
    """Interior extrema from sign changes of the first differences; flat runs count once."""
    slope = np.sign(np.diff(y))
    nonzero = np.flatnonzero(slope)
    maxima, minima = [], []
    for k_prev, k_next in zip(nonzero[:-1], nonzero[1:]):
        s_prev, s_next = slope[k_prev], slope[k_next]
        if s_prev == s_next:
            continue
        first = k_prev + 1  # first cell of the flat run between the two slopes
        last = k_next
        if y[first] < threshold:
            continue
        if last - first <= 1:
            pos, height = _refine(x, y, first, dx)
        else:
            pos, height = 0.5 * (x[first] + x[last]), float(y[first])
        (maxima if s_prev > 0 else minima).append((pos, height))
    return maxima, minima


def _central_indices(x):
    left = int(np.searchsorted(x, 0.0, side="right")) - 1
    right = int(np.searchsorted(x, 0.0, side="left"))
    return left, right


def fringe_analysis(rho: DensityField, min_relative_height: float = 1e-6) -> FringeReport:
    """Locate maxima and minima and quantify the dip at x = 0.

    ``split_depth`` is 1 - rho(0) / (higher of the two maxima flanking the
    centre) when the centre is a strict local minimum, else 0. Extrema lower
    than ``min_relative_height`` times the peak are ignored.
    """
    x = rho.grid.centers
    y = rho.values
    dx = rho.grid.dx
    peak = float(y.max())
    report = FringeReport()
    if not peak > 0:
        return report
    maxima, minima = _extrema(x, y, dx, min_relative_height * peak)
    report.maxima = maxima
    report.minima = minima
    if len(maxima) >= 3:
        report.fringe_spacing_estimate = float(np.median(np.diff([p for p, _ in maxima])))

    if not (x[0] < 0.0 < x[-1]):
        return report
    left, right = _central_indices(x)
    report.central_value = float(np.interp(0.0, x, y))
    if left < 1 or right > len(y) - 2:
        return report
    report.central_is_minimum = bool(y[left - 1] > y[left] and y[right + 1] > y[right])
    report.central_is_maximum = bool(y[left - 1] < y[left] and y[right + 1] < y[right])
    if report.central_is_minimum:
        flank = [h for p, h in maxima if p < 0][-1:] + [h for p, h in maxima if p > 0][:1]
        if flank:
            depth = 1.0 - report.central_value / max(flank)
            report.split_depth = float(min(max(depth, 0.0), 1.0))
    return report


@dataclass
class DiscrepancyReport:
    linf_relative: float
    l2_relative: float
    difference: np.ndarray
    high_density: np.ndarray

    def as_dict(self) -> dict:
        return dict(linf_relative=self.linf_relative, l2_relative=self.l2_relative)


def born_discrepancy(rho: DensityField, reference: DensityField,
                     high_density_fraction: float = HIGH_DENSITY_FRACTION) -> DiscrepancyReport:
    """Relative L-infinity error on cells where the reference exceeds a fraction of its
    peak, global relative L2 error and the per-cell difference rho - reference."""
    if rho.grid != reference.grid:
        raise ConfigError(f"grid mismatch: {rho.grid} vs {reference.grid}")
    if rho.time != reference.time:
        raise ConfigError(f"time mismatch: {rho.time} vs {reference.time}")
    ref = reference.values
    diff = rho.values - ref
    mask = ref > high_density_fraction * ref.max()
    linf = float(np.max(np.abs(diff[mask]) / ref[mask])) if mask.any() else 0.0
    norm = float(np.linalg.norm(ref))
    l2 = float(np.linalg.norm(diff) / norm) if norm > 0 else float(np.linalg.norm(diff))
    return DiscrepancyReport(linf, l2, diff, mask)
