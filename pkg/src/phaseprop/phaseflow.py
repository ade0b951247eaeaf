"""Phase of the double-slit wave function and the velocity field it induces.

The velocity is obtained from the exact identity

    d/dx arg(psi) = Im(psi' conj(psi)) / |psi|^2

so no phase unwrapping is ever needed.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .exceptions import DomainError, NodeError
from .wavefield import DoubleSlitWave, Which, peak_reference_density, prefactor, scaled_amplitudes


def phase(x, t: float, wave: DoubleSlitWave, which: Which = "both"):
    """Principal value of arg(psi) in (-pi, pi]; raises NodeError where psi vanishes."""
    s, _, _ = scaled_amplitudes(x, t, wave, which)
    if np.any(s == 0):
        at = np.asarray(x)[s == 0] if np.ndim(x) else x
        raise NodeError(f"phase undefined at a node of psi (x={at}, t={t})", x=at, t=t)
    value = np.angle(prefactor(t, wave) * s)
    value = np.where(value == -math.pi, math.pi, value)
    return float(value) if np.ndim(value) == 0 else value


@dataclass(frozen=True)
class VelocitySampler:
    """Velocity field v(x, t) = (1/m) dS/dx of a double-slit wave function.

    ``node_epsilon`` is a floor on |psi|^2 relative to the single-packet peak
    density at time t; it caps the velocity near nodes and in far tails.
    ``which`` restricts the wave to one packet (used for analytic checks).
    """

    wave: DoubleSlitWave
    node_epsilon: float = 1e-12
    which: Which = "both"

    def __post_init__(self):
        if not (math.isfinite(self.node_epsilon) and self.node_epsilon >= 0):
            raise DomainError(f"node_epsilon must be finite and >= 0, got {self.node_epsilon!r}")
        if self.which not in ("both", "upper", "lower"):
            raise DomainError(f"which must be 'both', 'upper' or 'lower', got {self.which!r}")

    @property
    def constants(self):
        return self.wave.constants

    def __call__(self, x, t: float):
        return velocity(x, t, self)

    def with_options(self, **changes) -> "VelocitySampler":
        params = dict(wave=self.wave, node_epsilon=self.node_epsilon, which=self.which)
        params.update(changes)
        return VelocitySampler(**params)


def velocity(x, t: float, sampler: VelocitySampler):
    """Transport velocity in m/s, odd in x for the symmetric double slit."""
    out, _ = velocity_and_density(x, t, sampler)
    return float(out) if out.ndim == 0 else out


def velocity_and_density(x, t: float, sampler: VelocitySampler):
    """Velocity and the unregularised |psi|^2 (1/m) from one closed-form evaluation.

    The density underflows to 0 far out in the tails, the velocity does not.
    """
    if not (math.isfinite(t) and t >= 0):
        raise DomainError(f"t must be finite and >= 0, got {t!r}")
    x = np.asarray(x, dtype=float)
    c = sampler.constants
    numerator, density, shift = _current_and_density(x, t, sampler.wave, sampler.which)
    # |psi|^2 / peak = density * exp(2 shift) / weight, weight = 2 for the superposition
    weight = 2.0 if sampler.which == "both" else 1.0
    scale = np.exp(2.0 * shift)
    born = (peak_reference_density(t, sampler.wave) / weight) * density * scale
    if t == 0:
        return np.zeros_like(x), born
    if sampler.node_epsilon > 0:
        with np.errstate(divide="ignore", over="ignore"):
            floor = (weight * sampler.node_epsilon) / scale
        density = np.maximum(density, floor)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = (c.hbar / c.mass) * numerator / density

    bad = ~np.isfinite(out)
    if np.any(bad):
        where = x[bad] if x.ndim else x
        raise NodeError(f"velocity diverges at a node of psi (x={where}, t={t})", x=where, t=t)
    return out, born


def _current_and_density(x, t, wave: DoubleSlitWave, which: Which):
    """Scaled Im(psi' conj(psi)) and |psi|^2 in real arithmetic.

    Both are multiplied by the same factor exp(-2 shift) (and the common
    prefactor), with shift the largest real packet exponent, so tails never
    underflow. Writing D = 4 sigma^2 (1 + gamma^2), packet j contributes the
    modulus r_j = exp(-d_j^2/D - shift) and phase gamma d_j^2 / D.
    """
    g = wave.gamma(t)
    D = 4.0 * wave.sigma**2 * (1.0 + g * g)
    X = wave.half_separation_X
    if which != "both":
        d = x - (X if which == "upper" else -X)
        return 2.0 * g * d / D, np.ones_like(d), -(d * d) / D
    d1 = x - X
    d2 = x + X
    # the exponents differ by a = (4 X / D) x, so the fainter packet has modulus
    # exp(-|a|) relative to the brighter one
    a = (4.0 * X / D) * x
    r = np.exp(-np.abs(a))
    rr = r * r
    delta = -g * a
    cos_d = np.cos(delta)
    right = x > 0
    numerator = (2.0 * g / D) * np.where(right, d1 + rr * d2, rr * d1 + d2) \
        + (4.0 / D) * r * (X * np.sin(delta) + g * x * cos_d)
    density = 1.0 + rr + 2.0 * r * cos_d
    qmin = np.where(right, d1 * d1, d2 * d2) / D
    return numerator, density, -qmin


def divergence_term(x, t: float, sampler: VelocitySampler, dx: float):
    """Centered difference (v(x+dx) - v(x-dx)) / (2 dx) of the velocity field."""
    if not (math.isfinite(dx) and dx > 0):
        raise DomainError(f"dx must be finite and > 0, got {dx!r}")
    x = np.asarray(x, dtype=float)
    out = (velocity(x + dx, t, sampler) - velocity(x - dx, t, sampler)) / (2.0 * dx)
    return float(out) if np.ndim(out) == 0 else out


def single_packet_velocity(x, t: float, wave: DoubleSlitWave, center: float):
    """Closed form hbar*gamma*(x-c) / (2 m sigma^2 (1+gamma^2)) for one packet centred at c."""
    c = wave.constants
    g = wave.gamma(t)
    return c.hbar * g * (np.asarray(x, dtype=float) - center) / (2.0 * c.mass * wave.sigma**2 * (1.0 + g * g))
