import math

import numpy as np
import pytest
from scipy.integrate import trapezoid

from phaseprop.exceptions import DomainError
from phaseprop.wavefield import (DoubleSlitWave, PhysicalConstants, born_density, dpsi_dx,
                                 fringe_spacing, gamma, normalization_defect, peak_reference_density,
                                 prefactor, psi_double, psi_single, scaled_amplitudes,
                                 single_packet_density, spread_width)

# values typed in by hand, not taken from the package
HBAR = 1.054571817e-34
M_E = 9.1093837015e-31


def packet_by_hand(x, t, sigma, center):
    g = HBAR * t / (2 * M_E * sigma**2)
    z = 1 + 1j * g
    return (2 * math.pi) ** -0.25 * (sigma * z) ** -0.5 * np.exp(-(x - center) ** 2 / (4 * sigma**2 * z))


def test_gamma_zero_time():
    assert gamma(0.0, 100e-9) == 0.0


@pytest.mark.parametrize("sigma, expected", [(100e-9, 11.576), (101.5e-9, 11.237)])
def test_gamma_reference_values(sigma, expected):
    assert gamma(2e-9, sigma) == pytest.approx(expected, abs=1e-3)
    assert gamma(2e-9, sigma) == pytest.approx(HBAR * 2e-9 / (2 * M_E * sigma**2), rel=1e-15)


@pytest.mark.parametrize("t, sigma", [(-1e-9, 1e-7), (math.nan, 1e-7), (math.inf, 1e-7),
                                      (1e-9, 0.0), (1e-9, -1e-7), (1e-9, math.nan)])
def test_gamma_rejects_bad_inputs(t, sigma):
    with pytest.raises(DomainError):
        gamma(t, sigma)


@pytest.mark.parametrize("kwargs", [dict(hbar=0.0), dict(mass=-1.0), dict(mass=math.inf)])
def test_constants_must_be_positive(kwargs):
    with pytest.raises(DomainError):
        PhysicalConstants(**kwargs)


def test_wave_rejects_nonpositive_geometry():
    with pytest.raises(DomainError):
        DoubleSlitWave(0.0, 1e-7)
    with pytest.raises(DomainError):
        DoubleSlitWave(5e-7, -1e-7)


def test_single_packet_peak_at_t0(wave):
    value = psi_single(500e-9, 0.0, wave, "upper")
    assert isinstance(value, complex)
    assert value.imag == 0.0
    assert value.real == pytest.approx((2 * math.pi) ** -0.25 * (100e-9) ** -0.5, rel=1e-14)
    assert abs(value) ** 2 == pytest.approx(3.9894e6, rel=1e-4)


def test_initial_wave_is_real(wave):
    x = np.linspace(-3e-6, 3e-6, 101)
    assert np.all(psi_double(x, 0.0, wave).imag == 0.0)


def test_double_slit_centre_value_at_t0(wave):
    expected = math.sqrt(2) * (2 * math.pi) ** -0.25 * (100e-9) ** -0.5 * math.exp(-6.25)
    assert psi_double(0.0, 0.0, wave).real == pytest.approx(expected, rel=1e-13)
    assert expected == pytest.approx(2824.5 * math.exp(-6.25), rel=1e-4)


@pytest.mark.parametrize("t", [0.0, 0.3e-9, 2e-9])
def test_packets_match_hand_formula(wave, t):
    x = np.linspace(-4e-6, 4e-6, 401)
    up = packet_by_hand(x, t, 100e-9, 500e-9)
    lw = packet_by_hand(x, t, 100e-9, -500e-9)
    np.testing.assert_allclose(psi_single(x, t, wave, "upper"), up, rtol=1e-12, atol=1e-9)
    np.testing.assert_allclose(psi_double(x, t, wave), (up + lw) / math.sqrt(2), rtol=1e-12, atol=1e-9)


def test_prefactor_uses_principal_root(wave):
    c = prefactor(2e-9, wave)
    assert c.real > 0 and c.imag < 0


def test_mirror_symmetry_of_density(wave):
    x = np.linspace(-5e-6, 5e-6, 1001)
    rho = born_density(x, 1.3e-9, wave)
    np.testing.assert_allclose(rho, rho[::-1], rtol=1e-13)


def test_upper_and_lower_packets_swap_under_reflection(wave):
    x = np.linspace(-2e-6, 2e-6, 81)
    np.testing.assert_allclose(psi_single(-x, 0.7e-9, wave, "upper"), psi_single(x, 0.7e-9, wave, "lower"),
                               rtol=1e-14)


@pytest.mark.parametrize("t", [0.0, 1e-9, 2e-9])
def test_norm_equals_one_plus_overlap(wave, t):
    x = np.linspace(-40e-6, 40e-6, 400001)
    norm = trapezoid(born_density(x, t, wave), x)
    assert norm == pytest.approx(1.0 + normalization_defect(wave), abs=1e-9)
    assert normalization_defect(wave) == pytest.approx(math.exp(-12.5))


def test_derivative_matches_finite_difference_second_order(wave):
    x, t = 0.3e-6, 1e-9
    exact = dpsi_dx(x, t, wave)
    errors = []
    for h in (0.4e-9, 0.2e-9):
        fd = (psi_double(x + h, t, wave) - psi_double(x - h, t, wave)) / (2 * h)
        errors.append(abs(fd - exact))
    assert errors[1] / abs(exact) < 1e-6
    assert errors[0] / errors[1] == pytest.approx(4.0, rel=0.05)


def test_fringe_spacing_reference_value(wave):
    g = HBAR * 2e-9 / (2 * M_E * 1e-14)
    by_hand = 2 * math.pi * 1e-14 * (1 + g * g) / (500e-9 * g)
    assert fringe_spacing(2e-9, wave) == pytest.approx(by_hand, rel=1e-14)
    assert fringe_spacing(2e-9, wave) == pytest.approx(1.466e-6, rel=1e-3)
    assert fringe_spacing(0.0, wave) == math.inf


def test_spread_and_peak_are_consistent(wave):
    t = 2e-9
    sd = spread_width(t, wave)
    assert peak_reference_density(t, wave) == pytest.approx(1 / (math.sqrt(2 * math.pi) * sd))
    assert single_packet_density(500e-9, t, wave, "upper") == pytest.approx(peak_reference_density(t, wave))


def test_t0_density_is_two_humps(wave):
    x = np.linspace(-2e-6, 2e-6, 4001)
    rho = born_density(x, 0.0, wave)
    peaks = x[1:-1][(rho[1:-1] > rho[:-2]) & (rho[1:-1] > rho[2:])]
    np.testing.assert_allclose(peaks, [-500e-9, 500e-9], atol=2e-9)
    assert born_density(500e-9, 0.0, wave) == pytest.approx(0.5 * 3.98942e6, rel=1e-4)


def test_scaled_amplitudes_survive_far_tails(wave):
    x = np.array([-30e-6, 30e-6])
    assert np.all(born_density(x, 0.0, wave) == 0.0)  # plain evaluation underflows
    s, ds, shift = scaled_amplitudes(x, 0.0, wave)
    assert np.all(np.abs(s) > 0.5) and np.all(np.isfinite(ds))
    assert np.all(shift < -700)


def test_scaled_amplitudes_reassemble_psi(wave):
    x = np.linspace(-3e-6, 3e-6, 61)
    t = 1.1e-9
    s, ds, shift = scaled_amplitudes(x, t, wave)
    c = prefactor(t, wave) / math.sqrt(2)
    np.testing.assert_allclose(c * s * np.exp(shift), psi_double(x, t, wave), rtol=1e-12, atol=1e-12)
    np.testing.assert_allclose(c * ds * np.exp(shift), dpsi_dx(x, t, wave), rtol=1e-12, atol=1e-3)


def test_rejects_unknown_packet(wave):
    with pytest.raises(ValueError):
        psi_single(0.0, 0.0, wave, "middle")
    with pytest.raises(DomainError):
        psi_double(0.0, -1.0, wave)
