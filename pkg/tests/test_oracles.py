"""Internal consistency of the analytic references (PDE residuals by finite
differences, transmission conditions, energy conservation per mode)."""

import numpy as np
import pytest

from interface_surrogates.oracles import (
    manufactured_poisson,
    radial_two_zone,
    scattering_series,
)


def test_manufactured_pair_consistent():
    u, f = manufactured_poisson()
    rng = np.random.default_rng(0)
    pts = rng.uniform(-0.9, 0.9, (50, 2))
    h = 1e-4
    ex, ey = np.array([h, 0.0]), np.array([0.0, h])
    lap = (u(pts + ex) + u(pts - ex) + u(pts + ey) + u(pts - ey) - 4 * u(pts)) / h**2
    assert np.allclose(-lap, f(pts), rtol=1e-5, atol=1e-6)
    edge = np.array([[1.0, 0.3], [-1.0, 0.5], [0.2, 1.0], [0.7, -1.0]])
    assert np.allclose(u(edge), 0.0, atol=1e-14)


@pytest.mark.parametrize("alpha_i", [0.1, 1.0, 10.0, 100.0])
def test_radial_two_zone_satisfies_pde(alpha_i):
    r0, R = 0.5, 1.0
    u = radial_two_zone(alpha_i, r0, R)
    rho = np.concatenate([np.linspace(0.05, 0.45, 20), np.linspace(0.55, 0.95, 20)])
    pts = np.stack([rho, np.zeros_like(rho)], axis=1)
    h = 1e-5

    def u_r(r):
        return u(np.stack([r, np.zeros_like(r)], axis=1))

    # -(alpha rho u')' / rho = f with f = 1
    alpha = np.where(rho < r0, alpha_i, 1.0)
    du = (u_r(rho + h) - u_r(rho - h)) / (2 * h)
    d2u = (u_r(rho + h) - 2 * u_r(rho) + u_r(rho - h)) / h**2
    resid = -alpha * (d2u + du / rho)
    assert np.allclose(resid, 1.0, atol=1e-4)

    # continuity and flux continuity at the interface
    eps = 1e-9
    assert u_r(np.array([r0 - eps]))[0] == pytest.approx(
        u_r(np.array([r0 + eps]))[0], abs=1e-7)
    h2 = 1e-6
    flux_in = alpha_i * (u_r(np.array([r0 - eps])) - u_r(np.array([r0 - eps - h2]))) / h2
    flux_out = (u_r(np.array([r0 + eps + h2])) - u_r(np.array([r0 + eps]))) / h2
    assert flux_in[0] == pytest.approx(flux_out[0], rel=1e-4)

    # boundary value
    assert u_r(np.array([R]))[0] == pytest.approx(0.0, abs=1e-12)


def test_radial_two_zone_worked_uniform():
    # alpha = 1 everywhere collapses to the Poisson bubble (R^2 - rho^2)/4
    u = radial_two_zone(1.0, 0.5, 1.0)
    rho = np.linspace(0.0, 1.0, 11)
    pts = np.stack([rho * 0.6, rho * 0.8], axis=1)
    assert np.allclose(u(pts), (1.0 - rho**2) / 4, atol=1e-12)


def test_scattering_no_contrast_is_incident():
    kappa = 200 * np.pi / 3
    field = scattering_series(1.0, kappa, kappa, 0.01)
    rng = np.random.default_rng(2)
    rho = rng.uniform(0.001, 0.05, 40)
    th = rng.uniform(-np.pi, np.pi, 40)
    pts = rho[:, None] * np.stack([np.cos(th), np.sin(th)], axis=1)
    vals = field(pts)
    incident = np.exp(1j * kappa * pts[:, 0])
    assert np.max(np.abs(vals - incident)) < 1e-9
    assert np.max(np.abs(field.scattered)) < 1e-12


@pytest.mark.parametrize("alpha_i,ratio", [(10.0, 0.8), (100.0, 0.8), (1.0, 0.08), (2.0, 1.2)])
def test_scattering_energy_conservation(alpha_i, ratio):
    # lossless scatterer: per-mode outgoing amplitude equals incoming
    kappa_o = 200 * np.pi / 3
    field = scattering_series(alpha_i, ratio * kappa_o, kappa_o, 0.01)
    inc = 1j ** field.orders.astype(float)
    s = 1.0 + 2.0 * field.scattered / inc
    assert np.allclose(np.abs(s), 1.0, atol=1e-9)


def test_scattering_transmission_conditions():
    kappa_o = 200 * np.pi / 3
    alpha_i, kappa_i, r0 = 10.0, 0.8 * kappa_o, 0.01
    field = scattering_series(alpha_i, kappa_i, kappa_o, r0)
    th = np.linspace(-np.pi, np.pi, 13)[:-1]
    eps, h = 1e-9, 1e-7

    def at(rho):
        return field(rho[:, None] * np.stack([np.cos(th), np.sin(th)], axis=1))

    rin, rout = np.full_like(th, r0 - eps), np.full_like(th, r0 + eps)
    assert np.allclose(at(rin), at(rout), atol=1e-6 * np.abs(at(rout)).max())
    flux_in = alpha_i * (at(rin) - at(rin - h)) / h
    flux_out = (at(rout + h) - at(rout)) / h
    scale = np.abs(flux_out).max()
    assert np.allclose(flux_in, flux_out, atol=2e-4 * scale)


def test_scattering_symmetric_in_theta():
    kappa_o = 200 * np.pi / 3
    field = scattering_series(5.0, 0.5 * kappa_o, kappa_o, 0.01)
    th = np.linspace(0.1, 3.0, 9)
    up = 0.02 * np.stack([np.cos(th), np.sin(th)], axis=1)
    dn = 0.02 * np.stack([np.cos(th), -np.sin(th)], axis=1)
    assert np.allclose(field(up), field(dn), atol=1e-12)
