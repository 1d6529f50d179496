"""Analytic reference solutions used to validate the finite element solvers.

These never call the mesh, assembly, or solver code: the radial two-zone
profile comes from integrating the 1-D radial ODE in closed form, the
manufactured pair is symbolic, and the scattering reference is a Bessel
series with transmission conditions enforced per angular mode.
"""

import numpy as np
from scipy.special import h1vp, hankel1, jv, jvp


def manufactured_poisson():
    """(u, f) with -Lap(u) = f on the square and u = 0 on its boundary."""

    def u(x):
        return np.sin(np.pi * x[..., 0]) * np.sin(np.pi * x[..., 1])

    def f(x):
        return 2 * np.pi**2 * np.sin(np.pi * x[..., 0]) * np.sin(np.pi * x[..., 1])

    return u, f


def radial_two_zone(alpha_i, r0, R, f_const=1.0, u_R=0.0):
    """Closed-form radial solution of -div(alpha grad u) = f on a disk.

    alpha = alpha_i inside the circle r0, 1 outside; u(R) = u_R.  In each
    zone the ODE -(alpha rho u')' = f rho integrates to
    u = A - f rho^2 / (4 alpha) + C log(rho), with C = 0 inside by
    regularity at the origin; the interface conditions [u] = [alpha u'] = 0
    and the boundary value fix the remaining constants.
    """
    # unknowns: A_in, A_out, C_out
    # continuity at r0:   A_in - f r0^2/(4 a) = A_out - f r0^2/4 + C log(r0)
    # flux at r0:         a(-f r0/(2 a)) = -f r0/2 + C/r0  (flux = alpha u')
    # boundary at R:      A_out - f R^2/4 + C log(R) = u_R
    M = np.array([
        [1.0, -1.0, -np.log(r0)],
        [0.0, 0.0, 1.0 / r0],
        [0.0, 1.0, np.log(R)],
    ])
    rhs = np.array([
        f_const * r0**2 / (4 * alpha_i) - f_const * r0**2 / 4,
        -f_const * r0 / 2 + f_const * r0 / 2,
        u_R + f_const * R**2 / 4,
    ])
    A_in, A_out, C_out = np.linalg.solve(M, rhs)

    def u(x):
        x = np.asarray(x, dtype=float)
        rho = np.hypot(x[..., 0], x[..., 1])
        inner = A_in - f_const * rho**2 / (4 * alpha_i)
        with np.errstate(divide="ignore"):
            outer = A_out - f_const * rho**2 / 4 + C_out * np.log(
                np.where(rho > 0, rho, 1.0))
        return np.where(rho <= r0, inner, outer)

    return u


def scattering_series(alpha_i, kappa_i, kappa_o, r0, n_terms=None, tail=1e-12):
    """Total field for a plane wave hitting a penetrable disk of radius r0.

    The incident wave exp(i kappa_o x1) expands in Bessel modes; inside the
    disk the operator is alpha_i Lap(u) + kappa_i^2 u, so the interior
    wavenumber is kappa_i / sqrt(alpha_i).  Per mode n, continuity of u and
    of alpha du/drho across the interface yields a 2x2 system for the
    scattered (Hankel) and transmitted (Bessel) coefficients.  Returns a
    callable evaluating the total field at (..., 2) points; the series is
    truncated once coefficients fall below `tail` relative to the incident
    mode amplitude, or at n_terms if given.
    """
    k_in = kappa_i / np.sqrt(alpha_i)
    a = r0
    if n_terms is None:
        n_terms = max(20, int(np.ceil(2 * kappa_o * a)) + 20)

    orders = []
    a_scat = []
    b_trans = []
    peak = 0.0
    for n in range(n_terms + 1):
        jo, djo = jv(n, kappa_o * a), jvp(n, kappa_o * a)
        ho, dho = hankel1(n, kappa_o * a), h1vp(n, kappa_o * a)
        ji, dji = jv(n, k_in * a), jvp(n, k_in * a)
        inc = 1j**n
        # [u] = 0:            inc*jo + A ho = B ji
        # [alpha du/drho]=0:  kappa_o (inc*djo + A dho) = alpha_i k_in B dji
        M = np.array([[ho, -ji],
                      [kappa_o * dho, -alpha_i * k_in * dji]])
        rhs = -inc * np.array([jo, kappa_o * djo])
        A_n, B_n = np.linalg.solve(M, rhs)
        orders.append(n)
        a_scat.append(A_n)
        b_trans.append(B_n)
        # contribution of this mode at the interface radius; the raw
        # coefficients are a bad tail measure (B_n stays O(1), its Bessel
        # factor decays, while roundoff in A_n meets Hankel growth)
        weight = abs(A_n * ho) + abs(B_n * ji) + abs(jo)
        peak = max(peak, weight)
        if n > kappa_o * a + 5 and weight < tail * peak:
            break
    orders = np.array(orders)
    a_scat = np.array(a_scat)
    b_trans = np.array(b_trans)

    def total_field(x):
        # outside: exact incident wave plus the scattered Hankel series
        # (summing the incident wave as Bessel modes would need orders up
        # to kappa_o * rho, far beyond the scatterer-sized truncation)
        x = np.atleast_2d(np.asarray(x, dtype=float))
        rho = np.hypot(x[:, 0], x[:, 1])
        theta = np.arctan2(x[:, 1], x[:, 0])
        out = np.zeros(rho.shape, dtype=complex)
        inside = rho < a
        outside = ~inside
        out[outside] = np.exp(1j * kappa_o * x[outside, 0])
        for n, A_n, B_n in zip(orders, a_scat, b_trans):
            # cos expansion collapses the +-n pair for incidence along x1
            factor = 1.0 if n == 0 else 2.0
            angular = factor * np.cos(n * theta)
            if np.any(inside):
                out[inside] += B_n * jv(n, k_in * rho[inside]) * angular[inside]
            if np.any(outside):
                out[outside] += A_n * hankel1(n, kappa_o * rho[outside]) \
                    * angular[outside]
        return out

    total_field.orders = orders
    total_field.scattered = a_scat
    total_field.transmitted = b_trans
    return total_field
