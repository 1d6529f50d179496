"""
Where the parameter-to-observation map loses smoothness
=======================================================

The value of the solution at a fixed point x0, viewed as a function of the
interface parameters y, is smooth as long as the interface stays away from
x0 — and loses smoothness exactly when the interface crosses x0.  The set
of crossing parameters is an affine hyperplane in y-space whenever x0 lies
inside the deformation annulus.  This script walks straight segments in
parameter space that cross that hyperplane and compares finite-difference
profiles of the observation near and away from the crossing:

* strong diffusion contrast  -> the first derivative jumps (a kink), and
* pure wavenumber contrast   -> the first derivative stays continuous but
  the curvature spikes (the observation is C^1 there, not C^2).
"""

import numpy as np

from interface_surrogates.geometry import (
    DomainMap, InterfaceModel, kink_hyperplane, map_inverse,
)
from interface_surrogates.mesh import build_disk_mesh, build_square_mesh
from interface_surrogates.pde import (
    EllipticProblem, HelmholtzProblem, probe_kink, spike_stats,
)


def crossing_segment(dm, x0, d, seed=11):
    normal, offset = kink_hyperplane(dm, x0)
    rng = np.random.default_rng(seed)
    while True:
        y_a, y_b = rng.uniform(-0.9, 0.9, (2, d))
        if (offset - normal @ y_a) * (offset - normal @ y_b) < 0:
            return y_a, y_b


# --- diffusion problem, contrast 100 ----------------------------------------
model = InterfaceModel(r0=0.5, d=8, p=3.0, c=0.08)
dm = DomainMap(model)
x0 = np.array([0.505, 0.08])
y_a, y_b = crossing_segment(dm, x0, 8)

mesh = build_square_mesh(0.5, 0.125, 0.875, 0.03, 0.08)
problem = EllipticProblem(mesh, dm, alpha_i=100.0)
probe = probe_kink(problem, y_a, y_b, x0, n_steps=21, kind="value")
print(f"diffusion contrast 100, observation u(y; {x0.tolist()}):")
print(f"  segment crosses the interface hyperplane at t* = {probe['t_star']:.4f}")

# sanity: at t*, the pullback of x0 sits exactly on the nominal circle
y_star = y_a + probe["t_star"] * (y_b - y_a)
rho = np.hypot(*map_inverse(dm, y_star, x0[None, :])[0])
print(f"  pullback radius of x0 at t*: {rho:.10f} (nominal 0.5)")

st = spike_stats(probe)
print(f"  slope-jump size near t*: {st['d1'][0]:.3e}, "
      f"elsewhere {st['d1'][1]:.3e}, ratio {st['d1'][0] / st['d1'][1]:.1f}")
print("  -> first derivative jumps at the crossing\n")

# --- scattering problem, matched diffusion, wavenumber jump only ------------
r0, R = 0.01, 0.055
wavelength = 2.0 * np.pi / (200.0 * np.pi / 3.0)
model_h = InterfaceModel(r0=r0, d=8, p=3.0, c=0.08)
dm_h = DomainMap(model_h, r_inner=r0 / 4, r_outer=R)
x0_h = np.array([0.0101, 0.0012])
ya_h, yb_h = crossing_segment(dm_h, x0_h, 8)

print("wavenumber contrast only (alpha_i = 1, kappa_i/kappa_o = 0.8):")
d1_jumps = []
for div in (12, 24):
    mesh_h = build_disk_mesh(r0, r0 / 4, R, 0.02, wavelength / div,
                             wavelength / 12)
    problem_h = HelmholtzProblem(mesh_h, dm_h, 1.0, 0.8 * 200 * np.pi / 3,
                                 200 * np.pi / 3)
    probe_h = probe_kink(problem_h, ya_h, yb_h, x0_h, n_steps=41,
                         kind="amplitude")
    st_h = spike_stats(probe_h)
    d1_jumps.append(st_h["d1"][0])
    if div == 12:
        print(f"  crossing at t* = {probe_h['t_star']:.4f}")
        print(f"  curvature-jump size near t*: {st_h['d2'][0]:.3e}, "
              f"elsewhere {st_h['d2'][1]:.3e}, "
              f"ratio {st_h['d2'][0] / st_h['d2'][1]:.0f}")

# The small residual first-derivative jump is a discretization artifact
# (the pulled-back evaluation point crosses the nominal mesh ring); unlike
# the genuine contrast kink above, it shrinks when the interface zone is
# refined.
print(f"  apparent slope jump, h and h/2: {d1_jumps[0]:.3e}, "
      f"{d1_jumps[1]:.3e} (shrinks {d1_jumps[0] / d1_jumps[1]:.1f}x -> artifact)")
print("  -> first derivative continuous, second derivative spikes (C^1)")
