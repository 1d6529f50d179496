"""
Plane-wave scattering off a penetrable cylinder, checked against the
separable series solution
====================================================================

For the nominal (circular) scatterer the transmission problem has an
analytic solution by separation of variables in Bessel/Hankel functions.
This script solves the same configuration with the finite element solver
(absorbing outer annulus instead of an exact radiation condition) and
compares field amplitudes at the interface point.
"""

import numpy as np

from interface_surrogates import pipeline as pl
from interface_surrogates.oracles import scattering_series
from interface_surrogates.pde import evaluate_qoi

K0 = pl.K0     # driving wavenumber 200*pi/3


def fem_amplitude(alpha_i, kappa_i):
    cfg = pl.ExperimentConfig(problem="helmholtz", d=8, alpha_i=alpha_i,
                              kappa_o=K0, kappa_i=kappa_i, n_points=1)
    ws = pl.Workspace(cfg)
    return ws.solve(np.zeros(cfg.d))[0]


print("amplitude |u| at x = (r0, 0), nominal circular scatterer")
print(f"{'alpha_i':>8} {'kappa_i/kappa_o':>16} {'fem':>10} "
      f"{'series':>10} {'rel err':>9}")
for alpha_i, ratio in ((10.0, 0.8), (100.0, 0.8), (1.0, 0.08)):
    fem = fem_amplitude(alpha_i, ratio * K0)
    field = scattering_series(alpha_i, ratio * K0, K0, r0=0.01)
    ref = abs(field(np.array([[0.01, 0.0]]))[0])
    err = abs(fem - ref) / abs(ref)
    print(f"{alpha_i:8.1f} {ratio:16.2f} {fem:10.5f} {ref:10.5f} {err:9.2e}")

# --- silent scatterer --------------------------------------------------------
# With matched material (alpha_i = 1, kappa_i = kappa_o) nothing scatters;
# the computed field must coincide with the incident plane wave.
cfg = pl.ExperimentConfig(problem="helmholtz", d=8, alpha_i=1.0,
                          kappa_o=K0, kappa_i=K0, n_points=1)
ws = pl.Workspace(cfg)
amp = ws.solve(np.zeros(8))[0]
print(f"\nmatched material: |u|(r0, 0) = {amp:.6f} (incident amplitude 1)")

# --- a random scatterer shape ------------------------------------------------
# With matched material the exact field stays the plane wave no matter how
# the interface deforms, so any deviation from 1 here is the discretization
# error of the pulled-back (mapped-coefficient) solve at this mesh size.
y = pl.sample_parameters(3, 0, 8)
q = evaluate_qoi(ws.problem.solve(y), ws.dm, y, cfg.eval_points(), "amplitude")
print(f"perturbed interface, same material: |u|(r0, 0) = {q[0]:.6f}")
print("  (deviation from 1 = mapped-solve discretization error)")
