"""Continuum ground states and their unit-mass rescaling.

The 1D cubic case has the closed form sech(x/2)/sqrt(2) at lambda = -1/4.
Shooting reproduces it, and rescaling to unit mass moves lambda to -1/16.
In 2D with p = 1/2 there is no closed form, so shooting is the only route.
"""

import numpy as np

from dnls_breathers.continuum import (
    continuum_functionals,
    explicit_ground_state_1d,
    ode_residual,
    rescale_to_unit_mass,
    shoot_radial_ground_state,
)

exact = explicit_ground_state_1d()
shot = shoot_radial_ground_state(1, 1.0, exact.lambda_c)
x = np.linspace(0, 40, 2001)
print(f"1D p=1: lambda={exact.lambda_c}, amplitude={exact.amplitude:.15f}")
print(f"  shooting vs closed form, max |diff| = {np.max(np.abs(shot(x) - exact(x))):.2e}")
print(f"  pointwise ODE residual = {np.max(np.abs(ode_residual(exact)[1])):.2e}")

H, N = continuum_functionals(exact)
print(f"  H = {H:.12f}, N = {N:.12f}")
unit, s = rescale_to_unit_mass(exact)
print(f"  unit mass: s = {s:.12f}, lambda = {unit.lambda_c:.12f}, N = {continuum_functionals(unit)[1]:.12f}")

prof2 = shoot_radial_ground_state(2, 0.5, -1.0)
unit2, s2 = rescale_to_unit_mass(prof2)
print(f"2D p=1/2: amplitude at lambda=-1 is {prof2.amplitude:.10f}")
print(f"  unit mass: lambda = {unit2.lambda_c:.10f}, amplitude = {unit2.amplitude:.10f}")
for r in (0.0, 5.0, 10.0, 20.0, 40.0):
    print(f"  psi({r:4.1f}) = {float(unit2(r)):.6e}")
