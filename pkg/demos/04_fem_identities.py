"""Lattice sums as integrals of the piecewise linear interpolant.

The Dirichlet form equals the gradient energy of the P1 interpolant exactly;
the discrete mass equals the L2 mass plus a mu^2/6 gradient correction.
The quadrature remainder for the nonlinear term decays like mu^2.
"""

import numpy as np

from dnls_breathers.continuum import shoot_radial_ground_state
from dnls_breathers.fem import (
    FemFunction,
    euler_maclaurin_residual,
    gradient_energy,
    l2_mass_identity_check,
    project,
    quadrature_gradient_energy,
)
from dnls_breathers.lattice import LatticeField, ModeSpec
from dnls_breathers.solver import log_log_slope

rng = np.random.default_rng(0)
for dim in (1, 2):
    for mode in ModeSpec.all_modes(dim):
        f = LatticeField(dim, 0.3, 5, rng.uniform(-1, 1, (11,) * dim))
        F = FemFunction.from_mode(f, mode)
        lhs, rhs = l2_mass_identity_check(F)
        print(f"{dim}D {mode.label:3}: grad {gradient_energy(F):.15f} vs {quadrature_gradient_energy(F):.15f}; "
              f"mass {lhs:.15f} vs {rhs:.15f}")

mus = [0.4, 0.2, 0.1, 0.05]
for dim, p in ((1, 1.0), (2, 0.5)):
    prof = shoot_radial_ground_state(dim, p, -1.0)
    mode = ModeSpec.all_modes(dim)[0]
    R = prof.cutoff_radius(1e-6)
    res = [abs(euler_maclaurin_residual(FemFunction.from_mode(project(prof, mu, int(np.ceil(R / mu)), mode), mode),
                                        2 * p)) for mu in mus]
    print(f"{dim}D nonlinear quadrature remainder: " + ", ".join(f"{r:.2e}" for r in res)
          + f"; slope {log_log_slope(mus, res):.3f}")
