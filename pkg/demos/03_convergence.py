"""Convergence of lattice breathers to the sampled continuum profile.

Errors shrink like mu^2 in both norms.  The fitted log-log slope is printed
for each mode; the 2D ladder is kept coarse so the script runs in minutes.
"""

from dnls_breathers.lattice import ModeSpec
from dnls_breathers.solver import convergence_study

for dim, p, mus in ((1, 1.0, [0.4, 0.2, 0.1, 0.05]), (2, 0.5, [0.7, 0.5, 0.35])):
    for mode in ModeSpec.all_modes(dim):
        rep = convergence_study(mode, p, mus)
        print(f"{dim}D {mode.label}: qmu order {rep.fitted_order_qmu:.3f}, sup order {rep.fitted_order_sup:.3f}")
        for row in rep.rows:
            print(f"   mu={row['mu']:<5} K={row['radius']:<4} qmu={row['qmu_error']:.3e} "
                  f"sup={row['sup_error']:.3e} lambda={row['lambda']:.10f}")
