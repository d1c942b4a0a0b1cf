"""Time evolution of a breather.

A stationary state psi evolves as exp(-i lambda t) psi, so after one period
T = 2 pi / |lambda| it should return to itself.  Strang splitting conserves
mass to roundoff and energy to high accuracy; the return defect is the
splitting error and falls off like dt^2.
"""

from dnls_breathers.dynamics import ComplexLatticeState, conserved_drift, period_return_defect
from dnls_breathers.lattice import ModeSpec
from dnls_breathers.solver import ground_state, initial_guess, solve_breather

mode = ModeSpec.from_label("ST", 1)
res = solve_breather(initial_guess(ground_state(1, 1.0), mode, 0.2), mode, 1.0)
start = ComplexLatticeState.from_field(res.field)
for steps in (1024, 2048, 4096, 8192):
    defect, T, dt, end = period_return_defect(res.field, res.lam, 1.0, steps=steps)
    dN, dH = conserved_drift(start, end, 1.0)
    print(f"T={T:.4f} steps={steps:5d}: defect {defect:.3e}  dN {dN:.1e}  dH {dH:.1e}")
