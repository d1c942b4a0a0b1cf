"""Discrete breathers of the DNLS lattice near the continuum limit.

Lattice fields and functionals, the continuum ground state, the P1 bridge
between them, a bordered Newton solver for the stationary problem, and a
split-step integrator for the time-periodic orbit.
"""

from .continuum import (
    ContinuumProfile,
    ShootingError,
    continuum_functionals,
    dilate,
    explicit_ground_state_1d,
    ode_residual,
    rescale_to_unit_mass,
    shoot_radial_ground_state,
)
from .dynamics import ComplexLatticeState, conserved_drift, energy, evolve, mass, period_return_defect
from .fem import (
    FemFunction,
    euler_maclaurin_residual,
    evaluate,
    gradient_energy,
    h1_error,
    l2_mass_identity_check,
    project,
    quadrature_gradient_energy,
)
from .lattice import (
    LatticeField,
    ModeSpec,
    bond_sum,
    discrete_laplacian,
    grad_hamiltonian_d,
    grad_norm_d,
    hamiltonian_d,
    lagrange_residual,
    norm_d,
    qmu_norm,
    random_field,
    reflect,
    symmetrize,
)
from .solver import (
    BreatherResult,
    ConvergenceReport,
    SingularJacobianError,
    SolverError,
    coercivity_check,
    convergence_study,
    ground_state,
    initial_guess,
    rescale_to_mu_free,
    solve_breather,
    sup_bound_check,
)

__all__ = [name for name in dir() if not name.startswith("_")]
