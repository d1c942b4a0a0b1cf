"""Discrete breathers as constrained critical points of H_d on {N_d = 1}.

The unknowns are the lattice values on the box interior that are compatible
with the mode reflection; the outer ring stays at zero.  Newton runs on the
bordered system ``F(psi, lam) = (-Delta_1 psi / mu^2 - |psi|^{2p} psi - lam psi,
N_d(psi) - 1)``.  Linear algebra happens in an orthonormal basis of the
mode-symmetric subspace, which keeps the odd (translation-like) directions out
of the Jacobian.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .continuum import ContinuumProfile, explicit_ground_state_1d, rescale_to_unit_mass, shoot_radial_ground_state
from .fem import project
from .lattice import (
    LatticeField,
    ModeSpec,
    check_exponent,
    interior_mask,
    lagrange_residual,
    laplacian_matrix,
    norm_d,
    qmu_norm,
    symmetrize,
    symmetry_basis,
)

log = logging.getLogger(__name__)

DEFAULT_TOL = 1e-12
DEFAULT_MAX_ITER = 50
#: reduced systems larger than this go to MINRES instead of sparse LU
DIRECT_LIMIT = 2_000_000
#: dense eigensolver below this many reduced unknowns
DENSE_EIG_LIMIT = 2500


class SolverError(RuntimeError):
    """Newton failed; ``trace`` holds the residual history."""

    def __init__(self, message: str, trace: list[float] | None = None):
        super().__init__(message)
        self.trace = list(trace or [])


class SingularJacobianError(SolverError):
    pass


@dataclass(eq=False)
class BreatherResult:
    field: LatticeField
    mode: ModeSpec
    p: float
    lam: float
    residual_inf: float
    iterations: int
    trace: list[float] = field(default_factory=list)
    coercivity_margin: float | None = None

    @property
    def mesh(self) -> float:
        return self.field.mesh

    @property
    def radius(self) -> int:
        return self.field.radius

    def summary(self) -> dict:
        return {
            "mode": self.mode.label,
            "p": self.p,
            "mu": self.mesh,
            "radius": self.radius,
            "lambda": self.lam,
            "residual_inf": self.residual_inf,
            "iterations": self.iterations,
            "coercivity_margin": self.coercivity_margin,
        }


@dataclass(eq=False)
class ConvergenceReport:
    mode: ModeSpec
    p: float
    rows: list[dict]
    fitted_order_qmu: float
    fitted_order_sup: float
    partial: bool = False
    failures: list[dict] = field(default_factory=list)

    def summary(self) -> dict:
        return {
            "mode": self.mode.label,
            "dim": self.mode.dim,
            "p": self.p,
            "fitted_order_qmu": self.fitted_order_qmu,
            "fitted_order_sup": self.fitted_order_sup,
            "partial": self.partial,
            "failures": self.failures,
        }


# -- ground state and starting point --------------------------------------------


@lru_cache(maxsize=None)
def ground_state(dim: int, p: float) -> ContinuumProfile:
    """Unit-mass continuum ground state for ``(dim, p)``."""
    check_exponent(p, dim)
    if dim == 1 and p == 1.0:
        base = explicit_ground_state_1d()
    else:
        base = shoot_radial_ground_state(dim, p, -1.0)
    return rescale_to_unit_mass(base)[0]


def auto_radius(prof: ContinuumProfile, mesh: float, rel: float = 1e-12) -> int:
    """Box radius with ``psi_c(mu K) < rel psi_c(0)``."""
    return max(2, int(np.ceil(prof.cutoff_radius(rel) / mesh)))


def active_mask(radius: int, mode: ModeSpec) -> np.ndarray:
    """Interior sites whose mirror image is interior as well."""
    inner = interior_mask(mode.dim, radius)
    probe = LatticeField(mode.dim, 1.0, radius, inner.astype(float))
    return symmetrize(probe, mode).values == 1.0


def initial_guess(prof: ContinuumProfile, mode: ModeSpec, mesh: float, radius: int | None = None) -> LatticeField:
    """Projected ground state, cut to the active sites, scaled to ``N_d = 1``."""
    if prof.dim != mode.dim:
        raise ValueError(f"profile has dim {prof.dim} but mode has dim {mode.dim}")
    radius = auto_radius(prof, mesh) if radius is None else radius
    sample = project(prof, mesh, radius, mode)
    vals = np.where(active_mask(radius, mode), sample.values, 0.0)
    mass = norm_d(sample.like(vals))
    if not mass > 0:
        raise ValueError("projected ground state vanishes on the lattice; enlarge the box")
    return sample.like(vals / np.sqrt(mass))


# -- Newton --------------------------------------------------------------------


def _rayleigh_lambda(v: np.ndarray, L: sp.spmatrix, mu: float, p: float) -> float:
    num = v @ (-(L @ v) / mu**2 - np.abs(v) ** (2 * p) * v)
    return float(num / (v @ v))


def _make_solver(J: sp.spmatrix):
    """Return ``solve(rhs)`` for the reduced Jacobian."""
    if J.shape[0] <= DIRECT_LIMIT:
        try:
            lu = spla.splu(J.tocsc())
        except RuntimeError as exc:
            raise SingularJacobianError(
                f"reduced Jacobian is singular ({exc}); restrict to a symmetry class or refine mu") from exc
        return lu.solve
    diag = np.abs(J.diagonal())
    pre = sp.diags(1.0 / np.where(diag > 0, diag, 1.0))

    def solve(rhs):
        x, info = spla.minres(J, rhs, M=pre, rtol=1e-13, maxiter=20 * J.shape[0])
        if info != 0:
            raise SolverError(f"MINRES did not converge (info={info})")
        return x

    return solve


def solve_breather(guess: LatticeField, mode: ModeSpec, p: float, tol: float = DEFAULT_TOL,
                   max_iter: int = DEFAULT_MAX_ITER, lam0: float | None = None) -> BreatherResult:
    """Newton on the bordered system from a normalized, symmetric guess."""
    check_exponent(p, guess.dim)
    if guess.dim != mode.dim:
        raise ValueError(f"guess has dim {guess.dim} but mode has dim {mode.dim}")
    if not tol > 0:
        raise ValueError("tol must be positive")
    mu, n, K = guess.mesh, guess.dim, guess.radius
    mun = mu**n
    active = active_mask(K, mode)
    Q = symmetry_basis(K, mode, active)
    L = laplacian_matrix(n, K)
    Lr = (Q.T @ L @ Q).tocsr()
    QT = Q.T.tocsr()

    psi = symmetrize(guess.like(np.where(active, guess.values, 0.0)), mode)
    c = QT @ psi.values.ravel()
    lam = _rayleigh_lambda(psi.values.ravel(), L, mu, p) if lam0 is None else float(lam0)

    def state(c):
        v = (Q @ c).reshape(guess.shape)
        return symmetrize(guess.like(v), mode)

    trace = []
    for it in range(max_iter + 1):
        res = lagrange_residual(psi, lam, p)
        r_inf = float(np.max(np.abs(res[active])))
        g = norm_d(psi) - 1.0
        trace.append(r_inf)
        log.debug("newton %d: residual %.3e, N-1 %.3e, lambda %.15g", it, r_inf, g, lam)
        if not np.isfinite(r_inf):
            raise SolverError("residual is not finite; the guess left the Newton basin", trace)
        if r_inf <= tol and abs(g) <= 1e-13:
            return BreatherResult(psi, mode, float(p), lam, r_inf, it, trace)
        if it == max_iter:
            break
        if it >= 3 and r_inf > 1e3 * trace[0]:
            raise SolverError(
                f"residual grew from {trace[0]:.3e} to {r_inf:.3e}; the guess is outside the Newton "
                f"basin (mu={mu:g} may be too coarse)", trace)
        v = psi.values.ravel()
        D = sp.diags((2 * p + 1) * np.abs(v) ** (2 * p) + lam)
        J = (-Lr / mu**2 - (QT @ D @ Q)).tocsc()
        solve = _make_solver(J)
        Fr = QT @ res.ravel()
        x1 = solve(Fr)
        x2 = solve(c)
        denom = 2 * mun * (c @ x2)
        if not np.isfinite(denom) or abs(denom) < 1e-14 * 2 * mun * (c @ c) * np.max(np.abs(x2)):
            raise SingularJacobianError("bordered Jacobian is singular; restrict symmetry or refine mu", trace)
        dlam = (2 * mun * (c @ x1) - g) / denom
        c = c - x1 + dlam * x2
        lam += dlam
        psi = state(c)
        c = QT @ psi.values.ravel()
    raise SolverError(f"no convergence to {tol:g} in {max_iter} Newton steps", trace)


# -- second variation -------------------------------------------------------------


def _hessian_reduced(res: BreatherResult, symmetric: bool):
    f = res.field
    mu, n, K, p = f.mesh, f.dim, f.radius, res.p
    active = active_mask(K, res.mode)
    if symmetric:
        Q = symmetry_basis(K, res.mode, active)
    else:
        idx = np.flatnonzero(active.ravel())
        Q = sp.csr_matrix((np.ones(idx.size), (idx, np.arange(idx.size))), shape=(active.size, idx.size))
    v = f.values.ravel()
    L = laplacian_matrix(n, K)
    A = -L / mu**2 - sp.diags((2 * p + 1) * np.abs(v) ** (2 * p) + res.lam)
    H = (2 * mu**n * (Q.T @ A @ Q)).tocsr()
    w = Q.T @ v
    return H, w / np.linalg.norm(w)


def coercivity_check(res: BreatherResult, symmetric: bool = True) -> float:
    """Smallest eigenvalue of the second variation on the constraint tangent space.

    The Hessian ``2 mu^n (-Delta_1/mu^2 - (2p+1)|psi|^{2p} - lam)`` is taken on
    the active sites (mode-symmetric ones if ``symmetric``) and compressed to
    the orthogonal complement of ``psi``.  A positive value certifies a
    nondegenerate constrained minimum within that class.
    """
    H, w = _hessian_reduced(res, symmetric)
    m = H.shape[0]
    # H + sigma w w^T pushes the normal direction above the tangent spectrum
    bound = float(np.max(np.abs(H).sum(axis=1)))
    sigma = 4 * bound + 1.0
    Hw = H @ w
    alpha = float(w @ Hw)
    if m <= DENSE_EIG_LIMIT:
        Hd = H.toarray()
        P = np.eye(m) - np.outer(w, w)
        M = P @ Hd @ P + sigma * np.outer(w, w)
        return float(la.eigvalsh(M, subset_by_index=[0, 0])[0])
    # M = P H P + sigma w w^T = H + U C U^T with U = [w, Hw]
    U = np.stack([w, Hw], axis=1)
    C = np.array([[alpha + sigma, -1.0], [-1.0, 0.0]])
    diag = H.diagonal()
    offsum = np.asarray(np.abs(H).sum(axis=1)).ravel() - np.abs(diag)
    shift = float(np.min(diag - offsum)) - 0.05 * bound
    lu = spla.splu((H - shift * sp.identity(m)).tocsc())
    BU = lu.solve(U)
    S = la.inv(C) + U.T @ BU

    def opinv(x):
        y = lu.solve(x)
        return y - BU @ la.solve(S, U.T @ y)

    def matvec(x):
        return H @ x + U @ (C @ (U.T @ x))

    Mop = spla.LinearOperator((m, m), matvec=matvec, dtype=float)
    OPinv = spla.LinearOperator((m, m), matvec=opinv, dtype=float)
    try:
        vals = spla.eigsh(Mop, k=1, sigma=shift, which="LM", OPinv=OPinv, tol=1e-12,
                          v0=np.ones(m), maxiter=10 * m)[0]
    except spla.ArpackNoConvergence as exc:
        raise RuntimeError("eigensolver did not converge on the reduced Hessian") from exc
    return float(vals[0])


# -- lattice estimates --------------------------------------------------------------


def sup_bound_check(f: LatticeField) -> tuple[float, float]:
    """``(max |psi_l|, 2 mu^{1/2 - n/2} ||psi||_{Q_mu})``; the first never exceeds the second."""
    lhs = float(np.max(np.abs(f.values)))
    rhs = 2.0 * f.mesh ** (0.5 - 0.5 * f.dim) * qmu_norm(f)
    return lhs, float(rhs)


def rescale_to_mu_free(res: BreatherResult) -> tuple[LatticeField, float, float]:
    """Map to the unit-mesh problem: ``phi = mu^{1/p} psi``, ``lam~ = mu^2 lam``, ``E = mu^{2/p-n}``."""
    f, p = res.field, res.p
    mu, n = f.mesh, f.dim
    phi = LatticeField(n, 1.0, f.radius, mu ** (1.0 / p) * f.values)
    return phi, mu * mu * res.lam, mu ** (2.0 / p - n)


# -- convergence study ----------------------------------------------------------------


def log_log_slope(x, y) -> float:
    """Least-squares slope of ``log y`` against ``log x``."""
    x, y = np.asarray(x, float), np.asarray(y, float)
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])


def convergence_study(mode: ModeSpec, p: float, mus, tol: float = DEFAULT_TOL,
                      profile: ContinuumProfile | None = None, max_iter: int = DEFAULT_MAX_ITER,
                      keep_results: bool = False) -> ConvergenceReport:
    """Solve on a mesh ladder and compare with the raw samples of ``psi_c``.

    Errors are measured against ``Psi_l = psi_c(mu (l + offset))`` (not
    renormalized) in the Q_mu norm and the sup norm.  A failing row is
    recorded and skipped; the report is then flagged partial.
    """
    mus = sorted((float(m) for m in mus), reverse=True)
    if len(mus) < 3:
        raise ValueError("a convergence study needs at least three mesh values")
    prof = ground_state(mode.dim, p) if profile is None else profile
    rows, failures = [], []
    for mu in mus:
        K = auto_radius(prof, mu)
        try:
            guess = initial_guess(prof, mode, mu, K)
            res = solve_breather(guess, mode, p, tol=tol, max_iter=max_iter)
        except (SolverError, ValueError) as exc:
            log.warning("mu=%g failed: %s", mu, exc)
            failures.append({"mu": mu, "error": str(exc)})
            continue
        target = project(prof, mu, K, mode)
        err = res.field - target
        row = {
            "mu": mu,
            "radius": K,
            "qmu_error": qmu_norm(err),
            "sup_error": float(np.max(np.abs(err.values))),
            "lambda": res.lam,
            "iterations": res.iterations,
            "residual_inf": res.residual_inf,
        }
        if keep_results:
            row["result"] = res
        rows.append(row)
        log.info("mu=%g K=%d qmu=%.3e sup=%.3e lambda=%.12g", mu, K, row["qmu_error"], row["sup_error"], res.lam)
    if len(rows) >= 2:
        x = [r["mu"] for r in rows]
        oq = log_log_slope(x, [r["qmu_error"] for r in rows])
        os_ = log_log_slope(x, [r["sup_error"] for r in rows])
    else:
        oq = os_ = float("nan")
    return ConvergenceReport(mode, float(p), rows, oq, os_, partial=bool(failures), failures=failures)
