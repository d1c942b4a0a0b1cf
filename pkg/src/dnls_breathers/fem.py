"""P1 finite elements on the lattice: hats in 1D, split squares in 2D.

Each unit cell ``[j, j+1] x [k, k+1]`` (in mesh units, shifted by the mode
offset) is cut along the anti-diagonal into ``T+`` with vertices
``(j,k), (j+1,k), (j,k+1)`` and ``T-`` with vertices ``(j+1,k+1), (j,k+1),
(j+1,k)``; points on the diagonal belong to ``T+``.  The interpolant is
supported on the box plus one ring of cells, where it ramps down to the
ghost zeros.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np

from .lattice import LatticeField, ModeSpec, bond_sum

#: below this the 1D node-snapping in ``evaluate`` kicks in (mesh units)
_SNAP = 1e-12


@dataclass(frozen=True, eq=False)
class FemFunction:
    base: LatticeField
    offset: tuple[float, ...] = (0.0,)

    def __post_init__(self):
        off = tuple(float(o) for o in np.broadcast_to(self.offset, (self.base.dim,)))
        object.__setattr__(self, "offset", off)

    @classmethod
    def from_mode(cls, base: LatticeField, mode: ModeSpec) -> "FemFunction":
        return cls(base, mode.offset)

    @property
    def dim(self) -> int:
        return self.base.dim

    @property
    def mesh(self) -> float:
        return self.base.mesh

    def padded(self) -> np.ndarray:
        """Nodal values with the ghost ring of zeros attached."""
        return np.pad(self.base.values, 1)

    def __call__(self, *coords) -> np.ndarray:
        return evaluate(self, *coords)


def _local(F: FemFunction, coords):
    """Cell index (into the padded array) and local coordinates in [0, 1)."""
    K = F.base.radius
    out = []
    for c, off in zip(coords, F.offset):
        t = np.asarray(c, dtype=float) / F.mesh - off
        near = np.round(t)
        t = np.where(np.abs(t - near) < _SNAP, near, t)
        j = np.floor(t)
        out.append((j.astype(np.int64) + K + 1, t - j))
    return out


def evaluate(F: FemFunction, *coords) -> np.ndarray:
    """Value of the P1 interpolant at the given points (zero off the support)."""
    if len(coords) != F.dim:
        raise ValueError(f"expected {F.dim} coordinate arrays, got {len(coords)}")
    P = F.padded()
    m = P.shape[0]
    loc = _local(F, coords)
    if F.dim == 1:
        (a, th), = loc
        inside = (a >= 0) & (a < m - 1)
        a = np.clip(a, 0, m - 2)
        val = (1 - th) * P[a] + th * P[a + 1]
        return np.where(inside, val, 0.0)
    (a, th), (b, et) = loc
    inside = (a >= 0) & (a < m - 1) & (b >= 0) & (b < m - 1)
    a = np.clip(a, 0, m - 2)
    b = np.clip(b, 0, m - 2)
    lower = th + et <= 1.0
    v00, v10, v01, v11 = P[a, b], P[a + 1, b], P[a, b + 1], P[a + 1, b + 1]
    plus = v00 + th * (v10 - v00) + et * (v01 - v00)
    minus = v11 + (th - 1) * (v11 - v01) + (et - 1) * (v11 - v10)
    return np.where(inside, np.where(lower, plus, minus), 0.0)


def gradient_energy(F: FemFunction) -> float:
    """``int |grad Psi|^2`` through the bond sum, which is exact for P1."""
    return F.mesh ** (F.dim - 2) * bond_sum(F.base)


# -- cell geometry ---------------------------------------------------------------


def _cell_origins(F: FemFunction) -> list[np.ndarray]:
    """Physical lower-left corners of every cell of the support, per axis."""
    K = F.base.radius
    j = np.arange(-K - 1, K + 1)
    grids = np.meshgrid(*([j] * F.dim), indexing="ij")
    return [F.mesh * (g.ravel() + off) for g, off in zip(grids, F.offset)]


# reference triangles in local cell coordinates: vertex 0 is the right angle
_TRI = {
    "+": np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]),
    "-": np.array([[1.0, 1.0], [0.0, 1.0], [1.0, 0.0]]),
}


def _triangle_points(origins, mesh, bary):
    """Physical points for barycentric coordinates ``bary`` (q x 3) on all triangles."""
    x0, y0 = origins
    pts = {}
    for key, verts in _TRI.items():
        loc = bary @ verts  # q x 2
        pts[key] = (x0[:, None] + mesh * loc[None, :, 0], y0[:, None] + mesh * loc[None, :, 1])
    return pts


def quadrature_gradient_energy(F: FemFunction) -> float:
    """``int |grad Psi|^2`` from cellwise slopes sampled through ``evaluate``.

    Independent of the bond-sum route: slopes come from values of the
    interpolant at interior points of each cell or triangle.
    """
    mu = F.mesh
    org = _cell_origins(F)
    if F.dim == 1:
        (x0,) = org
        slope = (evaluate(F, x0 + 0.75 * mu) - evaluate(F, x0 + 0.25 * mu)) / (0.5 * mu)
        return float(np.sum(mu * slope**2))
    gx, gy = _triangle_gradients(F, org)
    return float(np.sum(0.5 * mu * mu * (gx**2 + gy**2)))


def _triangle_gradients(F: FemFunction, org):
    mu = F.mesh
    h = mu / 8
    x0, y0 = org
    gx, gy = [], []
    for cx in (1 / 3, 2 / 3):
        px, py = x0 + cx * mu, y0 + cx * mu  # centroid of T+ / T-
        c = evaluate(F, px, py)
        gx.append((evaluate(F, px + h, py) - c) / h)
        gy.append((evaluate(F, px, py + h) - c) / h)
    return np.concatenate(gx), np.concatenate(gy)


def l2_mass_identity_check(F: FemFunction) -> tuple[float, float]:
    """Both sides of the discrete-mass identity for the P1 interpolant.

    1D: ``mu sum psi^2 = int Psi^2 + (mu^2/6) int Psi_x^2``.
    2D: ``mu^2 sum psi^2 = int Psi^2 + (mu^2/6) int (Psi_x^2 + Psi_y^2 - Psi_x Psi_y)``.
    ``int Psi^2`` uses rules exact for quadratics (Simpson; edge midpoints).
    """
    mu = F.mesh
    lhs = float(mu**F.dim * np.sum(F.base.values**2))
    org = _cell_origins(F)
    if F.dim == 1:
        (x0,) = org
        a, m, b = evaluate(F, x0), evaluate(F, x0 + 0.5 * mu), evaluate(F, x0 + mu)
        mass = np.sum(mu / 6 * (a * a + 4 * m * m + b * b))
        slope = (b - a) / mu
        corr = mu * mu / 6 * np.sum(mu * slope**2)
        return lhs, float(mass + corr)
    x0, y0 = org
    mids = np.array([[0.0, 0.5, 0.5], [0.5, 0.0, 0.5], [0.5, 0.5, 0.0]])
    area = 0.5 * mu * mu
    mass = 0.0
    for px, py in _triangle_points(org, mu, mids).values():
        mass += np.sum(area / 3 * evaluate(F, px, py) ** 2)
    gx, gy = _triangle_gradients(F, org)
    corr = mu * mu / 6 * np.sum(area * (gx * gx + gy * gy - gx * gy))
    return lhs, float(mass + corr)


# -- projection ------------------------------------------------------------------


def node_coordinates(mesh: float, radius: int, mode: ModeSpec) -> tuple[np.ndarray, ...]:
    """Physical positions ``mu * (l + offset)`` of every box node."""
    ax = np.arange(-radius, radius + 1, dtype=float)
    grids = np.meshgrid(*([ax] * mode.dim), indexing="ij")
    return tuple(mesh * (g + off) for g, off in zip(grids, mode.offset))


def project(func, mesh: float, radius: int, mode: ModeSpec) -> LatticeField:
    """Nodal sampling at the mode-shifted nodes.

    ``func`` is a :class:`ContinuumProfile`, a :class:`FemFunction` or any
    callable taking one coordinate array per axis.
    """
    coords = node_coordinates(mesh, radius, mode)
    f = func.at if hasattr(func, "at") else func
    return LatticeField(mode.dim, mesh, radius, np.asarray(f(*coords), dtype=float))


@lru_cache(maxsize=None)
def _gauss(order: int):
    x, w = np.polynomial.legendre.leggauss(order)
    return 0.5 * (x + 1), 0.5 * w


@lru_cache(maxsize=None)
def _triangle_rule(order: int):
    """Collapsed Gauss rule on the unit right triangle (weights sum to 1)."""
    x, w = _gauss(order)
    u, v = np.meshgrid(x, x, indexing="ij")
    wu, wv = np.meshgrid(w, w, indexing="ij")
    b1 = u.ravel()
    b2 = (v * (1 - u)).ravel()
    weights = (2 * wu * wv * (1 - u)).ravel()
    bary = np.stack([1 - b1 - b2, b1, b2], axis=1)
    return bary, weights


def _cell_integral(F: FemFunction, integrand: Callable, order: int, chunk: int = 4096) -> float:
    """``int integrand(x, Psi(x))`` cellwise with Gauss points, chunked over cells."""
    mu = F.mesh
    org = _cell_origins(F)
    total = []
    ncell = org[0].size
    if F.dim == 1:
        x, w = _gauss(order)
        for s in range(0, ncell, chunk):
            x0 = org[0][s:s + chunk, None]
            pts = x0 + mu * x[None, :]
            vals = integrand((pts,), evaluate(F, pts))
            total.append(mu * (vals @ w))
        return float(np.sum(np.concatenate(total)))
    bary, w = _triangle_rule(order)
    area = 0.5 * mu * mu
    for s in range(0, ncell, chunk):
        sub = [o[s:s + chunk] for o in org]
        for px, py in _triangle_points(sub, mu, bary).values():
            vals = integrand((px, py), evaluate(F, px, py))
            total.append(area * (vals @ w))
    return float(np.sum(np.concatenate(total)))


def h1_error(F: FemFunction, func, grad, order: int = 8, chunk: int = 4096) -> float:
    """``||Psi - psi||_{H^1}`` over the support of ``Psi``.

    ``func(*coords)`` gives the target values and ``grad(*coords)`` a tuple of
    its partial derivatives.
    """
    mu = F.mesh
    org = _cell_origins(F)
    if F.dim == 1:
        (x0,) = org
        slope = (evaluate(F, x0 + 0.75 * mu) - evaluate(F, x0 + 0.25 * mu)) / (0.5 * mu)
        x, w = _gauss(order)
        pts = x0[:, None] + mu * x[None, :]
        e0 = evaluate(F, pts) - func(pts)
        e1 = slope[:, None] - grad(pts)[0]
        return float(np.sqrt(np.sum(mu * ((e0**2 + e1**2) @ w))))
    bary, w = _triangle_rule(order)
    area = 0.5 * mu * mu
    parts = []
    for s in range(0, org[0].size, chunk):
        sub = [o[s:s + chunk] for o in org]
        gx, gy = _triangle_gradients(F, sub)
        n = sub[0].size
        for i, (px, py) in enumerate(_triangle_points(sub, mu, bary).values()):
            e0 = evaluate(F, px, py) - func(px, py)
            dx, dy = grad(px, py)
            sl = slice(i * n, (i + 1) * n)
            e1 = (gx[sl, None] - dx) ** 2 + (gy[sl, None] - dy) ** 2
            parts.append(area * ((e0**2 + e1) @ w))
    return float(np.sqrt(np.sum(np.concatenate(parts))))


def profile_gradient(prof) -> Callable:
    """Cartesian gradient of a radial :class:`ContinuumProfile`."""

    def grad(*coords):
        r = np.sqrt(sum(c**2 for c in coords))
        d = prof.derivative(r)
        safe = np.where(r > 0, r, 1.0)
        return tuple(np.where(r > 0, d * c / safe, 0.0) for c in coords)

    return grad


# -- Euler-Maclaurin residual -------------------------------------------------------


def euler_maclaurin_residual(F: FemFunction, q: float, rtol: float = 1e-10, order: int = 8) -> float:
    """``int |Psi|^{q+2} - mu^n sum |psi_l|^{q+2}`` for the P1 interpolant.

    The integral is Gauss-Legendre per cell (collapsed Gauss per triangle),
    checked once against a rule of twice the order.  Cells where ``Psi``
    changes sign only have a ``C^{q+1}`` integrand; the check catches them.
    """
    if q < 1:
        raise ValueError(f"q must be >= 1, got {q}")
    m = q + 2

    def integrand(_, v):
        return np.abs(v) ** m

    discrete = float(F.mesh**F.dim * np.sum(np.abs(F.base.values) ** m))
    coarse = _cell_integral(F, integrand, order)
    fine = _cell_integral(F, integrand, 2 * order)
    if abs(fine - coarse) > rtol * max(abs(fine), np.finfo(float).tiny):
        fine = _cell_integral(F, integrand, 6 * order)
    return fine - discrete
