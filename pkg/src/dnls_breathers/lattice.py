"""Lattice fields on a truncated box of Z^n and the discrete DNLS functionals.

A field of radius ``K`` lives on the indices ``{-K..K}^n``; array position
``a`` along an axis holds lattice index ``a - K``.  Everything outside the box
is an implicit zero (Dirichlet truncation), so the discrete Laplacian, the
bond sums and the P1 interpolant all see the same ghost ring of zeros.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

LABEL_OFFSETS = {
    1: {"ST": (0.0,), "P": (0.5,)},
    2: {
        "ST": (0.0, 0.0),
        "P": (0.5, 0.5),
        "H_x": (0.5, 0.0),
        "H_y": (0.0, 0.5),
    },
}


@dataclass(frozen=True, eq=False)
class LatticeField:
    """Real field ``values[a_1, .., a_n]`` on ``{-K..K}^n`` with mesh ``mu``."""

    dim: int
    mesh: float
    radius: int
    values: np.ndarray

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise ValueError(f"dim must be 1 or 2, got {self.dim}")
        if not self.mesh > 0:
            raise ValueError(f"mesh must be positive, got {self.mesh}")
        if int(self.radius) != self.radius or self.radius < 2:
            raise ValueError(f"radius must be an integer >= 2, got {self.radius}")
        vals = np.asarray(self.values, dtype=float)
        shape = (2 * self.radius + 1,) * self.dim
        if vals.shape != shape:
            raise ValueError(f"values has shape {vals.shape}, expected {shape}")
        if not np.all(np.isfinite(vals)):
            raise ValueError("values must be finite")
        object.__setattr__(self, "mesh", float(self.mesh))
        object.__setattr__(self, "radius", int(self.radius))
        object.__setattr__(self, "values", vals)

    @classmethod
    def zeros(cls, dim: int, mesh: float, radius: int) -> "LatticeField":
        return cls(dim, mesh, radius, np.zeros((2 * radius + 1,) * dim))

    @classmethod
    def delta(cls, dim: int, mesh: float, radius: int, at=None) -> "LatticeField":
        """Unit spike at lattice index ``at`` (origin by default)."""
        vals = np.zeros((2 * radius + 1,) * dim)
        at = (0,) * dim if at is None else tuple(np.atleast_1d(at))
        vals[tuple(a + radius for a in at)] = 1.0
        return cls(dim, mesh, radius, vals)

    def like(self, values) -> "LatticeField":
        return LatticeField(self.dim, self.mesh, self.radius, values)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.values.shape

    def indices(self) -> tuple[np.ndarray, ...]:
        """Integer lattice coordinates, one array per axis (``ij`` indexing)."""
        ax = np.arange(-self.radius, self.radius + 1)
        return tuple(np.meshgrid(*([ax] * self.dim), indexing="ij"))

    def __add__(self, other: "LatticeField") -> "LatticeField":
        _check_compatible(self, other)
        return self.like(self.values + other.values)

    def __sub__(self, other: "LatticeField") -> "LatticeField":
        _check_compatible(self, other)
        return self.like(self.values - other.values)

    def __mul__(self, c: float) -> "LatticeField":
        return self.like(c * self.values)

    __rmul__ = __mul__


@dataclass(frozen=True)
class ModeSpec:
    """Breather type: centre offset (in units of the mesh) and its label."""

    dim: int
    offset: tuple[float, ...]
    label: str = field(default="")

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise ValueError(f"dim must be 1 or 2, got {self.dim}")
        off = tuple(float(o) for o in self.offset)
        if len(off) != self.dim or any(o not in (0.0, 0.5) for o in off):
            raise ValueError(f"offset must be in {{0, 1/2}}^{self.dim}, got {self.offset}")
        label = next(k for k, v in LABEL_OFFSETS[self.dim].items() if v == off)
        if self.label and self.label != label:
            raise ValueError(f"label {self.label!r} does not match offset {off}")
        object.__setattr__(self, "offset", off)
        object.__setattr__(self, "label", label)

    @classmethod
    def from_label(cls, label: str, dim: int) -> "ModeSpec":
        try:
            return cls(dim, LABEL_OFFSETS[dim][label])
        except KeyError:
            valid = ", ".join(LABEL_OFFSETS.get(dim, {}))
            raise ValueError(f"mode {label!r} is not valid for dim={dim} (valid: {valid})") from None

    @classmethod
    def all_modes(cls, dim: int) -> list["ModeSpec"]:
        return [cls(dim, off) for off in LABEL_OFFSETS[dim].values()]


def _check_compatible(f: LatticeField, g: LatticeField):
    if (f.dim, f.mesh, f.radius) != (g.dim, g.mesh, g.radius):
        raise ValueError("fields live on different lattices")


def check_exponent(p: float, dim: int):
    """Reject nonlinearity exponents outside ``[1/2, 2/dim)``."""
    if not (0.5 <= p < 2.0 / dim):
        raise ValueError(f"p must satisfy 1/2 <= p < 2/dim = {2.0 / dim:g}, got {p}")


# -- stencils ---------------------------------------------------------------


def _laplacian_values(v: np.ndarray) -> np.ndarray:
    out = -2.0 * v.ndim * v
    for ax in range(v.ndim):
        pad = [(0, 0)] * v.ndim
        pad[ax] = (1, 1)
        vp = np.pad(v, pad)
        sl_hi = [slice(None)] * v.ndim
        sl_lo = [slice(None)] * v.ndim
        sl_hi[ax] = slice(2, None)
        sl_lo[ax] = slice(None, -2)
        out = out + vp[tuple(sl_hi)] + vp[tuple(sl_lo)]
    return out


def discrete_laplacian(f: LatticeField) -> LatticeField:
    """Nearest-neighbour Laplacian (unscaled), zero outside the box."""
    return f.like(_laplacian_values(f.values))


def laplacian_matrix(dim: int, radius: int) -> sp.csr_matrix:
    """Sparse Dirichlet Laplacian acting on C-ordered flattened fields."""
    n = 2 * radius + 1
    d1 = sp.diags([np.ones(n - 1), -2.0 * np.ones(n), np.ones(n - 1)], [-1, 0, 1])
    if dim == 1:
        return d1.tocsr()
    eye = sp.identity(n)
    return (sp.kron(d1, eye) + sp.kron(eye, d1)).tocsr()


def bond_differences(v: np.ndarray) -> list[np.ndarray]:
    """Forward differences along each axis, ghost zeros included.

    Every nearest-neighbour bond touching the box appears exactly once.
    """
    diffs = []
    for ax in range(v.ndim):
        pad = [(0, 0)] * v.ndim
        pad[ax] = (1, 1)
        diffs.append(np.diff(np.pad(v, pad), axis=ax))
    return diffs


def bond_sum(f: LatticeField) -> float:
    """Sum of squared differences over unordered nearest-neighbour bonds."""
    return float(sum(np.sum(d * d) for d in bond_differences(f.values)))


def dirichlet_form(f: LatticeField) -> float:
    """``<f, -Delta_1 f>`` evaluated as an inner product."""
    return float(-np.sum(f.values * _laplacian_values(f.values)))


# -- functionals ---------------------------------------------------------------


def norm_d(f: LatticeField) -> float:
    return float(f.mesh**f.dim * np.sum(f.values**2))


def grad_norm_d(f: LatticeField) -> LatticeField:
    return f.like(2.0 * f.mesh**f.dim * f.values)


def hamiltonian_d(f: LatticeField, p: float) -> float:
    """Discrete energy; each bond counted once (the 1/2 undoes ordered pairs)."""
    check_exponent(p, f.dim)
    mu, n = f.mesh, f.dim
    kinetic = bond_sum(f) / mu**2
    potential = np.sum(np.abs(f.values) ** (2 * p + 2)) / (p + 1)
    return float(mu**n * (kinetic - potential))


def grad_hamiltonian_d(f: LatticeField, p: float) -> LatticeField:
    check_exponent(p, f.dim)
    mu, n, v = f.mesh, f.dim, f.values
    g = -_laplacian_values(v) / mu**2 - np.abs(v) ** (2 * p) * v
    return f.like(2.0 * mu**n * g)


def qmu_norm(f: LatticeField) -> float:
    """Mesh-weighted l2 norm plus the discrete Dirichlet form (H^1 analogue).

    The Dirichlet term enters linearly, not squared, so the result is
    1-homogeneous.
    """
    mu, n = f.mesh, f.dim
    return float(np.sqrt(mu**n * np.sum(f.values**2) + mu ** (n - 2) * dirichlet_form(f)))


def lagrange_residual(f: LatticeField, lam: float, p: float) -> np.ndarray:
    """Pointwise defect of ``lam*psi = -Delta_1 psi / mu^2 - |psi|^{2p} psi``."""
    v = f.values
    return -_laplacian_values(v) / f.mesh**2 - np.abs(v) ** (2 * p) * v - lam * v


# -- reflection symmetry ---------------------------------------------------------


def _check_mode(f: LatticeField, mode: ModeSpec):
    if f.dim != mode.dim:
        raise ValueError(f"field has dim {f.dim} but mode has dim {mode.dim}")


def reflection_index(radius: int, offset: float) -> np.ndarray:
    """Array position of the mirror image of each position along one axis.

    Offset 0 mirrors about site 0 (``j -> -j``); offset 1/2 mirrors about the
    bond midpoint ``-1/2`` (``j -> -j-1``).  Positions whose image falls
    outside the box get ``-1``.
    """
    a = np.arange(2 * radius + 1)
    img = 2 * radius - a if offset == 0.0 else 2 * radius - 1 - a
    img[img < 0] = -1
    return img


def dead_mask(radius: int, mode: ModeSpec) -> np.ndarray:
    """Sites whose mirror image lies outside the box (forced to zero)."""
    masks = [reflection_index(radius, o) < 0 for o in mode.offset]
    if mode.dim == 1:
        return masks[0]
    return masks[0][:, None] | masks[1][None, :]


def reflect(f: LatticeField, mode: ModeSpec) -> LatticeField:
    """Point reflection about the mode centre, zero outside the box."""
    _check_mode(f, mode)
    v = f.values
    for ax, off in enumerate(mode.offset):
        img = reflection_index(f.radius, off)
        v = np.take(np.concatenate([v, np.zeros_like(np.take(v, [0], axis=ax))], axis=ax), img, axis=ax)
    return f.like(v)


def symmetrize(f: LatticeField, mode: ModeSpec) -> LatticeField:
    """Orthogonal projection onto fields invariant under the mode reflection."""
    v = 0.5 * (f.values + reflect(f, mode).values)
    v[dead_mask(f.radius, mode)] = 0.0
    return f.like(v)


def symmetry_basis(radius: int, mode: ModeSpec, active: np.ndarray | None = None) -> sp.csr_matrix:
    """Orthonormal basis (sparse columns) of the mode-symmetric subspace.

    Rows index the flattened box; columns are unit vectors on single fixed
    points or ``(e_a + e_b)/sqrt(2)`` on mirror pairs.  ``active`` restricts
    to a boolean mask of allowed sites (closed under the reflection).
    """
    dim = mode.dim
    shape = (2 * radius + 1,) * dim
    imgs = [reflection_index(radius, o) for o in mode.offset]
    grids = np.meshgrid(*[np.arange(s) for s in shape], indexing="ij")
    mirror = [img[g] for img, g in zip(imgs, grids)]
    ok = np.all([m >= 0 for m in mirror], axis=0)
    if active is not None:
        ok &= active.reshape(shape)
    flat = np.ravel_multi_index(tuple(g.ravel() for g in grids), shape)
    mflat = np.full(flat.shape, -1)
    okf = ok.ravel()
    mflat[okf] = np.ravel_multi_index(tuple(m.ravel()[okf] for m in mirror), shape)
    if active is not None:
        okf &= np.where(mflat >= 0, active.ravel()[np.maximum(mflat, 0)], False)
    rows, cols, vals = [], [], []
    col = 0
    for a in np.flatnonzero(okf):
        b = mflat[a]
        if b < a:
            continue
        if b == a:
            rows.append(a)
            cols.append(col)
            vals.append(1.0)
        else:
            rows += [a, b]
            cols += [col, col]
            vals += [np.sqrt(0.5)] * 2
        col += 1
    return sp.csr_matrix((vals, (rows, cols)), shape=(flat.size, col))


def is_symmetric(f: LatticeField, mode: ModeSpec, atol: float = 0.0) -> bool:
    return bool(np.max(np.abs(symmetrize(f, mode).values - f.values)) <= atol)


def interior_mask(dim: int, radius: int) -> np.ndarray:
    """True away from the outermost ring of the box."""
    m = np.zeros((2 * radius + 1,) * dim, dtype=bool)
    m[(slice(1, -1),) * dim] = True
    return m


def random_field(rng: np.random.Generator, dim: int, mesh: float, radius: int,
                 scale: float = 1.0) -> LatticeField:
    """Uniform random field in ``[-scale, scale]``; handy for property checks."""
    return LatticeField(dim, mesh, radius, scale * rng.uniform(-1, 1, (2 * radius + 1,) * dim))
