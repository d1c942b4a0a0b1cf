"""Continuum NLS ground states ``lam*psi = -Delta psi - |psi|^{2p} psi``.

Profiles are radial and stored as a uniform table ``(r, psi, psi')`` on
``[0, R_max]`` evaluated through a cubic Hermite interpolant.  The explicit
1D cubic soliton additionally carries its closed form.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import CubicHermiteSpline
from scipy.special import k0e, k1e

from .lattice import check_exponent

log = logging.getLogger(__name__)

#: R_max in units of the decay length 1/sqrt(-lambda)
DECAY_LENGTHS = 40.0
#: table spacing in units of the decay length
TABLE_STEP = 1.0 / 256


class ShootingError(RuntimeError):
    """Bisection on the central amplitude could not be completed."""

    def __init__(self, message: str, bracket: tuple[float, float] | None = None):
        super().__init__(message)
        self.bracket = bracket


@dataclass(frozen=True, eq=False)
class ContinuumProfile:
    dim: int
    p: float
    lambda_c: float
    r: np.ndarray
    psi: np.ndarray
    dpsi: np.ndarray
    exact: Callable[[np.ndarray], np.ndarray] | None = None
    exact_deriv: Callable[[np.ndarray], np.ndarray] | None = None
    _spline: CubicHermiteSpline = field(init=False, repr=False)

    def __post_init__(self):
        if not self.lambda_c < 0:
            raise ValueError(f"lambda_c must be negative, got {self.lambda_c}")
        object.__setattr__(self, "_spline", CubicHermiteSpline(self.r, self.psi, self.dpsi))

    @property
    def amplitude(self) -> float:
        return float(self.psi[0])

    @property
    def decay_rate(self) -> float:
        return float(np.sqrt(-self.lambda_c))

    @property
    def r_max(self) -> float:
        return float(self.r[-1])

    def __call__(self, r) -> np.ndarray:
        """Radial value ``psi(|r|)``; zero beyond ``R_max``."""
        r = np.abs(np.asarray(r, dtype=float))
        if self.exact is not None:
            return np.where(r <= self.r_max, self.exact(r), 0.0)
        out = self._spline(np.minimum(r, self.r_max))
        return np.where(r <= self.r_max, out, 0.0)

    def derivative(self, r) -> np.ndarray:
        r = np.abs(np.asarray(r, dtype=float))
        if self.exact_deriv is not None:
            return np.where(r <= self.r_max, self.exact_deriv(r), 0.0)
        out = self._spline(np.minimum(r, self.r_max), 1)
        return np.where(r <= self.r_max, out, 0.0)

    def at(self, *coords) -> np.ndarray:
        """Evaluate at points of R^n given one coordinate array per axis."""
        if len(coords) != self.dim:
            raise ValueError(f"expected {self.dim} coordinate arrays, got {len(coords)}")
        return self(np.sqrt(sum(np.asarray(c, dtype=float) ** 2 for c in coords)))

    def cutoff_radius(self, rel: float = 1e-12) -> float:
        """Smallest tabulated radius beyond which ``psi < rel * psi(0)``."""
        above = np.flatnonzero(self.psi >= rel * self.amplitude)
        return float(self.r[min(above[-1] + 1, len(self.r) - 1)])


def _rhs(dim: int, p: float, lam: float):
    def f(r, y):
        psi, dpsi = y
        d2 = -np.abs(psi) ** (2 * p) * psi - lam * psi
        if dim == 2:
            d2 = d2 - dpsi / r
        return [dpsi, d2]

    return f


def _start(dim: int, p: float, lam: float, a: float, r0: float):
    # Taylor start: psi''(0) = -(a^{2p+1} + lam a) / dim
    c = -(a ** (2 * p + 1) + lam * a) / dim
    return [a + 0.5 * c * r0**2, c * r0], c


def _shoot(dim, p, lam, a, r_end, r0, dense=False):
    """Integrate from the centre; classify as 'over' (crosses zero) or 'under'."""
    y0, c = _start(dim, p, lam, a, r0)
    if c >= 0:
        return "under", None

    def crosses(r, y):
        return y[0]

    crosses.terminal = True
    crosses.direction = -1

    def turns(r, y):
        return y[1]

    turns.terminal = True
    turns.direction = 1

    sol = solve_ivp(_rhs(dim, p, lam), (r0, r_end), y0, method="DOP853", rtol=1e-12,
                    atol=1e-15 * a, events=(crosses, turns), dense_output=dense)
    if sol.t_events[0].size:
        return "over", sol
    if sol.t_events[1].size:
        return "under", sol
    return ("over" if sol.y[1, -1] < 0 and sol.y[0, -1] < 0 else "under"), sol


def _tail(dim: int, kappa: float, r: np.ndarray):
    """Decaying solution of the linearised equation and its derivative."""
    x = kappa * r
    if dim == 1:
        t = np.exp(-x)
        return t, -kappa * t
    e = np.exp(-x)
    return k0e(x) * e, -kappa * k1e(x) * e


def shoot_radial_ground_state(dim: int, p: float, lam: float, bracket: tuple[float, float] | None = None,
                              max_bisections: int = 200, match_level: float = 1e-5) -> ContinuumProfile:
    """Positive decaying radial solution by bisection on ``psi(0)``.

    Amplitudes that make the trajectory cross zero and amplitudes that make it
    turn back up bracket the ground state.  Once the bracket has collapsed to
    a few ulps the trajectory is kept down to ``match_level * psi(0)`` and
    continued by the decaying solution of the linearised equation
    (``exp(-kappa r)`` in 1D, ``K_0(kappa r)`` in 2D).
    """
    check_exponent(p, dim)
    if not lam < 0:
        raise ValueError(f"lambda must be negative, got {lam}")
    kappa = np.sqrt(-lam)
    r_max = DECAY_LENGTHS / kappa
    r0 = 0.0 if dim == 1 else 1e-6 / kappa

    if bracket is None:
        lo = (-lam) ** (1 / (2 * p))
        hi = 2 * lo
        for _ in range(60):
            if _shoot(dim, p, lam, hi, r_max, r0)[0] == "over":
                break
            lo, hi = hi, 2 * hi
        else:
            raise ShootingError("could not find an overshooting amplitude", (lo, hi))
    else:
        lo, hi = map(float, bracket)
        if _shoot(dim, p, lam, lo, r_max, r0)[0] != "under" or _shoot(dim, p, lam, hi, r_max, r0)[0] != "over":
            raise ShootingError(f"bracket {bracket} does not separate undershoot from overshoot", (lo, hi))

    for _ in range(max_bisections):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if _shoot(dim, p, lam, mid, r_max, r0)[0] == "over":
            hi = mid
        else:
            lo = mid
    else:
        raise ShootingError(f"bisection did not converge after {max_bisections} steps", (lo, hi))

    a = 0.5 * (lo + hi)

    def low(r, y):
        return y[0] - match_level * a

    low.terminal = True
    low.direction = -1
    sol = solve_ivp(_rhs(dim, p, lam), (r0, r_max), _start(dim, p, lam, a, r0)[0], method="DOP853",
                    rtol=1e-12, atol=1e-15 * a, events=(low,), dense_output=True)
    if not sol.t_events[0].size:
        raise ShootingError("trajectory never reached the matching level", (lo, hi))
    r_m = float(sol.t_events[0][0])

    step = TABLE_STEP / kappa
    r = np.arange(int(np.ceil(r_max / step)) + 1) * step
    psi = np.empty_like(r)
    dpsi = np.empty_like(r)
    inner = r <= r_m
    y = sol.sol(np.maximum(r[inner], r0))
    psi[inner], dpsi[inner] = y
    if dim == 2:
        # the Taylor start covers [0, r0)
        head = r[inner] < r0
        c = _start(dim, p, lam, a, r0)[1]
        psi[inner] = np.where(head, a + 0.5 * c * r[inner] ** 2, psi[inner])
        dpsi[inner] = np.where(head, c * r[inner], dpsi[inner])
    t_m, _ = _tail(dim, kappa, np.array([r_m]))
    t, dt = _tail(dim, kappa, r[~inner])
    alpha = match_level * a / t_m[0]
    psi[~inner] = alpha * t
    dpsi[~inner] = alpha * dt
    log.debug("shooting: dim=%d p=%g lam=%g amplitude=%.17g match radius=%g", dim, p, lam, a, r_m)
    return ContinuumProfile(dim, float(p), float(lam), r, psi, dpsi)


def explicit_ground_state_1d() -> ContinuumProfile:
    """The cubic 1D soliton ``psi(x) = sech(x/2)/sqrt(2)``, ``lambda = -1/4``."""
    lam = -0.25
    kappa = 0.5
    step = TABLE_STEP / kappa
    r = np.arange(int(np.ceil(DECAY_LENGTHS / kappa / step)) + 1) * step

    def psi(x):
        return 1.0 / (np.sqrt(2.0) * np.cosh(0.5 * x))

    def dpsi(x):
        return -0.5 * np.tanh(0.5 * x) * psi(x)

    return ContinuumProfile(1, 1.0, lam, r, psi(r), dpsi(r), exact=psi, exact_deriv=dpsi)


def dilate(prof: ContinuumProfile, s: float, power: float | None = None) -> ContinuumProfile:
    """``psi_s(z) = s^power psi(s z)``; ``power`` defaults to ``1/p``.

    With the default power the result solves the same equation with
    ``lambda -> s^2 lambda``.  Other powers (e.g. ``dim/2``, mass preserving)
    give admissible trial functions that no longer solve it; their
    ``lambda_c`` is still scaled by ``s^2`` for bookkeeping only.
    """
    if not s > 0:
        raise ValueError(f"scale must be positive, got {s}")
    power = 1.0 / prof.p if power is None else power
    amp = s**power
    exact = exact_deriv = None
    if prof.exact is not None:
        f, df = prof.exact, prof.exact_deriv

        def exact(r):
            return amp * f(s * r)

        def exact_deriv(r):
            return amp * s * df(s * r)

    return ContinuumProfile(prof.dim, prof.p, s * s * prof.lambda_c, prof.r / s, amp * prof.psi,
                            amp * s * prof.dpsi, exact=exact, exact_deriv=exact_deriv)


def rescale_to_unit_mass(prof: ContinuumProfile) -> tuple[ContinuumProfile, float]:
    """Member of the scaling family with ``N_c = 1``; also returns the scale."""
    mass = continuum_functionals(prof, prof.p)[1]
    if not mass > 0:
        raise ValueError("cannot rescale a profile with zero mass")
    expo = 2.0 / prof.p - prof.dim
    s = mass ** (-1.0 / expo)
    if s == 1.0:
        return prof, 1.0
    return dilate(prof, s), s


def _simpson(y: np.ndarray, h: float) -> float:
    # composite Simpson on an even number of panels
    return float(h / 3.0 * (y[0] + y[-1] + 4.0 * np.sum(y[1:-1:2]) + 2.0 * np.sum(y[2:-1:2])))


def continuum_functionals(prof: ContinuumProfile, p: float | None = None, tol: float = 1e-10,
                          max_halvings: int = 12) -> tuple[float, float]:
    """``(H_c, N_c)`` by radial Simpson quadrature with step halving."""
    p = prof.p if p is None else p
    R = prof.r_max
    n = 512

    def integrals(n):
        r = np.linspace(0.0, R, n + 1)
        psi = prof(r)
        dpsi = prof.derivative(r)
        w = 2.0 * np.ones_like(r) if prof.dim == 1 else 2.0 * np.pi * r
        h = R / n
        kin = _simpson(w * dpsi**2, h)
        pot = _simpson(w * np.abs(psi) ** (2 * p + 2), h)
        mass = _simpson(w * psi**2, h)
        return np.array([kin - pot / (p + 1.0), mass])

    prev = integrals(n)
    for _ in range(max_halvings):
        n *= 2
        cur = integrals(n)
        if np.all(np.abs(cur - prev) <= tol * np.maximum(1.0, np.abs(cur))):
            return float(cur[0]), float(cur[1])
        prev = cur
    raise RuntimeError(f"quadrature did not settle to {tol} after {max_halvings} halvings")


def ode_residual(prof: ContinuumProfile, stride: int | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Defect of the radial equation on table nodes via 4th-order differences.

    Returns ``(r, residual)`` sampled every ``stride`` nodes (100 samples by
    default).  Uses only the tabulated values, not the stored derivatives.
    """
    r, psi = prof.r, prof.psi
    h = r[1] - r[0]
    ext = np.concatenate([psi[2:0:-1], psi])  # even reflection through r = 0
    idx = np.arange(2, len(r) - 2) + 2
    d1 = (ext[idx - 2] - 8 * ext[idx - 1] + 8 * ext[idx + 1] - ext[idx + 2]) / (12 * h)
    d2 = (-ext[idx - 2] + 16 * ext[idx - 1] - 30 * ext[idx] + 16 * ext[idx + 1] - ext[idx + 2]) / (12 * h * h)
    rr = r[2:-2]
    p, lam = prof.p, prof.lambda_c
    core = psi[2:-2]
    res = d2 + np.abs(core) ** (2 * p) * core + lam * core
    if prof.dim == 2:
        res += d1 / rr
    stride = stride or max(1, len(rr) // 100)
    return rr[::stride], res[::stride]
