import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dnls_breathers.continuum import shoot_radial_ground_state
from dnls_breathers.fem import (
    FemFunction,
    euler_maclaurin_residual,
    evaluate,
    gradient_energy,
    h1_error,
    l2_mass_identity_check,
    node_coordinates,
    profile_gradient,
    project,
    quadrature_gradient_energy,
)
from dnls_breathers.lattice import LatticeField, ModeSpec, reflection_index
from dnls_breathers.solver import ground_state, log_log_slope

MODES = [ModeSpec.from_label(lab, d) for d, labs in ((1, ["ST", "P"]), (2, ["ST", "P", "H_x", "H_y"])) for lab in labs]
LADDER = [0.4, 0.2, 0.1, 0.05]


def random_fem(seed, mode, mesh=0.37, radius=5):
    rng = np.random.default_rng(seed)
    base = LatticeField(mode.dim, mesh, radius, rng.uniform(-1, 1, (2 * radius + 1,) * mode.dim))
    return FemFunction.from_mode(base, mode)


@pytest.mark.parametrize("mode", MODES, ids=lambda m: f"{m.dim}d-{m.label}")
def test_nodes_are_interpolated(mode):
    F = random_fem(1, mode)
    coords = node_coordinates(F.mesh, F.base.radius, mode)
    np.testing.assert_array_equal(evaluate(F, *coords), F.base.values)
    np.testing.assert_array_equal(project(F, F.mesh, F.base.radius, mode).values, F.base.values)


def test_1d_midpoint_and_outside():
    F = random_fem(2, MODES[0])
    v, mu = F.base.values, F.mesh
    j = np.arange(-5, 5)
    np.testing.assert_allclose(F((j + 0.5) * mu), 0.5 * (v[:-1] + v[1:]), rtol=1e-14, atol=1e-15)
    assert F(np.array([-7 * mu, 6.5 * mu, 100.0])).tolist() == [0.0, 0.0, 0.0]
    # ramp to the ghost zero in the outer cell
    assert F(np.array(5.5 * mu)) == pytest.approx(0.5 * v[-1], rel=1e-14)


def test_2d_centroids_and_diagonal():
    F = random_fem(3, MODES[2])
    P, mu = F.padded(), F.mesh
    j, k = 1, -2
    a, b = j + 6, k + 6
    tplus = F(np.array((j + 1 / 3) * mu), np.array((k + 1 / 3) * mu))
    assert tplus == pytest.approx((P[a, b] + P[a + 1, b] + P[a, b + 1]) / 3, rel=1e-13)
    tminus = F(np.array((j + 2 / 3) * mu), np.array((k + 2 / 3) * mu))
    assert tminus == pytest.approx((P[a + 1, b + 1] + P[a + 1, b] + P[a, b + 1]) / 3, rel=1e-13)
    # on the anti-diagonal both triangles agree (continuity)
    t = 0.3
    on = F(np.array((j + t) * mu), np.array((k + 1 - t) * mu))
    assert on == pytest.approx((1 - t) * P[a, b + 1] + t * P[a + 1, b], rel=1e-13)


@given(st.integers(0, 10**6), st.floats(0.05, 0.45), st.floats(0.05, 0.45), st.floats(-1, 1), st.floats(-1, 1))
def test_affine_inside_triangle(seed, x, y, dx, dy):
    # three collinear points inside T+ of one cell: zero second difference
    F = random_fem(seed % 97, MODES[2])
    mu, h = F.mesh, 0.04
    px = (np.array([x - h * dx, x, x + h * dx]) + 1) * mu
    py = (np.array([y - h * dy, y, y + h * dy]) - 2) * mu
    v = F(px, py)
    assert abs(v[0] - 2 * v[1] + v[2]) <= 1e-12


def test_gradient_energy_hand_values():
    d1 = FemFunction(LatticeField.delta(1, 0.5, 4))
    assert gradient_energy(d1) == pytest.approx(4.0, rel=1e-15)
    assert quadrature_gradient_energy(d1) == pytest.approx(4.0, rel=1e-13)
    d2 = FemFunction(LatticeField.delta(2, 0.5, 4))
    assert gradient_energy(d2) == pytest.approx(4.0, rel=1e-15)
    assert quadrature_gradient_energy(d2) == pytest.approx(4.0, rel=1e-13)
    assert gradient_energy(FemFunction(LatticeField.zeros(2, 0.3, 3))) == 0
    # a constant only has slope in the ramp cells next to the ghost zeros
    c, mu = 1.7, 0.25
    const = FemFunction(LatticeField(1, mu, 4, np.full(9, c)))
    assert gradient_energy(const) == pytest.approx(2 * c * c / mu, rel=1e-14)
    assert quadrature_gradient_energy(const) == pytest.approx(2 * c * c / mu, rel=1e-13)


@pytest.mark.parametrize("mode", MODES, ids=lambda m: f"{m.dim}d-{m.label}")
@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), mesh=st.floats(0.02, 3.0))
def test_gradient_identity_random(mode, seed, mesh):
    F = random_fem(seed, mode, mesh=mesh)
    a, b = gradient_energy(F), quadrature_gradient_energy(F)
    assert abs(a - b) <= 1e-12 * abs(a)


def test_mass_identity_hand_values():
    for mu in (0.1, 0.5, 2.0):
        F = FemFunction(LatticeField.delta(1, mu, 3))
        lhs, rhs = l2_mass_identity_check(F)
        assert lhs == mu
        assert rhs == pytest.approx(2 * mu / 3 + mu / 3, rel=1e-14)
    assert l2_mass_identity_check(FemFunction(LatticeField.zeros(2, 0.4, 3))) == (0.0, 0.0)


@pytest.mark.parametrize("mode", MODES, ids=lambda m: f"{m.dim}d-{m.label}")
@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), mesh=st.floats(0.02, 3.0))
def test_mass_identity_random(mode, seed, mesh):
    lhs, rhs = l2_mass_identity_check(random_fem(seed, mode, mesh=mesh))
    assert abs(lhs - rhs) <= 1e-12 * lhs


def test_p_projection_symmetric():
    prof = ground_state(1, 1.0)
    P = ModeSpec.from_label("P", 1)
    f = project(prof, 0.3, 40, P).values
    img = reflection_index(40, 0.5)
    ok = img >= 0
    np.testing.assert_array_equal(f[ok], f[img[ok]])
    P2 = ModeSpec.from_label("P", 2)
    g = project(shoot_radial_ground_state(2, 0.5, -1.0), 0.5, 12, P2).values
    np.testing.assert_allclose(g[:-1, :-1], g[:-1, :-1][::-1, ::-1], rtol=1e-14)
    np.testing.assert_allclose(g[:-1, :-1], g[:-1, :-1].T, rtol=1e-14)


def _h1_ladder(prof, mode):
    R = prof.cutoff_radius(1e-10)
    errs = []
    for mu in LADDER:
        K = int(np.ceil(R / mu))
        F = FemFunction.from_mode(project(prof, mu, K, mode), mode)
        errs.append(h1_error(F, prof.at, profile_gradient(prof)))
    return log_log_slope(LADDER, errs)


def test_h1_projection_error_1d():
    assert 0.8 <= _h1_ladder(ground_state(1, 1.0), ModeSpec.from_label("P", 1)) <= 1.2


@pytest.mark.slow
def test_h1_projection_error_2d():
    prof = shoot_radial_ground_state(2, 0.5, -1.0)
    assert 0.8 <= _h1_ladder(prof, ModeSpec.from_label("H_x", 2)) <= 1.2


def test_euler_maclaurin_basic():
    assert euler_maclaurin_residual(FemFunction(LatticeField.zeros(1, 0.3, 3)), 2.0) == 0.0
    with pytest.raises(ValueError):
        euler_maclaurin_residual(FemFunction(LatticeField.zeros(1, 0.3, 3)), 0.5)
    # constant c: interior cells are exact, each ramp cell gives c^4 mu / 5
    c, mu = 1.3, 0.2
    rel = []
    for K in (4, 8, 16):
        F = FemFunction(LatticeField(1, mu, K, np.full(2 * K + 1, c)))
        r = euler_maclaurin_residual(F, 2.0)
        assert r == pytest.approx(-0.6 * c**4 * mu, rel=1e-12)
        rel.append(abs(r) / (mu * (2 * K + 1) * c**4))
    assert rel[0] > rel[1] > rel[2]


def test_euler_maclaurin_scaling_1d():
    prof = shoot_radial_ground_state(1, 1.0, -1.0)
    mode = ModeSpec.from_label("ST", 1)
    R = prof.cutoff_radius(1e-6)
    res = [abs(euler_maclaurin_residual(FemFunction.from_mode(project(prof, mu, int(np.ceil(R / mu)), mode), mode), 2.0))
           for mu in LADDER]
    assert log_log_slope(LADDER, res) >= 0.9
