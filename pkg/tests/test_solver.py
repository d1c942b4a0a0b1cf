import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from dnls_breathers import solver
from dnls_breathers.fem import project
from dnls_breathers.lattice import (
    LatticeField,
    ModeSpec,
    hamiltonian_d,
    interior_mask,
    is_symmetric,
    lagrange_residual,
    norm_d,
    qmu_norm,
    reflect,
)
from dnls_breathers.solver import (
    BreatherResult,
    SingularJacobianError,
    SolverError,
    active_mask,
    coercivity_check,
    convergence_study,
    ground_state,
    initial_guess,
    log_log_slope,
    rescale_to_mu_free,
    solve_breather,
    sup_bound_check,
)

ST1, P1 = ModeSpec.from_label("ST", 1), ModeSpec.from_label("P", 1)


def test_initial_guess_properties():
    prof = ground_state(1, 1.0)
    for mode in (ST1, P1):
        g = initial_guess(prof, mode, 0.2)
        assert norm_d(g) == pytest.approx(1.0, abs=1e-14)
        assert is_symmetric(g, mode)
        assert np.all(g.values[~active_mask(g.radius, mode)] == 0)
    g = initial_guess(prof, ST1, 0.2)
    nu = g.values[g.radius] / prof.amplitude
    assert nu == pytest.approx(1.0, abs=1e-3)
    with pytest.raises(ValueError):
        initial_guess(prof, ModeSpec.from_label("ST", 2), 0.2)
    with pytest.raises(ValueError):
        initial_guess(type(prof)(1, 1.0, -1.0, prof.r, 0 * prof.psi, 0 * prof.dpsi), ST1, 0.2)


def test_guess_residual_is_second_order():
    prof = ground_state(1, 1.0)
    mus = [0.4, 0.2, 0.1, 0.05]
    res = []
    for mu in mus:
        g = initial_guess(prof, ST1, mu)
        lam = solver._rayleigh_lambda(g.values, solver.laplacian_matrix(1, g.radius), mu, 1.0)
        r = lagrange_residual(g, lam, 1.0)
        res.append(np.max(np.abs(r[active_mask(g.radius, ST1)])))
    assert 1.7 <= log_log_slope(mus, res) <= 2.3


@pytest.mark.parametrize("label", ["ST", "P"])
def test_solve_1d(breathers_1d, label):
    res = breathers_1d[label]
    mode = res.mode
    assert res.iterations <= 8
    assert res.residual_inf <= 1e-12
    r = lagrange_residual(res.field, res.lam, res.p)
    assert np.max(np.abs(r[active_mask(res.radius, mode)])) <= 1e-12
    assert norm_d(res.field) == pytest.approx(1.0, abs=1e-12)
    assert is_symmetric(res.field, mode, atol=1e-13)
    assert np.all(res.field.values[~interior_mask(1, res.radius)] == 0)
    assert res.trace[-1] == res.residual_inf and len(res.trace) == res.iterations + 1
    again = solve_breather(res.field, mode, res.p, lam0=res.lam)
    assert again.iterations <= 1
    assert np.max(np.abs(again.field.values - res.field.values)) <= 1e-12
    assert again.lam == pytest.approx(res.lam, abs=1e-12)


def test_modes_distinct_and_ordered(breathers_1d):
    st_, p_ = breathers_1d["ST"], breathers_1d["P"]
    assert qmu_norm(st_.field - p_.field) > 10 * 1e-12
    # the energy gap is exponentially small in 1/mu: roundoff at mu = 0.2
    assert abs(hamiltonian_d(st_.field, 1.0) - hamiltonian_d(p_.field, 1.0)) <= 1e-14
    prof = ground_state(1, 1.0)
    for mu in (2.0, 1.5):
        h = [hamiltonian_d(solve_breather(initial_guess(prof, m, mu), m, 1.0).field, 1.0) for m in (ST1, P1)]
        assert h[0] < h[1]


def test_max_iter_and_basin_errors():
    prof = ground_state(1, 1.0)
    with pytest.raises(SolverError) as err:
        solve_breather(initial_guess(prof, ST1, 0.2), ST1, 1.0, max_iter=1)
    assert len(err.value.trace) == 2
    with pytest.raises(SolverError, match="basin"):
        solve_breather(initial_guess(prof, ST1, 4.0), ST1, 1.0)
    with pytest.raises(ValueError):
        solve_breather(initial_guess(prof, ST1, 0.2), ST1, 1.0, tol=0.0)
    with pytest.raises(SingularJacobianError):
        solver._make_solver(sp.csc_matrix((3, 3)))


def test_iterative_path_agrees(monkeypatch):
    prof = ground_state(1, 1.0)
    direct = solve_breather(initial_guess(prof, P1, 0.4), P1, 1.0)
    monkeypatch.setattr(solver, "DIRECT_LIMIT", 10)
    iterative = solve_breather(initial_guess(prof, P1, 0.4), P1, 1.0)
    assert iterative.lam == pytest.approx(direct.lam, abs=1e-12)
    assert np.max(np.abs(iterative.field.values - direct.field.values)) <= 1e-11


def test_coercivity(breathers_1d, monkeypatch):
    st_, p_ = breathers_1d["ST"], breathers_1d["P"]
    m_st = coercivity_check(st_)
    assert m_st > 0
    assert coercivity_check(p_) > 0
    # reflected field gives the same spectrum
    flipped = BreatherResult(reflect(st_.field, ST1), ST1, 1.0, st_.lam, st_.residual_inf, 0)
    assert coercivity_check(flipped) == pytest.approx(m_st, rel=1e-12)
    # shift-invert path matches the dense one
    monkeypatch.setattr(solver, "DENSE_EIG_LIMIT", 10)
    assert coercivity_check(st_) == pytest.approx(m_st, rel=1e-9)
    # without the symmetry restriction the translation remnant sits at roundoff
    assert abs(coercivity_check(st_, symmetric=False)) <= 1e-12


def test_translation_mode_shrinks_on_coarse_ladder():
    prof = ground_state(1, 1.0)
    for mode in (ST1, P1):
        mags = []
        for mu in (2.0, 1.5, 1.0):
            res = solve_breather(initial_guess(prof, mode, mu), mode, 1.0)
            mags.append(abs(coercivity_check(res, symmetric=False)))
            assert coercivity_check(res) > 0
        assert mags[0] > mags[1] > mags[2] > 1e-13


def test_sup_bound_hand_values():
    assert sup_bound_check(LatticeField.zeros(1, 0.5, 3)) == (0.0, 0.0)
    lhs, rhs = sup_bound_check(LatticeField.delta(1, 1.0, 3))
    assert lhs == 1.0 and rhs == pytest.approx(2 * np.sqrt(3), rel=1e-15)


@settings(max_examples=200)
@given(st.integers(0, 2**32 - 1), st.sampled_from([1, 2]), st.floats(0.01, 5.0), st.floats(1e-3, 1e3))
def test_sup_bound_random(seed, dim, mesh, scale):
    rng = np.random.default_rng(seed)
    K = int(rng.integers(2, 8))
    vals = scale * rng.standard_normal((2 * K + 1,) * dim) * (rng.random((2 * K + 1,) * dim) < 0.5)
    lhs, rhs = sup_bound_check(LatticeField(dim, mesh, K, vals))
    assert lhs <= rhs


def test_rescale_to_mu_free(breathers_1d):
    res = breathers_1d["ST"]
    phi, lam_t, E = rescale_to_mu_free(res)
    assert phi.mesh == 1.0
    r = lagrange_residual(phi, lam_t, 1.0)
    assert np.max(np.abs(r[active_mask(phi.radius, ST1)])) <= 10 * 1e-12
    assert np.sum(phi.values**2) == pytest.approx(0.2 ** (2 / 1.0 - 1), rel=1e-12)
    assert E == pytest.approx(0.2, rel=1e-15)
    # E -> 0 with mu whenever p < 2/n
    for dim, p in ((1, 1.0), (1, 1.9), (2, 0.5), (2, 0.99)):
        assert 0.01 ** (2 / p - dim) < 0.1 ** (2 / p - dim) < 1


def test_convergence_study_1d():
    rep = convergence_study(ST1, 1.0, [0.05, 0.4, 0.1, 0.2])
    mus = [r["mu"] for r in rep.rows]
    assert mus == sorted(mus, reverse=True)
    assert not rep.partial
    assert rep.fitted_order_qmu >= 0.8 and rep.fitted_order_sup >= 0.8
    gaps = [abs(r["lambda"] - ground_state(1, 1.0).lambda_c) for r in rep.rows]
    assert all(a > b for a, b in zip(gaps, gaps[1:]))
    # errors are measured against the raw samples
    row = rep.rows[0]
    prof = ground_state(1, 1.0)
    assert row["qmu_error"] > 0
    assert project(prof, row["mu"], row["radius"], ST1).values.max() == pytest.approx(prof.amplitude, rel=1e-15)
    with pytest.raises(ValueError):
        convergence_study(ST1, 1.0, [0.2, 0.1])


def test_convergence_study_partial():
    rep = convergence_study(ST1, 1.0, [4.0, 0.4, 0.2, 0.1])
    assert rep.partial
    assert [f["mu"] for f in rep.failures] == [4.0]
    assert len(rep.rows) == 3 and np.isfinite(rep.fitted_order_qmu)
    assert rep.summary()["partial"] is True
