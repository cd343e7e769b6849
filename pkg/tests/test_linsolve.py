import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from llimex.grid import GridSpec, VectorField3, fill_ghosts, laplacian, norms
from llimex.linsolve import (
    GmresConfig,
    dense_helmholtz_matrix,
    dense_oracle_solve,
    gmres_solve,
    helmholtz_plan,
    helmholtz_solve,
)

rng = np.random.default_rng(42)


def random_field(grid, seed=None):
    r = np.random.default_rng(seed) if seed is not None else rng
    return VectorField3.from_interior(grid, r.standard_normal(grid.shape_interior + (3,)))


# ---------------------------------------------------------------------------
# plan construction
# ---------------------------------------------------------------------------


def test_plan_lambda_zero_identity():
    plan = helmholtz_plan(GridSpec.unit_cube(4), 0.0)
    assert np.all(plan.denominators == 1.0)


def test_plan_rejects_negative_lambda():
    with pytest.raises(ValueError):
        helmholtz_plan(GridSpec.line(4), -0.1)


def test_plan_1d_two_cell_hand_eigenvalues():
    # 2x2 mirrored-ghost Laplacian at h = 1/2 is 4*[[-1,1],[1,-1]]:
    # eigenvalues {0, -8}, so lam = 1 gives denominators {1, 9}
    g = GridSpec(dim=1, n=(2,), h=(0.5,), extent=(1.0,))
    plan = helmholtz_plan(g, 1.0)
    assert np.allclose(np.sort(plan.denominators.ravel()), [1.0, 9.0])
    dense = dense_helmholtz_matrix(g, 1.0)
    assert np.allclose(np.sort(np.linalg.eigvalsh(dense)), [1.0, 9.0])


def test_plan_spectrum_matches_dense_eigensolver():
    g = GridSpec.unit_cube(6)
    lam = 0.37
    plan = helmholtz_plan(g, lam)
    dense = dense_helmholtz_matrix(g, lam)
    want = np.sort(np.linalg.eigvalsh(dense))
    got = np.sort(plan.denominators.ravel())
    assert np.max(np.abs(got - want)) < 1e-10


def test_plan_denominators_at_least_one():
    for g in (GridSpec.line(17), GridSpec.box((4, 6, 2), (1.0, 1.0, 1.0))):
        plan = helmholtz_plan(g, 2.5)
        assert np.all(plan.denominators >= 1.0)


# ---------------------------------------------------------------------------
# fast solve
# ---------------------------------------------------------------------------


def test_solve_lambda_zero_is_identity():
    g = GridSpec.line(9)
    b = random_field(g, seed=1)
    x = helmholtz_solve(helmholtz_plan(g, 0.0), b)
    assert np.max(np.abs(x.interior - b.interior)) < 1e-14


def test_solve_constant_rhs_passthrough():
    g = GridSpec.unit_cube(4)
    b = VectorField3.zeros(g)
    b.interior[...] = (0.2, -0.4, 1.0)
    x = helmholtz_solve(helmholtz_plan(g, 3.0), b)
    assert np.max(np.abs(x.interior - b.interior)) < 1e-13


def test_solve_matches_dense_lu_8cubed():
    g = GridSpec.unit_cube(8)
    lam = 0.37
    b = random_field(g, seed=2)
    fast = helmholtz_solve(helmholtz_plan(g, lam), b)
    dense = dense_oracle_solve(g, lam, b)
    scale = np.max(np.abs(dense.interior))
    assert np.max(np.abs(fast.interior - dense.interior)) < 1e-10 * max(1.0, scale)


def test_solve_residual_small():
    g = GridSpec.box((6, 4, 2), (1.0, 1.0, 0.25))
    lam = 1.7
    b = random_field(g, seed=3)
    x = helmholtz_solve(helmholtz_plan(g, lam), b)
    fill_ghosts(x)
    resid = x.interior - lam * laplacian(x).interior - b.interior
    r = VectorField3.from_interior(g, resid)
    assert norms(r).l2 <= 1e-10 * norms(b).l2


@given(st.integers(min_value=0, max_value=2**31 - 1))
@settings(max_examples=15, deadline=None)
def test_solve_round_trip(seed):
    g = GridSpec.line(12)
    lam = 0.8
    x = random_field(g, seed=seed)
    b = VectorField3.from_interior(g, x.interior - lam * laplacian(x).interior)
    back = helmholtz_solve(helmholtz_plan(g, lam), b)
    assert np.max(np.abs(back.interior - x.interior)) < 1e-10


def test_solve_preserves_mean():
    # zero mode passes through unchanged for every lam
    g = GridSpec.line(16)
    b = random_field(g, seed=4)
    x = helmholtz_solve(helmholtz_plan(g, 5.0), b)
    assert np.allclose(np.mean(x.interior, axis=0), np.mean(b.interior, axis=0), atol=1e-12)


def test_solve_componentwise_permutation_invariance():
    g = GridSpec.line(10)
    b = random_field(g, seed=5)
    plan = helmholtz_plan(g, 0.9)
    x = helmholtz_solve(plan, b)
    perm = [2, 0, 1]
    b_perm = VectorField3.from_interior(g, b.interior[:, perm])
    x_perm = helmholtz_solve(plan, b_perm)
    assert np.max(np.abs(x_perm.interior - x.interior[:, perm])) < 1e-14


# ---------------------------------------------------------------------------
# dense oracle
# ---------------------------------------------------------------------------


def test_dense_oracle_lambda_zero():
    g = GridSpec.line(5)
    b = random_field(g, seed=6)
    x = dense_oracle_solve(g, 0.0, b)
    assert np.allclose(x.interior, b.interior)


def test_dense_oracle_hand_3x3():
    # n=3, lam=h^2: A = [[2,-1,0],[-1,3,-1],[0,-1,2]], A^-1 e1 = (5/8, 1/4, 1/8)
    g = GridSpec.line(3)
    b = VectorField3.zeros(g)
    b.interior[0, 0] = 1.0
    x = dense_oracle_solve(g, g.h[0] ** 2, b)
    assert np.allclose(x.interior[:, 0], [5 / 8, 1 / 4, 1 / 8])
    assert np.all(x.interior[:, 1:] == 0.0)


def test_dense_oracle_size_guard():
    g = GridSpec.unit_cube(17)  # 4913 > 4096
    with pytest.raises(ValueError):
        dense_oracle_solve(g, 0.1, VectorField3.zeros(g))


# ---------------------------------------------------------------------------
# GMRES
# ---------------------------------------------------------------------------


def test_gmres_identity_one_iteration():
    g = GridSpec.line(8)
    b = random_field(g, seed=7)
    res = gmres_solve(lambda f: f.copy(), b, GmresConfig())
    assert res.converged
    assert res.iters <= 1
    assert np.max(np.abs(res.x.interior - b.interior)) < 1e-9


def test_gmres_zero_rhs():
    g = GridSpec.line(8)
    res = gmres_solve(lambda f: f.copy(), VectorField3.zeros(g), GmresConfig())
    assert res.converged and res.iters == 0
    assert np.all(res.x.interior == 0.0)


def test_gmres_agrees_with_helmholtz():
    g = GridSpec.line(20)
    lam = 0.51

    def op(f):
        return VectorField3.from_interior(g, f.interior - lam * laplacian(f).interior)

    b = random_field(g, seed=8)
    res = gmres_solve(op, b, GmresConfig(rel_tol=1e-12))
    fast = helmholtz_solve(helmholtz_plan(g, lam), b)
    assert res.converged
    assert np.max(np.abs(res.x.interior - fast.interior)) < 1e-8


def test_gmres_bdf2_like_operator_residual():
    # variable-coefficient non-symmetric operator at a random unit-length state
    g = GridSpec.line(16)
    r = np.random.default_rng(9)
    mhat = r.standard_normal((16, 3))
    mhat /= np.linalg.norm(mhat, axis=-1, keepdims=True)
    k, eps, alpha = 1e-2, 1.0, 0.01

    def op(f):
        lap = laplacian(f).interior
        mxl = np.cross(mhat, eps * lap)
        out = 1.5 * f.interior + k * mxl + k * alpha * np.cross(mhat, mxl)
        return VectorField3.from_interior(g, out)

    b = random_field(g, seed=10)
    cfg = GmresConfig(rel_tol=1e-10)
    res = gmres_solve(op, b, cfg)
    assert res.converged
    assert res.residual <= cfg.rel_tol
    assert res.iters > 0


def test_gmres_config_validation():
    with pytest.raises(ValueError):
        GmresConfig(restart=0)
    with pytest.raises(ValueError):
        GmresConfig(rel_tol=2.0)
