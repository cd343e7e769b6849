"""Acceptance gate: one test per headline criterion.

Each test prints a single pass/fail line (run with ``pytest -v -s`` to see
them live).  Tolerance bands are fixed here; the two micromagnetic criteria
at the end dominate the runtime.
"""

import time

import numpy as np

from llimex.grid import GridSpec, VectorField3, face_gradient, face_inner, laplacian, inner_product
from llimex.linsolve import GmresConfig, dense_oracle_solve, helmholtz_plan, helmholtz_solve
from llimex.physics import MaterialParams, build_demag_tensor, stray_field, stray_field_direct
from llimex.steppers import SchemeId, builtin_tableau, imex_stage_loop
from llimex.experiments import (
    DynamicsConfig,
    LoopConfig,
    RefinementSpec,
    beta_sweep,
    convergence_study,
    efficiency_bench,
    equilibrium_study,
    hysteresis,
    stability_probe,
)


def _gate(num, desc, ok, detail, t0):
    status = "PASS" if ok else "FAIL"
    print(f"[criterion {num:2d}] {status} ({time.time() - t0:6.1f}s) {desc}: {detail}")
    assert ok, f"criterion {num} failed: {desc}: {detail}"


def test_criterion_01_temporal_order_rk2_1d():
    t0 = time.time()
    tau = 1e-3
    spec = RefinementSpec(
        mode="temporal", final_time=tau,
        ks=tuple(tau / d for d in (5, 10, 15, 20, 25)), n_fixed=400,
    )
    rep = convergence_study(
        SchemeId.IMEXRK2, 1, spec, MaterialParams.dimensionless(alpha=0.01, beta=5.0)
    )
    o_inf, o_l2 = rep.fitted_order["linf"], rep.fitted_order["l2"]
    ok = 1.7 <= o_inf <= 2.1 and 1.7 <= o_l2 <= 2.1
    _gate(1, "temporal order, 2nd-order scheme, 1-D",
          ok, f"linf={o_inf:.4f} l2={o_l2:.4f} (band [1.7, 2.1])", t0)


def test_criterion_02_spatial_order_rk2_1d():
    t0 = time.time()
    spec = RefinementSpec(
        mode="spatial", final_time=1e-3, ns=(50, 100, 150, 200, 250), k_fixed=1e-6
    )
    rep = convergence_study(SchemeId.IMEXRK2, 1, spec)
    orders = [rep.fitted_order[n] for n in ("linf", "l2", "h1")]
    ok = all(1.85 <= o <= 2.1 for o in orders)
    _gate(2, "spatial order, 2nd-order scheme, 1-D",
          ok, "orders " + " ".join(f"{o:.4f}" for o in orders) + " (band [1.85, 2.1])", t0)


def test_criterion_03_temporal_order_rk2_3d():
    t0 = time.time()
    spec = RefinementSpec(
        mode="temporal", final_time=1.0, ks=(1 / 4, 1 / 6, 1 / 8, 1 / 10), n_fixed=8
    )
    rep = convergence_study(SchemeId.IMEXRK2, 3, spec)
    o_inf = rep.fitted_order["linf"]
    ok = 1.8 <= o_inf <= 2.1
    _gate(3, "temporal order, 2nd-order scheme, 3-D",
          ok, f"linf={o_inf:.4f} (band [1.8, 2.1])", t0)


def test_criterion_04_rk3_coupled_orders():
    t0 = time.time()
    details = []
    ok = True
    for dim, c in ((1, 0.01), (3, 0.001)):
        spec = RefinementSpec(mode="coupled", final_time=1.0, ns=(3, 4, 5, 6), coupling=c)
        rep = convergence_study(SchemeId.IMEXRK3, dim, spec)
        orders = [rep.fitted_order[n] for n in ("linf", "l2", "h1")]
        details.append(f"{dim}-D " + " ".join(f"{o:.4f}" for o in orders))
        ok = ok and all(2.7 <= o <= 3.3 for o in orders)
    _gate(4, "coupled k = c h^(2/3) order, 3rd-order scheme",
          ok, "; ".join(details) + " (band [2.7, 3.3])", t0)


def test_criterion_05_ssp_orders_1d():
    t0 = time.time()
    tau = 2e-2
    spec = RefinementSpec(
        mode="paired", final_time=tau,
        ks=tuple(tau / d for d in (3, 4, 5, 6)), ns=(3, 4, 5, 6),
    )
    rep = convergence_study(SchemeId.SSPIMEXRK2, 1, spec)
    o_inf = rep.fitted_order["linf"]
    ok = 1.7 <= o_inf <= 2.3
    _gate(5, "temporal order, four-stage SSP scheme, 1-D",
          ok, f"linf={o_inf:.4f} (band [1.7, 2.3])", t0)


def test_criterion_06_beta_insensitivity():
    t0 = time.time()
    spec = RefinementSpec(mode="paired", final_time=1.0, ks=(1 / 1000,), ns=(2,))
    table = beta_sweep(SchemeId.IMEXRK2, (1.0, 3.0, 4.0), (0.001, 0.01), 3, spec)
    errs = [rep.samples[0].linf for rep in table.values()]
    spread = max(abs(a - b) / a for a in errs for b in errs)
    ok = spread <= 0.01
    _gate(6, "artificial-damping insensitivity, 3-D",
          ok, f"max pairwise relative spread {spread:.2e} (band 1%)", t0)


def test_criterion_07_linear_stability():
    t0 = time.time()
    grid = GridSpec.line(32)
    rep = stability_probe(
        grid, beta=5.0, ratios=(0.1, 1.0, 10.0, 100.0), n_steps=50, trials=100, seed=0
    )
    ok = (
        rep.max_step_residual <= 1e-10
        and rep.max_cumulative_residual <= 1e-10
        and rep.max_final_printed_residual <= 1e-10
        and not rep.violations
    )
    _gate(7, "pure-diffusion energy inequalities, four-stage scheme",
          ok,
          f"per-step {rep.max_step_residual:.2e}, telescoped {rep.max_cumulative_residual:.2e}, "
          f"scalar-form {rep.max_final_printed_residual:.2e} (all <= 1e-10)", t0)


def test_criterion_08_operator_solver_oracles():
    t0 = time.time()
    rng = np.random.default_rng(8)
    checks = {}

    # summation by parts on random fields, 1-D and 3-D
    worst_sbp = 0.0
    for g in (GridSpec.line(16), GridSpec.unit_cube(5)):
        f = VectorField3.from_interior(g, rng.standard_normal(g.shape_interior + (3,)))
        w = VectorField3.from_interior(g, rng.standard_normal(g.shape_interior + (3,)))
        lhs = -inner_product(laplacian(f), w)
        rhs = face_inner(face_gradient(f), face_gradient(w), g)
        worst_sbp = max(worst_sbp, abs(lhs - rhs) / max(1.0, abs(lhs)))
    checks["sbp"] = worst_sbp <= 1e-12

    # DCT solve vs dense LU on 8^3
    g = GridSpec.unit_cube(8)
    b = VectorField3.from_interior(g, rng.standard_normal(g.shape_interior + (3,)))
    fast = helmholtz_solve(helmholtz_plan(g, 0.37), b)
    dense = dense_oracle_solve(g, 0.37, b)
    derr = np.max(np.abs(fast.interior - dense.interior)) / max(1.0, np.max(np.abs(dense.interior)))
    checks["dct_vs_lu"] = derr <= 1e-10

    # stray field vs direct summation on 4x4x2
    g = GridSpec.box((4, 4, 2), (1.0, 1.0, 0.5))
    m = VectorField3.from_interior(g, rng.standard_normal(g.shape_interior + (3,)))
    serr = np.max(
        np.abs(stray_field(build_demag_tensor(g), m).interior - stray_field_direct(g, m).interior)
    )
    checks["stray_vs_direct"] = serr <= 1e-10

    # tableau-driven steps vs the literal marching formulas
    from test_steppers import _field_ops, _time_dependent_n, literal_rk2, literal_rk3, literal_ssp

    g = GridSpec.line(8)
    L, S = _field_ops(g, 2.0, 1e-2)
    N = _time_dependent_n(g)
    m0 = rng.standard_normal(g.shape_interior + (3,))
    worst_tab = 0.0
    for scheme, literal in (
        (SchemeId.IMEXRK2, literal_rk2),
        (SchemeId.IMEXRK3, literal_rk3),
        (SchemeId.SSPIMEXRK2, literal_ssp),
    ):
        got, _ = imex_stage_loop(m0.copy(), 0.3, 1e-2, builtin_tableau(scheme), L, S, N)
        want = literal(m0.copy(), 0.3, 1e-2, L, S, N)
        worst_tab = max(worst_tab, float(np.max(np.abs(got - want))))
    checks["tableau_vs_literal"] = worst_tab <= 1e-14

    ok = all(checks.values())
    _gate(8, "operator/solver oracles",
          ok,
          f"sbp {worst_sbp:.1e}<=1e-12, dct-lu {derr:.1e}<=1e-10, "
          f"stray {serr:.1e}<=1e-10, tableau {worst_tab:.1e}<=1e-14", t0)


def test_criterion_09_efficiency_trend():
    t0 = time.time()
    rep = efficiency_bench(
        [SchemeId.IMEXRK2, SchemeId.BDF2], dim=1, n=400,
        ks=(2.5e-4, 1e-4, 5e-5, 2.5e-5), final_time=5e-4,
        gmres_cfg=GmresConfig(rel_tol=1e-12),
    )
    t_rk2 = rep.time_at_error(SchemeId.IMEXRK2, 1e-9)
    t_bdf = rep.time_at_error(SchemeId.BDF2, 1e-9)
    ok = t_rk2 < t_bdf
    _gate(9, "efficiency at matched 1e-9 error, 1-D",
          ok, f"imexrk2 {t_rk2:.3f}s < bdf2 {t_bdf:.3f}s", t0)


def test_criterion_10_equilibrium_states():
    t0 = time.time()
    grid = GridSpec.box((32, 64, 1), (0.5, 1.0, 0.01))
    params = MaterialParams.permalloy(L=2e-6, alpha=0.1, beta=3.0)
    dyn = DynamicsConfig(k=0.17702, steady_tol=1e-9, max_steps=25000)
    results = equilibrium_study(grid, params, dyn)
    finals = {}
    monotone_ok = True
    detail = []
    for kind, res in results.items():
        e = res.trace[:, 6]
        finals[kind] = e[-1]
        tail = np.diff(e[len(e) // 2:])
        monotone_ok = monotone_ok and np.all(tail <= 1e-12)
        mags = np.sqrt(np.sum(res.final.interior**2, axis=-1))
        monotone_ok = monotone_ok and np.max(np.abs(mags - 1.0)) < 1e-12
        detail.append(f"{kind}: E={e[-1]:.6e} steps={res.steps}")
    kinds = list(finals)
    gaps = [
        abs(finals[a] - finals[b]) / max(abs(finals[a]), abs(finals[b]))
        for i, a in enumerate(kinds) for b in kinds[i + 1:]
    ]
    distinct_ok = all(g > 1e-6 for g in gaps)
    ok = monotone_ok and distinct_ok
    _gate(10, "three distinct thin-film equilibria",
          ok,
          "; ".join(detail) + f"; min gap {min(gaps):.2e} (> 1e-6), "
          f"second-half traces monotone to 1e-12: {monotone_ok}", t0)


def test_criterion_11_hysteresis_loop_properties():
    t0 = time.time()
    grid = GridSpec.box((25, 50, 1), (0.5, 1.0, 0.02))
    params = MaterialParams.permalloy(L=2e-6, alpha=0.1, beta=3.0)
    dyn = DynamicsConfig(k=0.354)
    coercivities = {}
    detail = []
    ok = True
    for axis in ("y", "x"):
        cfg = LoopConfig(
            field_axis=axis, n_steps=50, steady_tol=1e-9, max_steps_per_field=6000
        )
        res = hysteresis(cfg, grid, params, dyn)
        samples = res.descending + res.ascending
        bound_ok = all(np.linalg.norm(s.m_mean) <= 1.0 + 1e-12 for s in samples)
        axis_idx = 0 if axis == "x" else 1
        # loop closes: the state after the full cycle matches the starting
        # saturated state at +50 mT
        closure = abs(res.ascending[-1].m_mean[axis_idx] - res.descending[0].m_mean[axis_idx])
        c_desc = res.coercivity_mT["descending"]
        c_asc = res.coercivity_mT["ascending"]
        finite_ok = np.isfinite(c_desc) and np.isfinite(c_asc) and c_desc > 0 and c_asc > 0
        coercivities[axis] = 0.5 * (c_desc + c_asc)
        ok = ok and bound_ok and finite_ok and closure <= 0.05
        detail.append(
            f"{axis}-loop: coercivity desc/asc {c_desc:.3f}/{c_asc:.3f} mT, "
            f"closure {closure:.4f}, |<m>|<=1 {bound_ok}"
        )
    ordering_ok = coercivities["y"] > coercivities["x"]
    ok = ok and ordering_ok
    _gate(11, "swept-field loop properties, desk scale",
          ok, "; ".join(detail) + f"; y > x coercivity: {ordering_ok}", t0)
