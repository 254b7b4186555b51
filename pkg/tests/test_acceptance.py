"""Acceptance suite: one test (or group) per criterion, each reporting a pass/fail line."""
import math
import time

import numpy as np
import pytest

from henon.energy import (FiberingDegenerate, ProblemParams, derivative_action, energy,
                          nehari_project, nehari_scale)
from henon.experiments import (bubble_asymptotics, bubble_rayleigh, inequality_audit,
                               noncompactness_report, standard_corpus, threshold_escape_demo)
from henon.grid import build_grid
from henon.solver import (CONVERGED, VANISHING, euler_lagrange_residual, first_eigenpair,
                          first_eigenvalue_dense, ground_state)
from henon.space import from_nodal
from henon.special import (best_constant, interpolation_constant, m_tilde, ps_threshold_single,
                           talenti_constant, upper_exponent)

from oracles import cubic_ground_state, dense_weighted_eigenvalue, m_tilde_scan

THRESHOLD_PARAMS = ProblemParams(N=3, alpha1=1.0, beta=0.0, p=4.0, lam=5.0)


@pytest.fixture(scope="module")
def threshold_grid():
    return build_grid(40.0, 4000, grading=2.0)


@pytest.fixture(scope="module")
def threshold_run(threshold_grid):
    t0 = time.perf_counter()
    res = ground_state(THRESHOLD_PARAMS, threshold_grid)
    return res, time.perf_counter() - t0


# ---------------------------------------------------------------- 1

@pytest.mark.acceptance(1)
def test_c1_closed_form_constants(criterion):
    best_constant(3, 0.0)  # warm the import path
    t0 = time.perf_counter()
    errs = [abs(best_constant(N, 0.0) / talenti_constant(N) - 1) for N in range(3, 9)]
    dt = time.perf_counter() - t0
    ok = max(errs) <= 1e-12 and dt < 1e-3
    criterion(1, ok, f"max rel err {max(errs):.1e} (<= 1e-12), {dt * 1e3:.3f} ms (< 1 ms)")
    assert ok


# ---------------------------------------------------------------- 2

@pytest.mark.acceptance(2)
@pytest.mark.parametrize("N, gamma", [(3, 1.0), (4, 2.0), (5, -1.0)])
def test_c2_noncompactness_closed_forms(criterion, N, gamma):
    t0 = time.perf_counter()
    rep = noncompactness_report(N, gamma, [1, 4, 16, 64, 256])
    dt = time.perf_counter() - t0
    err = max(max(r["grad_sq_relerr"], r["crit_moment_relerr"]) for r in rep["rows"])
    ok = err <= 1e-8 and rep["q_slope_error"] <= 1e-3 and dt < 5
    criterion(2, ok, f"({N},{gamma:g}) rel err {err:.1e}, slope err {rep['q_slope_error']:.1e}, {dt:.2f} s")
    assert ok


# ---------------------------------------------------------------- 3

@pytest.mark.acceptance(3)
@pytest.mark.parametrize("N, alpha", [(3, 1.0), (4, 0.5), (5, 2.0)])
def test_c3_bubble_extremality(criterion, N, alpha):
    t0 = time.perf_counter()
    rep = bubble_rayleigh(N, alpha)
    dt = time.perf_counter() - t0
    # both certified truncation bounds must sit within 0.5% of the constant
    ok = rep["max_relative_gap"] <= 5e-3 and dt < 10
    criterion(3, ok, f"({N},{alpha:g}) certified gap {rep['max_relative_gap']:.1e} (<= 5e-3), {dt:.2f} s")
    assert ok


# ---------------------------------------------------------------- 4

ONE_DECADE = tuple(np.geomspace(0.1, 0.01, 7))


@pytest.mark.acceptance(4)
@pytest.mark.parametrize("cfg", [
    dict(N=3, alpha=1.0, beta=0.0, p=5.0, alpha2=-1.0),
    dict(N=4, alpha=1.0, beta=2.0, p=3.0, alpha2=0.0),
    dict(N=5, alpha=2.0, beta=-1.0, p=2.5, alpha2=1.0),
])
def test_c4_asymptotic_orders(criterion, cfg):
    t0 = time.perf_counter()
    fits = bubble_asymptotics(eps_list=ONE_DECADE, **cfg)
    dt = time.perf_counter() - t0
    bad = [f.quantity for f in fits if f.slope_error > (0.1 if f.log_corrected else 0.05)]
    worst = max(fits, key=lambda f: f.slope_error)
    ok = not bad and dt < 60
    criterion(4, ok, f"N={cfg['N']} worst {worst.quantity} err {worst.slope_error:.3f}, {dt:.2f} s")
    assert ok, bad


# ---------------------------------------------------------------- 5

@pytest.mark.acceptance(5)
def test_c5_subcritical_oracle(criterion):
    t0 = time.perf_counter()
    u0, r_valid, profile, e_ref = cubic_ground_state()
    grid = build_grid(30.0, 3000, grading=2.0)
    P = ProblemParams(N=3, alpha1=1.0, beta=0.0, p=4.0, lam=1.0, critical=False)
    res = ground_state(P, grid)
    dt = time.perf_counter() - t0
    c = res.u.nodal()
    inside = grid.nodes <= r_valid
    sup = float(np.max(np.abs(c[inside] - profile(grid.nodes[inside]))))
    # past the oracle's valid range the solution must already be below the tolerance
    tail = float(np.max(np.abs(c[~inside]))) if np.any(~inside) else 0.0
    rel = abs(res.m / e_ref - 1)
    ok = res.status == CONVERGED and max(sup, tail) <= 1e-3 and rel <= 1e-4 and dt < 30
    criterion(5, ok, f"sup err {sup:.1e} (tail {tail:.1e}), energy rel err {rel:.1e}, {dt:.1f} s")
    assert ok


# ---------------------------------------------------------------- 6

@pytest.mark.acceptance(6)
def test_c6_threshold_ground_state(criterion, threshold_run):
    res, dt = threshold_run
    e = energy(res.u, THRESHOLD_PARAMS)
    el = euler_lagrange_residual(res.u, THRESHOLD_PARAMS)
    thr = ps_threshold_single(3, 1.0)
    ok = (res.status == CONVERGED and abs(e.nehari_residual) <= 1e-8 * e.a and el <= 1e-6
          and res.m > 0 and res.m < thr and res.threshold == thr)
    criterion(6, ok, f"m={res.m:.6f} < {thr:.6f} (margin {thr - res.m:.3f}), "
                     f"Psi {abs(e.nehari_residual) / e.a:.1e}*A, EL {el:.1e}, {dt:.1f} s")
    assert ok


@pytest.mark.acceptance(6)
def test_c6_vanishing_escape(criterion, threshold_grid):
    res = ground_state(THRESHOLD_PARAMS.with_(lam=0.0), threshold_grid)
    rows = threshold_escape_demo(3, 1.0)
    gaps = np.array([r["gap"] for r in rows])
    eps = np.array([r["eps"] for r in rows])
    decreasing = bool(np.all(np.diff(gaps) < 0))
    slope = float(np.polyfit(np.log(eps), np.log(gaps), 1)[0])
    ok = res.status == VANISHING and len(rows) >= 5 and np.all(gaps > 0) and decreasing and slope > 0
    criterion(6, ok, f"lambda=0 status {res.status}; fibering_max - threshold "
                     f"{gaps[0]:.3f} -> {gaps[-1]:.3f} over {len(rows)} eps, ~eps^{slope:.2f}")
    assert ok


# ---------------------------------------------------------------- 7

@pytest.mark.acceptance(7)
def test_c7_eigenvalue(criterion):
    grid = build_grid(30.0, 800, grading=2.0)
    eig = first_eigenpair(3, -1.0, grid)
    dense = first_eigenvalue_dense(3, -1.0, grid)
    dense_ref = dense_weighted_eigenvalue(3, -1.0, grid.nodes)
    agree = max(abs(eig.lambda1 / dense - 1), abs(eig.lambda1 / dense_ref - 1))
    fine = first_eigenpair(3, -1.0, build_grid(30.0, 1600, grading=2.0))
    stable = abs(fine.lambda1 / eig.lambda1 - 1)
    ok = agree <= 1e-8 and stable <= 1e-3
    criterion(7, ok, f"lambda1={eig.lambda1:.8f}, dense vs inverse {agree:.1e}, mesh change {stable:.1e}")
    assert ok


@pytest.mark.acceptance(7)
def test_c7_degeneracy_witness(criterion):
    grid = build_grid(30.0, 800, grading=2.0)
    eig = first_eigenpair(3, -1.0, grid)
    phi = eig.phi1
    worst = -math.inf
    raised = True
    for factor in (1.0 + 1e-9, 1.01, 1.5):
        P = ProblemParams(N=3, alpha1=1.0, beta=-1.0, p=2.0, lam=factor * eig.lambda1)
        e = energy(phi, P)
        worst = max(worst, (e.a - P.lam * e.d) / e.a)
        try:
            nehari_scale(phi, P)
            raised = False
        except FiberingDegenerate:
            pass
        try:
            ground_state(P, grid)
            raised = False
        except FiberingDegenerate:
            pass
    ok = worst <= 0 and raised
    criterion(7, ok, f"max (A - lam D)/A at phi1 for lam >= lambda1: {worst:.1e}; degenerate error raised: {raised}")
    assert ok


# ---------------------------------------------------------------- 8

@pytest.mark.acceptance(8)
@pytest.mark.parametrize("N, a1, a2", [(3, 2.0, 1.0), (4, 1.0, 0.0), (5, 0.5, -1.0)])
def test_c8_m_tilde(criterion, N, a1, a2):
    t = m_tilde(N, a1, a2)
    q1, q2 = upper_exponent(N, a1), upper_exponent(N, a2)
    target = best_constant(N, a2) ** (q2 / 2)
    res = abs(interpolation_constant(N, a1, a2) * t ** ((q1 - 2) / 2) + t ** ((q2 - 2) / 2) - target) / target
    scan = m_tilde_scan(N, a1, a2)
    diff = abs(t / scan - 1)
    ok = res <= 1e-12 and diff <= 1e-10
    criterion(8, ok, f"({N},{a1:g},{a2:g}) residual {res:.1e}, scan diff {diff:.1e}")
    assert ok


# ---------------------------------------------------------------- 9

def _direction(grid, seed):
    rng = np.random.default_rng(seed)
    x = grid.nodes / grid.r_max
    c = sum(rng.normal() * np.sin((k + 0.5) * math.pi * (1 - x)) / (k + 1) for k in range(6))
    c = c * np.exp(-grid.nodes / 2)
    c[-1] = 0.0
    return from_nodal(grid, c)


@pytest.mark.acceptance(9)
def test_c9_gradient_finite_differences(criterion):
    grid = build_grid(20.0, 1000, grading=2.0)
    u = _direction(grid, 0)
    h = 1e-5
    worst = 0.0
    for seed in range(1, 21):
        v = _direction(grid, seed)
        exact = derivative_action(u, v, THRESHOLD_PARAMS)
        fd = (energy(u + h * v, THRESHOLD_PARAMS).phi - energy(u - h * v, THRESHOLD_PARAMS).phi) / (2 * h)
        worst = max(worst, abs(fd - exact) / abs(exact))
    ok = worst <= 1e-6
    criterion(9, ok, f"gradient vs central differences, 20 directions: {worst:.1e}")
    assert ok


@pytest.mark.acceptance(9)
def test_c9_projection_idempotent(criterion):
    grid = build_grid(20.0, 1000, grading=2.0)
    worst = 0.0
    for seed in range(10):
        w = nehari_project(_direction(grid, seed), THRESHOLD_PARAMS)
        w2 = nehari_project(w, THRESHOLD_PARAMS)
        worst = max(worst, float(np.max(np.abs(w2.nodal() - w.nodal())) / np.max(np.abs(w.nodal()))))
    ok = worst <= 1e-10
    criterion(9, ok, f"projection idempotence {worst:.1e}")
    assert ok


@pytest.mark.acceptance(9)
def test_c9_monotone_descent(criterion, threshold_run):
    res, _ = threshold_run
    d = np.array(res.decrements)
    ok = d.size == res.iterations and bool(np.all(d <= 0))
    criterion(9, ok, f"{d.size} accepted steps, max decrement {d.max():.1e}")
    assert ok


@pytest.mark.acceptance(9)
def test_c9_inequality_audit(criterion):
    corpus = standard_corpus(3, 1.0, seed=0)
    rep = inequality_audit(corpus, ProblemParams(N=3, alpha1=1.0, alpha2=-0.5, mu=1.0))
    slack = min(rep.min_slack.values())
    ok = not rep.violations
    criterion(9, ok, f"audit: {len(rep.violations)} violations over {len(corpus)} members, min slack {slack:.3f}")
    assert ok
