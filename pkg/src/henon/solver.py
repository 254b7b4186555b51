"""Ground states by Nehari-projected Sobolev-gradient descent, and the weighted eigenpair.

Iterates are nonnegative piecewise-linear functions on the grid nodes that
vanish at ``r_max``.  One step is

    g   = H^1-Riesz representative of Phi'(u)
    u  <- t(v) v,  v = |u - s g|,  t(v) the Nehari scaling

with ``s`` halved from 1 until the Armijo condition holds.  Because ``u``
sits on the manifold, ``Phi(u) = max_t Phi(t u)`` and the decrease test is a
decrease of the fibering maximum.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from .energy import (FiberingDegenerate, ProblemParams, _terms, _scale_from_terms, energy,
                     gradient_action)
from .grid import RadialGrid
from .space import (RadialFunction, cutoff_bubble, d12_seminorm_sq, from_nodal, h1_operator,
                    interpolate, l2_norm_sq, weighted_lp)
from .special import DomainError, ps_threshold_double, ps_threshold_single, upper_exponent

log = logging.getLogger(__name__)

CONVERGED = "converged"
STALLED = "stalled"
VANISHING = "vanishing-escape"
DEGENERATE = "degenerate-fibering"


@dataclass
class SolverOptions:
    step: float = 1.0
    max_iter: int = 500
    tol: float = 1e-7
    armijo: float = 1e-4
    backtrack: float = 0.5
    min_step: float = 1e-12
    vanish_tol: float = 1e-8
    # trailing window used to call a non-converged run an escape
    escape_window: int = 20
    seed_profile: Optional[RadialFunction] = None

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in ("step", "max_iter", "tol", "armijo", "backtrack",
                                              "min_step", "vanish_tol", "escape_window")}


@dataclass
class GroundStateResult:
    u: RadialFunction
    m: float
    iterations: int
    grad_norm: float
    threshold: float
    below_threshold: bool
    positive: bool
    status: str
    pohozaev_residual: Optional[float] = None
    nehari_residual: float = 0.0
    mass_fraction: float = 1.0
    energies: List[float] = field(default_factory=list)
    grad_norms: List[float] = field(default_factory=list)
    masses: List[float] = field(default_factory=list)
    # accurately evaluated Phi(u_{k+1}) - Phi(u_k) of every accepted step
    decrements: List[float] = field(default_factory=list)

    @property
    def margin(self) -> float:
        return self.threshold - self.m

    def to_dict(self) -> dict:
        return {
            "status": self.status,
            "m": self.m,
            "iterations": self.iterations,
            "grad_norm": self.grad_norm,
            "threshold": self.threshold,
            "below_threshold": self.below_threshold,
            "margin": self.margin,
            "positive": self.positive,
            "pohozaev_residual": self.pohozaev_residual,
            "nehari_residual": self.nehari_residual,
            "mass_fraction": self.mass_fraction,
            "u0": float(self.u.nodal()[0]),
        }


@dataclass
class EigenResult:
    lambda1: float
    phi1: RadialFunction
    residual: float
    iterations: int = 0

    def to_dict(self) -> dict:
        return {"lambda1": self.lambda1, "residual": self.residual, "iterations": self.iterations}


def energy_threshold(params: ProblemParams) -> float:
    """Compactness level relevant to ``params`` (``inf`` without a critical term)."""
    if not params.critical:
        return math.inf
    if params.alpha2 is not None and params.mu_value > 0:
        return ps_threshold_double(params.N, params.alpha1, params.alpha2)
    return ps_threshold_single(params.N, params.alpha1)


def _seed(params: ProblemParams, grid: RadialGrid, opts: SolverOptions) -> RadialFunction:
    u0 = opts.seed_profile
    if u0 is None:
        u0 = cutoff_bubble(grid, params.N, params.alpha1, 1.0, grid.r_max / 4)
    if u0.grid is not grid:
        raise DomainError("seed profile lives on a different grid")
    return from_nodal(grid, np.abs(interpolate(u0).coefficients))


def _project(coef: np.ndarray, params: ProblemParams, grid: RadialGrid):
    v = from_nodal(grid, coef)
    t = _terms(v, params)
    s = _scale_from_terms(t, params)
    return from_nodal(grid, s * coef), t.phi(s)


def _power_difference(u: np.ndarray, v: np.ndarray, q: float) -> np.ndarray:
    """``|v|^q - |u|^q`` without cancellation when ``v`` is close to ``u``."""
    au, av = np.abs(u), np.abs(v)
    close = np.abs(av - au) < 0.5 * au
    out = av ** q - au ** q
    ub = au[close]
    out[close] = ub ** q * np.expm1(q * np.log1p((av[close] - ub) / ub))
    return out


def energy_difference(u: RadialFunction, v: RadialFunction, params: ProblemParams) -> float:
    """``Phi(v) - Phi(u)`` evaluated term by term on pointwise differences.

    Subtracting two energies loses everything below ``eps * |Phi|``; near
    convergence the decrease per step is far smaller than that.
    """
    grid, N = u.grid, params.N
    du = v.values - u.values
    dd = v.derivative_values - u.derivative_values
    w0 = grid.radial_weight(N, 0.0)
    out = 0.5 * float(w0 @ (dd * (v.derivative_values + u.derivative_values)
                            + du * (v.values + u.values)))
    if params.critical:
        out -= float(grid.radial_weight(N, params.alpha1)
                     @ _power_difference(u.values, v.values, params.q1)) / params.q1
    if params.alpha2 is not None and params.mu_value != 0:
        out -= params.mu_value * float(grid.radial_weight(N, params.alpha2)
                                       @ _power_difference(u.values, v.values, params.q2)) / params.q2
    if params.lam != 0:
        out -= params.lam * float(grid.radial_weight(N, params.beta)
                                  @ _power_difference(u.values, v.values, params.p)) / params.p
    return out


def ground_state(params: ProblemParams, grid: RadialGrid,
                 opts: Optional[SolverOptions] = None) -> GroundStateResult:
    """Minimise the energy over the Nehari manifold.

    Raises
    ------
    FiberingDegenerate
        When some iterate has no Nehari scaling, or for ``p = 2`` when
        ``lam >= lambda_1beta`` on this grid.
    """
    opts = opts or SolverOptions()
    N = params.N
    if params.needs_eigen_bound and params.lam > 0:
        lam1 = first_eigenpair(N, params.beta, grid).lambda1
        if params.lam >= lam1:
            raise FiberingDegenerate(
                f"p = 2 requires lambda < lambda_1beta = {lam1:.10g}; got lambda = {params.lam!r}")

    op = h1_operator(grid, N)
    u, phi = _project(_seed(params, grid, opts).coefficients, params, grid)
    mass0 = l2_norm_sq(u, N)
    energies, gnorms, masses, decrements = [phi], [], [mass0], []
    status = None
    gnorm = math.inf
    k = 0
    for k in range(opts.max_iter + 1):
        F = gradient_action(u, params)
        g = op.solve(F)
        gnorm = math.sqrt(max(float(g @ F), 0.0))
        gnorms.append(gnorm)
        if gnorm <= opts.tol:
            status = CONVERGED
            break
        if k == opts.max_iter:
            break
        s = opts.step
        accepted = False
        while s >= opts.min_step:
            cand = np.abs(u.coefficients - s * g)
            try:
                v, phi_new = _project(cand, params, grid)
            except FiberingDegenerate:
                s *= opts.backtrack
                continue
            delta = energy_difference(u, v, params)
            if delta <= -opts.armijo * s * gnorm ** 2:
                accepted = True
                break
            s *= opts.backtrack
        if not accepted:
            status = STALLED
            break
        assert delta <= 0, "energy increased on an accepted step"
        u, phi = v, phi_new
        energies.append(phi)
        decrements.append(delta)
        masses.append(l2_norm_sq(u, N))
        if masses[-1] < opts.vanish_tol * mass0:
            status = VANISHING
            break

    threshold = energy_threshold(params)
    if status != CONVERGED and _escaping(masses, phi, threshold, opts):
        status = VANISHING
    elif status is None:
        status = STALLED
    log.info("ground_state: %s after %d iterations, m=%.12g, |g|=%.3e", status, k, phi, gnorm)

    br = energy(u, params)
    return GroundStateResult(
        u=u, m=br.phi, iterations=k, grad_norm=gnorm, threshold=threshold,
        below_threshold=bool(br.phi < threshold), positive=bool(u.coefficients.min() > -1e-14),
        status=status,
        pohozaev_residual=pohozaev_residual(u, N, params.alpha1) if params.critical else None,
        nehari_residual=br.nehari_residual, mass_fraction=masses[-1] / mass0,
        energies=energies, grad_norms=gnorms, masses=masses, decrements=decrements)


def _escaping(masses, phi, threshold, opts) -> bool:
    """Energy stuck at or above the compactness level while the L^2 mass keeps draining."""
    if masses[-1] < opts.vanish_tol * masses[0]:
        return True
    w = opts.escape_window
    if len(masses) <= w or not phi >= threshold:
        return False
    tail = np.asarray(masses[-w - 1:])
    return bool(np.all(np.diff(tail) < 0))


def pohozaev_residual(u: RadialFunction, N: int, alpha: float) -> float:
    """``int |grad u|^2 + N/(N-2) int u^2 - int |x|^alpha |u|^{2*(alpha)}``."""
    return (d12_seminorm_sq(u, N) + N / (N - 2) * l2_norm_sq(u, N)
            - weighted_lp(u, N, alpha, upper_exponent(N, alpha)))


def euler_lagrange_residual(u: RadialFunction, params: ProblemParams) -> float:
    """H^{-1} norm of ``Phi'(u)`` over functions vanishing at ``r_max``."""
    F = gradient_action(u, params)
    g = h1_operator(u.grid, params.N).solve(F)
    return math.sqrt(max(float(g @ F), 0.0))


# ---------------------------------------------------------------- eigenpair

def _eigen_matrices(N: int, beta: float, grid: RadialGrid):
    op = h1_operator(grid, N)
    A = op.matrix[:-1, :-1].tocsc()
    w = sp.diags(grid.radial_weight(N, beta))
    Mb = (grid.basis.T @ w @ grid.basis).tocsc()[:-1, :-1]
    return op, A, Mb.tocsc()


def first_eigenpair(N: int, beta: float, grid: RadialGrid, tol: float = 1e-10,
                    max_iter: int = 500) -> EigenResult:
    """Smallest ``lam`` with ``<u, v>_{H^1} = lam int |x|^beta u v`` for all ``v``.

    Shift-free inverse iteration, finished by Rayleigh-quotient iteration.
    """
    if not -2 < beta < 0:
        raise DomainError(f"the weighted eigenvalue is defined for -2 < beta < 0, got {beta!r}")
    op, A, Mb = _eigen_matrices(N, beta, grid)
    solve = op._lu.solve
    x = np.ones(A.shape[0])
    x /= math.sqrt(x @ (Mb @ x))
    lam = float(x @ (A @ x))
    it = 0
    for it in range(1, max_iter + 1):
        y = solve(Mb @ x)
        y /= math.sqrt(y @ (Mb @ y))
        new = float(y @ (A @ y))
        x = y
        done = abs(new - lam) <= 1e-9 * abs(new)
        lam = new
        if done:
            break
    for _ in range(3):
        try:
            lu = splu((A - lam * Mb).tocsc())
        except RuntimeError:
            break
        y = lu.solve(Mb @ x)
        if not np.all(np.isfinite(y)):
            break
        y /= math.sqrt(y @ (Mb @ y))
        x = y
        lam = float(x @ (A @ x))
        if _dual_residual(solve, A, Mb, x, lam) <= 0.01 * tol:
            break
    if x.sum() < 0:
        x = -x
    res = _dual_residual(solve, A, Mb, x, lam)
    coef = np.append(x, 0.0)
    return EigenResult(lambda1=lam, phi1=from_nodal(grid, coef), residual=res, iterations=it)


def _dual_residual(solve, A, Mb, x, lam):
    r = A @ x - lam * (Mb @ x)
    return math.sqrt(max(float(r @ solve(r)), 0.0))


def first_eigenvalue_dense(N: int, beta: float, grid: RadialGrid) -> float:
    """Smallest generalized eigenvalue by a dense symmetric solve (small grids only)."""
    _, A, Mb = _eigen_matrices(N, beta, grid)
    vals = sla.eigh(A.toarray(), Mb.toarray(), eigvals_only=True, subset_by_index=[0, 0])
    return float(vals[0])
