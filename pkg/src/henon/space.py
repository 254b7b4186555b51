"""Discrete radial functions, norms and the explicit test families.

A :class:`RadialFunction` stores a profile and its radial derivative at the
quadrature points of a :class:`~henon.grid.RadialGrid`.  Analytic families
(bubbles, cut-off bubbles, Gaussians) are sampled exactly; solver iterates
are continuous piecewise-linear functions on the grid nodes, vanishing at
``r_max``.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from .grid import EvaluationError, RadialGrid, sample
from .special import DomainError, bubble_coefficient, upper_exponent


class GridMismatch(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class RadialFunction:
    """Radial profile sampled on a grid.

    Parameters
    ----------
    grid : RadialGrid
    values, derivative_values : ndarray
        ``u(r)`` and ``u'(r)`` at ``grid.points``.
    node_values : ndarray, optional
        ``u`` at ``grid.nodes`` (used for export).
    coefficients : ndarray, optional
        Set when the function is piecewise linear: nodal coefficients.
    """

    grid: RadialGrid
    values: np.ndarray
    derivative_values: np.ndarray
    node_values: Optional[np.ndarray] = None
    coefficients: Optional[np.ndarray] = None

    def __post_init__(self):
        for name in ("values", "derivative_values"):
            arr = np.asarray(getattr(self, name), dtype=float)
            if arr.shape != self.grid.points.shape:
                raise EvaluationError(f"{name} has shape {arr.shape}, expected {self.grid.points.shape}")
            if not np.all(np.isfinite(arr)):
                k = int(np.argmax(~np.isfinite(arr)))
                raise EvaluationError(f"{name} not finite at r={self.grid.points[k]!r}")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    def __mul__(self, c: float) -> "RadialFunction":
        c = float(c)
        return RadialFunction(
            self.grid, c * self.values, c * self.derivative_values,
            None if self.node_values is None else c * self.node_values,
            None if self.coefficients is None else c * self.coefficients)

    __rmul__ = __mul__

    def __add__(self, other: "RadialFunction") -> "RadialFunction":
        _same_grid(self, other)
        nv = None
        if self.node_values is not None and other.node_values is not None:
            nv = self.node_values + other.node_values
        co = None
        if self.coefficients is not None and other.coefficients is not None:
            co = self.coefficients + other.coefficients
        return RadialFunction(self.grid, self.values + other.values,
                              self.derivative_values + other.derivative_values, nv, co)

    def __sub__(self, other: "RadialFunction") -> "RadialFunction":
        return self + (-1.0) * other

    def abs(self) -> "RadialFunction":
        s = np.sign(self.values)
        return RadialFunction(
            self.grid, np.abs(self.values), s * self.derivative_values,
            None if self.node_values is None else np.abs(self.node_values),
            None if self.coefficients is None else np.abs(self.coefficients))

    def nodal(self) -> np.ndarray:
        if self.coefficients is not None:
            return self.coefficients
        if self.node_values is not None:
            return self.node_values
        raise EvaluationError("no nodal representation available")


def _same_grid(u: RadialFunction, v: RadialFunction) -> None:
    if u.grid is not v.grid:
        raise GridMismatch("functions live on different grids")


# ---------------------------------------------------------------- norms

def d12_seminorm_sq(u: RadialFunction, N: int) -> float:
    return float(u.grid.radial_weight(N, 0.0) @ u.derivative_values ** 2)


def l2_norm_sq(u: RadialFunction, N: int) -> float:
    return float(u.grid.radial_weight(N, 0.0) @ u.values ** 2)


def h1_norm_sq(u: RadialFunction, N: int) -> float:
    w = u.grid.radial_weight(N, 0.0)
    return float(w @ (u.derivative_values ** 2 + u.values ** 2))


def h1_inner(u: RadialFunction, v: RadialFunction, N: int) -> float:
    _same_grid(u, v)
    w = u.grid.radial_weight(N, 0.0)
    return float(w @ (u.derivative_values * v.derivative_values + u.values * v.values))


def weighted_lp(u: RadialFunction, N: int, gamma: float, q: float) -> float:
    """``int |x|^gamma |u|^q dx``."""
    if not gamma > -2:
        raise DomainError(f"weight exponent gamma must be > -2, got {gamma!r}")
    if not q >= 1:
        raise DomainError(f"power q must be >= 1, got {q!r}")
    return float(u.grid.radial_weight(N, gamma) @ np.abs(u.values) ** q)


# ---------------------------------------------------------------- constructors

def from_callable(grid: RadialGrid, f: Callable, df: Callable) -> RadialFunction:
    """Sample an analytic profile ``f`` with derivative ``df``."""
    return RadialFunction(grid, sample(grid, f), sample(grid, df),
                          node_values=np.asarray(f(grid.nodes), dtype=float))


def from_nodal(grid: RadialGrid, coefficients) -> RadialFunction:
    """Continuous piecewise-linear function with the given nodal values."""
    c = np.asarray(coefficients, dtype=float)
    if c.shape != grid.nodes.shape:
        raise EvaluationError(f"expected {grid.nodes.size} nodal values, got {c.shape}")
    c = c.copy()
    c.setflags(write=False)
    # difference first: -c_i/h + c_{i+1}/h cancels badly on tiny cells
    slope = (np.diff(c) / np.diff(grid.nodes))[grid.cell_index]
    return RadialFunction(grid, grid.basis @ c, slope, node_values=c, coefficients=c)


def interpolate(u: RadialFunction, zero_at_rmax: bool = True) -> RadialFunction:
    """Piecewise-linear nodal interpolant of ``u``."""
    c = np.array(u.nodal(), dtype=float)
    if zero_at_rmax:
        c[-1] = 0.0
    return from_nodal(u.grid, c)


def _bubble_funcs(N, alpha, eps):
    C = bubble_coefficient(N, alpha)
    k = N - 2
    a = 2 + alpha
    pref = C * eps ** (k / 2)
    ea = eps ** a

    def U(r):
        return pref * (ea + r ** a) ** (-k / a)

    def dU(r):
        return -k * pref * r ** (1 + alpha) * (ea + r ** a) ** (-k / a - 1)

    return U, dU


def bubble(grid: RadialGrid, N: int, alpha: float, eps: float) -> RadialFunction:
    """Extremal ``U_{eps,alpha}(r) = C eps^{(N-2)/2} / (eps^{2+alpha} + r^{2+alpha})^{(N-2)/(2+alpha)}``."""
    if not eps > 0:
        raise DomainError(f"eps must be positive, got {eps!r}")
    U, dU = _bubble_funcs(N, alpha, eps)
    return from_callable(grid, U, dU)


def cutoff(r, R):
    """Smooth transition: 1 on [0, R], 0 on [2R, inf)."""
    r = np.asarray(r, dtype=float)
    a = _q((2 * R - r) / R)
    b = _q((r - R) / R)
    return a / (a + b)


def cutoff_derivative(r, R):
    r = np.asarray(r, dtype=float)
    A = (2 * R - r) / R
    B = (r - R) / R
    a, b = _q(A), _q(B)
    with np.errstate(divide="ignore", invalid="ignore"):
        da = np.where(A > 0, a / np.where(A > 0, A, 1.0) ** 2, 0.0) * (-1.0 / R)
        db = np.where(B > 0, b / np.where(B > 0, B, 1.0) ** 2, 0.0) * (1.0 / R)
    return (da * b - a * db) / (a + b) ** 2


def _q(s):
    s = np.asarray(s, dtype=float)
    with np.errstate(divide="ignore", over="ignore"):
        return np.where(s > 0, np.exp(-1.0 / np.where(s > 0, s, 1.0)), 0.0)


def cutoff_bubble(grid: RadialGrid, N: int, alpha: float, eps: float, R: float) -> RadialFunction:
    """``phi(r) U_{eps,alpha}(r)`` with ``phi`` the smooth cut-off between R and 2R."""
    if not R > 0:
        raise DomainError(f"R must be positive, got {R!r}")
    if 2 * R > grid.r_max * (1 + 1e-12):
        raise DomainError(f"cut-off support 2R={2 * R:g} exceeds r_max={grid.r_max:g}")
    if not eps > 0:
        raise DomainError(f"eps must be positive, got {eps!r}")
    U, dU = _bubble_funcs(N, alpha, eps)
    return from_callable(
        grid,
        lambda r: cutoff(r, R) * U(r),
        lambda r: cutoff_derivative(r, R) * U(r) + cutoff(r, R) * dU(r),
    )


def gaussian_seq(grid: RadialGrid, N: int, gamma: float, k: int) -> RadialFunction:
    """``u_k(r) = k^{(N-2)/4} exp(-k r^2 / (2 * 2*(gamma)))``: bounded in H^1, concentrating."""
    if not k >= 1:
        raise DomainError(f"k must be >= 1, got {k!r}")
    if not gamma >= -2:
        raise DomainError(f"gamma must be >= -2, got {gamma!r}")
    q = upper_exponent(N, gamma)
    amp = k ** ((N - 2) / 4)

    def u(r):
        return amp * np.exp(-k * r ** 2 / (2 * q))

    return from_callable(grid, u, lambda r: -(k * r / q) * u(r))


def export_csv(u: RadialFunction, path) -> None:
    """Two-column CSV ``r,u`` at the grid nodes."""
    vals = u.nodal()
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["r", "u"])
        for r, v in zip(u.grid.nodes, vals):
            w.writerow([format(r, ".17g"), format(v, ".17g")])


# ---------------------------------------------------------------- Riesz map

class H1Operator:
    """Stiffness + mass matrices of the hat basis, Dirichlet node at r_max removed.

    The LU factor is computed once and only read afterwards.
    """

    def __init__(self, grid: RadialGrid, N: int):
        w = sp.diags(grid.radial_weight(N, 0.0))
        self.stiffness = (grid.dbasis.T @ w @ grid.dbasis).tocsc()
        self.mass = (grid.basis.T @ w @ grid.basis).tocsc()
        self.matrix = (self.stiffness + self.mass).tocsc()
        self.free = np.arange(grid.nodes.size - 1)
        inner = self.matrix[:-1, :-1].tocsc()
        try:
            self._lu = splu(inner)
        except RuntimeError as exc:
            raise np.linalg.LinAlgError(f"singular H1 system on {grid!r}") from exc
        self.grid = grid
        self.N = N

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        out = np.zeros(self.grid.nodes.size)
        out[:-1] = self._lu.solve(np.asarray(rhs, dtype=float)[:-1])
        return out


def h1_operator(grid: RadialGrid, N: int) -> H1Operator:
    key = ("h1", N)
    op = grid._cache.get(key)
    if op is None:
        op = H1Operator(grid, N)
        grid._cache[key] = op
    return op


def basis_action(grid: RadialGrid, N: int, gamma: float, values: np.ndarray) -> np.ndarray:
    """Vector ``[int |x|^gamma f phi_i dx]_i`` for ``f`` sampled at the quadrature points."""
    return grid.basis.T @ (grid.radial_weight(N, gamma) * values)


def h1_action(u: RadialFunction, N: int) -> np.ndarray:
    """Vector ``[<u, phi_i>_{H^1}]_i``."""
    w = u.grid.radial_weight(N, 0.0)
    return u.grid.dbasis.T @ (w * u.derivative_values) + u.grid.basis.T @ (w * u.values)


def riesz_gradient(u: RadialFunction, residual_action, N: int) -> RadialFunction:
    """Solve ``<g, v>_{H^1} = residual_action(v)`` over hat functions vanishing at r_max.

    ``residual_action`` is the functional evaluated on each hat basis function.
    """
    rhs = np.asarray(residual_action, dtype=float)
    if rhs.shape != u.grid.nodes.shape:
        raise GridMismatch(f"residual has {rhs.shape} entries, grid has {u.grid.nodes.size} nodes")
    return from_nodal(u.grid, h1_operator(u.grid, N).solve(rhs))
