"""Truncated radial meshes with per-cell Gauss–Legendre quadrature.

A radial integral over R^N is reduced to

    int_{R^N} |x|^gamma g(|x|) dx = omega_N int_0^{r_max} r^{N-1+gamma} g(r) dr

and the right-hand side is evaluated cell by cell.
"""
from __future__ import annotations

from functools import cached_property
from typing import Callable, Union

import numpy as np
import scipy.sparse as sp

from .special import DomainError, sphere_area


class GridError(ValueError):
    pass


class EvaluationError(ValueError):
    pass


class RadialGrid:
    """Mesh ``0 = r_0 < r_1 < ... < r_n = r_max`` with a Gauss rule on each cell.

    Instances are immutable; quadrature data and the piecewise-linear
    basis matrices are built lazily and cached.
    """

    def __init__(self, nodes, cell_rule: int = 8, grading: float = 1.0):
        nodes = np.asarray(nodes, dtype=float)
        if nodes.ndim != 1 or nodes.size < 2:
            raise GridError("need at least two nodes")
        if nodes[0] != 0.0:
            raise GridError(f"first node must be 0, got {nodes[0]}")
        if np.any(np.diff(nodes) <= 0):
            raise GridError("nodes must be strictly increasing")
        if int(cell_rule) != cell_rule or cell_rule < 2:
            raise GridError(f"cell_rule must be an integer >= 2, got {cell_rule!r}")
        nodes.setflags(write=False)
        self.nodes = nodes
        self.cell_rule = int(cell_rule)
        self.grading = float(grading)
        self._cache = {}

    def __repr__(self):
        return (f"RadialGrid(r_max={self.r_max:g}, n_cells={self.n_cells}, "
                f"grading={self.grading:g}, cell_rule={self.cell_rule})")

    @property
    def r_max(self) -> float:
        return float(self.nodes[-1])

    @property
    def n_cells(self) -> int:
        return self.nodes.size - 1

    def describe(self) -> dict:
        return {"r_max": self.r_max, "n_cells": self.n_cells,
                "grading": self.grading, "cell_rule": self.cell_rule}

    @cached_property
    def _reference(self):
        return np.polynomial.legendre.leggauss(self.cell_rule)

    @cached_property
    def _local(self):
        # reference coordinate in [0, 1] of every quadrature point
        x, _ = self._reference
        s = 0.5 * (x + 1.0)
        return np.tile(s, self.n_cells)

    @cached_property
    def cell_index(self) -> np.ndarray:
        return np.repeat(np.arange(self.n_cells), self.cell_rule)

    @cached_property
    def points(self) -> np.ndarray:
        h = np.diff(self.nodes)
        x, _ = self._reference
        pts = (self.nodes[:-1, None] + 0.5 * h[:, None] * (x[None, :] + 1.0)).ravel()
        pts.setflags(write=False)
        return pts

    @cached_property
    def weights(self) -> np.ndarray:
        h = np.diff(self.nodes)
        _, w = self._reference
        wts = (0.5 * h[:, None] * w[None, :]).ravel()
        wts.setflags(write=False)
        return wts

    def radial_weight(self, N: int, gamma: float) -> np.ndarray:
        """Quadrature weights times ``omega_N r^{N-1+gamma}`` at every point."""
        key = ("w", N, float(gamma))
        w = self._cache.get(key)
        if w is None:
            expo = N - 1 + gamma
            if not expo > -1:
                raise DomainError(f"r^{expo:g} is not integrable at the origin")
            w = sphere_area(N) * self.weights * self.points ** expo
            w.setflags(write=False)
            self._cache[key] = w
        return w

    # piecewise-linear hat functions on the nodes
    @cached_property
    def basis(self) -> sp.csr_matrix:
        """Sparse (n_points x n_nodes) matrix of hat-function values."""
        nq = self.points.size
        rows = np.arange(nq)
        c = self.cell_index
        s = self._local
        data = np.concatenate([1.0 - s, s])
        m = sp.csr_matrix((data, (np.concatenate([rows, rows]), np.concatenate([c, c + 1]))),
                          shape=(nq, self.nodes.size))
        return m

    @cached_property
    def dbasis(self) -> sp.csr_matrix:
        """Sparse (n_points x n_nodes) matrix of hat-function derivatives."""
        nq = self.points.size
        rows = np.arange(nq)
        c = self.cell_index
        inv_h = 1.0 / np.diff(self.nodes)[c]
        data = np.concatenate([-inv_h, inv_h])
        return sp.csr_matrix((data, (np.concatenate([rows, rows]), np.concatenate([c, c + 1]))),
                             shape=(nq, self.nodes.size))


def build_grid(r_max: float, n_cells: int, grading: float = 1.0, cell_rule: int = 8) -> RadialGrid:
    """Power-graded mesh ``r_i = r_max (i/n_cells)^grading``."""
    if not (np.isfinite(r_max) and r_max > 0):
        raise GridError(f"r_max must be positive, got {r_max!r}")
    if int(n_cells) != n_cells or n_cells < 16:
        raise GridError(f"n_cells must be an integer >= 16, got {n_cells!r}")
    if not grading >= 1:
        raise GridError(f"grading must be >= 1, got {grading!r}")
    i = np.arange(int(n_cells) + 1)
    nodes = r_max * (i / n_cells) ** grading
    nodes[-1] = r_max
    return RadialGrid(nodes, cell_rule=cell_rule, grading=grading)


def default_grading(gamma: float) -> float:
    return 2.0 if gamma < 0 else 1.0


Profile = Union[np.ndarray, Callable[[np.ndarray], np.ndarray]]


def sample(grid: RadialGrid, g: Profile) -> np.ndarray:
    if callable(g):
        vals = np.asarray(g(grid.points), dtype=float)
        vals = np.broadcast_to(vals, grid.points.shape)
    else:
        vals = np.asarray(g, dtype=float)
        if vals.shape != grid.points.shape:
            raise EvaluationError(
                f"sampled profile has shape {vals.shape}, grid has {grid.points.shape} points")
    bad = ~np.isfinite(vals)
    if bad.any():
        k = int(np.argmax(bad))
        raise EvaluationError(f"profile not finite at quadrature point r={grid.points[k]!r}")
    return vals


def weighted_integral(grid: RadialGrid, N: int, gamma: float, g: Profile) -> float:
    """``int_{|x| < r_max} |x|^gamma g(|x|) dx``."""
    if not gamma > -2:
        raise DomainError(f"weight exponent gamma must be > -2, got {gamma!r}")
    return float(grid.radial_weight(N, gamma) @ sample(grid, g))
