"""Finite-dimensional Koopman generator on a collocation grid.

For a field ``f`` the generator acts on observables as ``sum_i f_i d/dx_i``.
Replacing each partial derivative with the Chebyshev differentiation matrix
of its axis gives

    K = sum_i diag(f_i(nodes)) (I x ... x D_i x ... x I)

where, with the first axis varying fastest in the flat ordering, ``D_i``
sits in Kronecker slot ``d - i + 1`` counted from the left.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .chebdiff import differentiation_matrix
from .exceptions import NonFiniteValueError
from .grid import CollocationGrid, middle_index

Field = Callable[[np.ndarray], np.ndarray]
Observable = Callable[[np.ndarray], float]


@dataclass(frozen=True)
class LiftedOperator:
    matrix: np.ndarray
    grid: CollocationGrid
    diff_matrices: tuple[np.ndarray, ...]

    @property
    def side(self) -> int:
        return self.matrix.shape[0]

    @property
    def middle_index(self) -> int:
        return middle_index(self.grid)


def axis_factor(D: np.ndarray, axis: int, dimension: int) -> np.ndarray:
    """Kronecker factor applying ``D`` along ``axis`` (0-based) of the flat grid."""
    n = D.shape[0]
    slow = np.eye(n ** (dimension - 1 - axis))
    fast = np.eye(n**axis)
    return np.kron(np.kron(slow, D), fast)


def evaluate_field(f: Field, grid: CollocationGrid) -> np.ndarray:
    """``f`` at every node as an ``(N**d, d)`` array."""
    pts = grid.points
    with np.errstate(over="ignore", invalid="ignore"):
        values = np.array([np.asarray(f(p), dtype=float).reshape(grid.dimension) for p in pts])
    bad = ~np.isfinite(values).all(axis=1)
    if bad.any():
        p = int(np.flatnonzero(bad)[0])
        raise NonFiniteValueError(f"vector field is non-finite at node {p} {pts[p].tolist()}")
    return values


def build_koopman_matrix(f: Field, grid: CollocationGrid) -> LiftedOperator:
    d = grid.dimension
    F = evaluate_field(f, grid)
    diffs = tuple(differentiation_matrix(ax) for ax in grid.axes)
    K = np.zeros((grid.size, grid.size))
    for i, D in enumerate(diffs):
        K += F[:, i, None] * axis_factor(D, i, d)
    return LiftedOperator(K, grid, diffs)


def initial_vector(g: Observable, grid: CollocationGrid) -> np.ndarray:
    """Observable sampled at the nodes in flat order."""
    pts = grid.points
    y = np.array([float(g(p)) for p in pts])
    bad = np.flatnonzero(~np.isfinite(y))
    if bad.size:
        p = int(bad[0])
        raise NonFiniteValueError(f"observable is non-finite at node {p} {pts[p].tolist()}")
    return y


def coordinate_initial_vectors(grid: CollocationGrid) -> list[np.ndarray]:
    """Initial vectors for the observables ``g_i(x) = x_i``, one per axis.

    All of them evolve under the same lifted matrix, so the full state can
    be recovered from one ``K``.
    """
    return [grid.points[:, i].copy() for i in range(grid.dimension)]
