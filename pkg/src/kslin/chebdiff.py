"""Chebyshev collocation differentiation matrix on ascending Gauss-Lobatto nodes."""

from __future__ import annotations

import numpy as np

from .grid import AxisSpec


def _reference_matrix(count: int) -> np.ndarray:
    # Classical matrix for descending nodes cos(j*pi/(n-1)), j = 0..n-1.
    n = count - 1
    theta = np.arange(count) * np.pi / n
    # x_i - x_j = 2 sin((t_j + t_i)/2) sin((t_j - t_i)/2), avoids cancellation
    half = theta / 2.0
    diff = 2.0 * np.sin(half[None, :] + half[:, None]) * np.sin(half[None, :] - half[:, None])
    np.fill_diagonal(diff, 1.0)

    c = np.ones(count)
    c[0] = c[-1] = 2.0
    c *= (-1.0) ** np.arange(count)

    D = np.outer(c, 1.0 / c) / diff
    np.fill_diagonal(D, 0.0)
    # negative-sum trick: rows annihilate constants to rounding
    np.fill_diagonal(D, -D.sum(axis=1))
    return D


def differentiation_matrix(axis: AxisSpec) -> np.ndarray:
    """Differentiation matrix for the nodes of ``axis``.

    ``D @ u`` returns the derivative, at the nodes, of the degree ``N - 1``
    polynomial interpolating ``u``. Rows and columns follow the ascending
    node order of :func:`kslin.grid.gauss_lobatto_points`, and the entries
    carry the ``1 / radius`` factor of the affine map from ``[-1, 1]``.
    """
    D = _reference_matrix(axis.count)[::-1, ::-1]
    return np.ascontiguousarray(D) / axis.radius
