"""Chebyshev-Gauss-Lobatto collocation grids.

Nodes are stored in ascending order and flattened with the first axis
varying fastest, so for ``d = 2`` the flat index of node ``(i1, i2)`` is
``i1 + N * i2`` (column-major vectorisation of the ``N x N`` node matrix).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np


def gauss_lobatto_points(center: float, radius: float, count: int) -> np.ndarray:
    """Chebyshev-Gauss-Lobatto nodes on ``[center - radius, center + radius]``.

    Parameters
    ----------
    center, radius : float
        Midpoint and half-width of the interval.
    count : int
        Number of nodes; must be odd and at least 3 so that ``center`` is
        itself a node.

    Returns
    -------
    ndarray
        ``count`` ascending nodes. The middle node equals ``center`` exactly.
    """
    _check_axis(center, radius, count)
    k = np.arange(count - 1, -1, -1)
    reference = np.cos(k * np.pi / (count - 1))
    # cos(pi/2) is 6e-17, not 0
    reference[(count - 1) // 2] = 0.0
    nodes = center + radius * reference
    nodes[(count - 1) // 2] = center
    return nodes


def _check_axis(center: float, radius: float, count: int) -> None:
    if isinstance(count, bool) or int(count) != count:
        raise ValueError(f"node count must be an integer, got {count!r}")
    if count < 3 or count % 2 == 0:
        raise ValueError(f"node count must be odd and >= 3, got {count}")
    if not math.isfinite(center):
        raise ValueError(f"center must be finite, got {center}")
    if not (math.isfinite(radius) and radius > 0):
        raise ValueError(f"radius must be positive and finite, got {radius}")


@dataclass(frozen=True)
class AxisSpec:
    """One coordinate direction of a collocation grid."""

    center: float
    radius: float
    count: int

    def __post_init__(self) -> None:
        _check_axis(self.center, self.radius, self.count)

    @property
    def points(self) -> np.ndarray:
        return gauss_lobatto_points(self.center, self.radius, self.count)


@dataclass(frozen=True)
class CollocationGrid:
    """Tensor product of ``d`` Gauss-Lobatto axes sharing one node count."""

    axes: tuple[AxisSpec, ...]
    _points: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if len(self.axes) == 0:
            raise ValueError("a grid needs at least one axis")
        counts = {ax.count for ax in self.axes}
        if len(counts) != 1:
            raise ValueError(f"all axes must share one node count, got {sorted(counts)}")
        per_axis = [ax.points for ax in self.axes]
        # meshgrid over reversed axes in 'ij' order makes axis 0 vary fastest
        mesh = np.meshgrid(*per_axis[::-1], indexing="ij")
        pts = np.stack([m.ravel() for m in mesh[::-1]], axis=1)
        pts.setflags(write=False)
        object.__setattr__(self, "_points", pts)

    @property
    def dimension(self) -> int:
        return len(self.axes)

    @property
    def count(self) -> int:
        return self.axes[0].count

    @property
    def size(self) -> int:
        return self.count**self.dimension

    @property
    def center(self) -> np.ndarray:
        return np.array([ax.center for ax in self.axes])

    @property
    def axis_points(self) -> list[np.ndarray]:
        return [ax.points for ax in self.axes]

    @property
    def points(self) -> np.ndarray:
        """All nodes as a read-only ``(N**d, d)`` array in flattened order."""
        return self._points


def tensor_grid(axes: Sequence[AxisSpec]) -> CollocationGrid:
    return CollocationGrid(tuple(axes))


def make_grid(center: Sequence[float], radius: Sequence[float], count: int) -> CollocationGrid:
    """Shorthand for a grid with one axis per entry of ``center``."""
    center = np.atleast_1d(np.asarray(center, dtype=float))
    radius = np.broadcast_to(np.asarray(radius, dtype=float), center.shape)
    return tensor_grid([AxisSpec(float(c), float(r), count) for c, r in zip(center, radius)])


def middle_index(grid: CollocationGrid) -> int:
    """Zero-based flat index of the grid center, ``(N**d - 1) // 2``.

    This is the node ``(N**d + 1) / 2`` in one-based counting.
    """
    return (grid.size - 1) // 2
