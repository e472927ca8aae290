"""Time evolution of lifted linear systems ``dy/dt = M y``."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.linalg
import scipy.sparse as sp

from .exceptions import DefectiveMatrixError, NumericalError

OVERFLOW_LIMIT = 1e300
MAX_CONDITION = 1e12
IMAG_TOLERANCE = 1e-8


@dataclass(frozen=True)
class Trajectory:
    """Samples ``values[k]`` at ``times[k]``.

    ``values`` has shape ``(n_times,)`` for a scalar series or
    ``(n_times, ...)`` otherwise. When the run blew up, ``diverged_from``
    is the first sample index that is no longer valid; that sample and all
    later ones are NaN.
    """

    times: np.ndarray
    values: np.ndarray
    diverged_from: int | None = None

    @property
    def diverged(self) -> bool:
        return self.diverged_from is not None

    @property
    def valid(self) -> np.ndarray:
        mask = np.ones(len(self.times), dtype=bool)
        if self.diverged_from is not None:
            mask[self.diverged_from :] = False
        return mask


def _check_times(times: Sequence[float]) -> np.ndarray:
    t = np.asarray(times, dtype=float)
    if t.ndim != 1 or t.size == 0:
        raise ValueError("times must be a non-empty 1-D sequence")
    if t[0] < 0 or np.any(np.diff(t) < 0):
        raise ValueError("times must be ascending and start at or after 0")
    return t


def _blown_up(y: np.ndarray) -> bool:
    return not np.all(np.isfinite(y)) or np.max(np.abs(y), initial=0.0) > OVERFLOW_LIMIT


def _finish(times: np.ndarray, out: np.ndarray, bad: int | None) -> Trajectory:
    if bad is not None:
        out[bad:] = np.nan
    return Trajectory(times, out, bad)


def matrix_exponential(M: np.ndarray) -> np.ndarray:
    """``e^M`` by scaling and squaring with a Pade approximant."""
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ValueError("matrix has non-finite entries")
    return scipy.linalg.expm(M)


def evolve_dense(M: np.ndarray, y0: np.ndarray, times: Sequence[float]) -> Trajectory:
    """``y(t_k) = e^{M t_k} y0`` for each sample time.

    Consecutive samples are linked by ``e^{M (t_k - t_{k-1})}``; propagators
    are cached by step length, so a uniform sampling costs a single
    exponential. ``y0`` may be a matrix whose columns evolve together.
    """
    M = np.asarray(M, dtype=float)
    t = _check_times(times)
    y = np.array(y0, dtype=float)
    out = np.empty((t.size,) + y.shape)
    cache: dict[float, np.ndarray] = {}
    prev = 0.0
    for k, tk in enumerate(t):
        h = float(tk - prev)
        if h != 0.0:
            # snap near-equal float steps of a linspace onto one propagator
            key = float(np.round(h, 12))
            if key not in cache:
                cache[key] = matrix_exponential(M * h)
            with np.errstate(over="ignore", invalid="ignore"):
                y = cache[key] @ y
        if _blown_up(y):
            return _finish(t, out, k)
        out[k] = y
        prev = tk
    return Trajectory(t, out)


def evolve_stepped(M, y0: np.ndarray, times: Sequence[float], substeps: int) -> Trajectory:
    """Classical RK4 on ``dy/dt = M y`` with ``substeps`` uniform steps per sample interval.

    ``M`` may be dense or a scipy sparse matrix; only products ``M @ y`` are used.
    """
    if substeps < 1:
        raise ValueError(f"substeps must be >= 1, got {substeps}")
    if not sp.issparse(M):
        M = np.asarray(M, dtype=float)
    t = _check_times(times)
    y = np.array(y0, dtype=float)
    out = np.empty((t.size,) + y.shape)
    prev = 0.0
    for k, tk in enumerate(t):
        h = (tk - prev) / substeps
        if h > 0:
            with np.errstate(over="ignore", invalid="ignore"):
                for _ in range(substeps):
                    k1 = M @ y
                    k2 = M @ (y + 0.5 * h * k1)
                    k3 = M @ (y + 0.5 * h * k2)
                    k4 = M @ (y + h * k3)
                    y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            if _blown_up(y):
                return _finish(t, out, k)
        out[k] = y
        prev = tk
    return Trajectory(t, out)


@dataclass(frozen=True)
class EigenSolution:
    """``M = V diag(eigenvalues) V^{-1}`` and the modes ``c = V^{-1} y0``."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    modes: np.ndarray
    condition: float

    def reconstruct(self, t: float = 0.0) -> np.ndarray:
        """``sum_j c_j e^{lambda_j t} v_j`` (complex)."""
        growth = np.exp(self.eigenvalues * t)
        if self.modes.ndim == 1:
            return self.eigenvectors @ (growth * self.modes)
        return self.eigenvectors @ (growth[:, None] * self.modes)


def eigen_solution(M: np.ndarray, y0: np.ndarray, max_condition: float = MAX_CONDITION) -> EigenSolution:
    M = np.asarray(M, dtype=float)
    lam, V = np.linalg.eig(M)
    cond = float(np.linalg.cond(V))
    if not np.isfinite(cond) or cond > max_condition:
        raise DefectiveMatrixError(
            f"eigenvector matrix condition {cond:.3g} exceeds {max_condition:.3g}; use evolve_dense"
        )
    modes = np.linalg.solve(V, np.asarray(y0, dtype=float).astype(complex))
    return EigenSolution(lam, V, modes, cond)


def koopman_mode_solution(
    M, y0: np.ndarray, times: Sequence[float], *, max_condition: float = MAX_CONDITION
) -> tuple[Trajectory, EigenSolution]:
    """Evolve ``y0`` through the eigen-expansion ``y(t) = sum_j c_j e^{lambda_j t} v_j``.

    ``M`` may be a plain matrix or a :class:`kslin.koopman.LiftedOperator`.
    """
    M = getattr(M, "matrix", M)
    t = _check_times(times)
    eig = eigen_solution(M, y0, max_condition)
    y0 = np.asarray(y0, dtype=float)
    out = np.empty((t.size,) + y0.shape)
    for k, tk in enumerate(t):
        with np.errstate(over="ignore", invalid="ignore"):
            y = eig.reconstruct(tk)
        if _blown_up(y):
            return _finish(t, out, k), eig
        scale = max(1.0, float(np.max(np.abs(y))))
        residue = float(np.max(np.abs(y.imag), initial=0.0))
        if residue > IMAG_TOLERANCE * scale:
            raise NumericalError(f"imaginary residue {residue:.3g} at t={tk} exceeds tolerance")
        out[k] = y.real
    return Trajectory(t, out), eig


def extract_observable(traj: Trajectory, index: int) -> Trajectory:
    """Entry ``index`` of every sample (the middle node for Koopman lifts)."""
    n = traj.values.shape[1]
    if not -n <= index < n:
        raise IndexError(f"index {index} out of range for vectors of length {n}")
    return Trajectory(traj.times, traj.values[:, index], traj.diverged_from)


def extract_carleman_state(traj: Trajectory, d: int, offset: int = 0) -> Trajectory:
    """First Carleman block ``y_1``, i.e. ``values[:, offset:offset + d]``."""
    if d < 1 or offset < 0 or offset + d > traj.values.shape[1]:
        raise IndexError(f"state slice [{offset}, {offset + d}) out of range")
    return Trajectory(traj.times, traj.values[:, offset : offset + d], traj.diverged_from)
