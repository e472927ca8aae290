"""Convergence, radius and method-comparison experiments.

Every run is scored by :func:`max_error`: the largest absolute deviation
from the reference over all sample times and all state components. The
reference is the model's closed form when it has one and a fine RK4
solution otherwise.
"""

from __future__ import annotations

import csv
import io
import logging
import math
import time
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from .carleman import DEFAULT_MAX_DENSE_SIDE, build_carleman_matrix, carleman_initial
from .evolve import Trajectory, evolve_dense, evolve_stepped, extract_carleman_state, extract_observable
from .grid import make_grid
from .koopman import build_koopman_matrix, coordinate_initial_vectors
from .models import ModelSpec, get_model
from .reference import IntegratorConfig, integrate

logger = logging.getLogger(__name__)

ERROR_METRIC = "max_abs_over_samples_and_components"
DEFAULT_SAMPLES = 201
DEFAULT_TAYLOR_ORDER = 12
CSV_COLUMNS = ("param", "error", "matrix_side", "wall_time_seconds", "diverged")
# RK4 step for sparse Carleman runs: h * ||A||_1 stays below this
STEPPED_STABILITY = 0.05


def sample_times(horizon: float, samples: int = DEFAULT_SAMPLES) -> np.ndarray:
    if samples < 2:
        raise ValueError(f"need at least 2 samples, got {samples}")
    return np.linspace(0.0, horizon, samples)


def _as_values(series) -> np.ndarray:
    if isinstance(series, Trajectory):
        return series.values
    return np.asarray(series, dtype=float)


def max_error(approx, reference) -> float:
    """Max absolute difference over samples and components.

    Either argument may be a :class:`Trajectory` or an array. Any NaN/inf
    sample (a diverged run) makes the error ``inf``.
    """
    a = _as_values(approx)
    b = _as_values(reference)
    if a.ndim == 1:
        a = a[:, None]
    if b.ndim == 1:
        b = b[:, None]
    if a.shape != b.shape:
        raise ValueError(f"series are not aligned: {a.shape} vs {b.shape}")
    if isinstance(approx, Trajectory) and isinstance(reference, Trajectory):
        if not np.array_equal(approx.times, reference.times):
            raise ValueError("series are sampled at different times")
    if a.size == 0:
        return 0.0
    diff = np.abs(a - b)
    if not np.all(np.isfinite(diff)):
        return math.inf
    return float(diff.max())


def reference_solution(model: ModelSpec, times: np.ndarray, config: IntegratorConfig | None = None) -> np.ndarray:
    if model.closed_form is not None:
        return model.solution(times)
    traj = integrate(model.field, model.x0, float(times[-1]), config, times)
    if traj.diverged:
        raise ArithmeticError(f"reference integration of {model.name!r} diverged")
    return traj.values


@dataclass(frozen=True)
class LinearizationRun:
    states: Trajectory
    matrix_side: int
    wall_time: float


def solve_koopman(
    model: ModelSpec,
    order: int | None = None,
    radius: Sequence[float] | None = None,
    times: np.ndarray | None = None,
) -> LinearizationRun:
    """Koopman spectral linearisation of ``model``; returns the state for every sample."""
    order = model.order if order is None else order
    radius = model.radius if radius is None else tuple(radius)
    times = sample_times(model.horizon) if times is None else times
    start = time.perf_counter()
    grid = make_grid(model.x0, radius, order)
    op = build_koopman_matrix(model.field, grid)
    y0 = np.stack(coordinate_initial_vectors(grid), axis=1)
    traj = evolve_dense(op.matrix, y0, times)
    states = extract_observable(traj, op.middle_index)
    return LinearizationRun(states, op.side, time.perf_counter() - start)


def solve_carleman(
    model: ModelSpec,
    order: int | None = None,
    taylor_order: int = DEFAULT_TAYLOR_ORDER,
    times: np.ndarray | None = None,
    max_dense_side: int = DEFAULT_MAX_DENSE_SIDE,
) -> LinearizationRun:
    """Truncated Carleman linearisation; large systems switch to sparse RK4 stepping."""
    order = model.order if order is None else order
    times = sample_times(model.horizon) if times is None else times
    start = time.perf_counter()
    poly = model.polynomial(taylor_order)
    system = build_carleman_matrix(poly, order, max_dense_side=max_dense_side)
    y0 = carleman_initial(model.x0, order, constant=system.has_constant)
    if system.is_sparse:
        A = system.matrix
        norm1 = float(abs(A).sum(axis=0).max()) if A.nnz else 0.0
        dt = float(np.max(np.diff(times))) if len(times) > 1 else 0.0
        substeps = max(1, math.ceil(dt * norm1 / STEPPED_STABILITY))
        traj = evolve_stepped(A, y0, times, substeps)
    else:
        traj = evolve_dense(system.matrix, y0, times)
    states = extract_carleman_state(traj, model.dimension, system.offsets[1])
    return LinearizationRun(states, system.side, time.perf_counter() - start)


@dataclass(frozen=True)
class ExperimentConfig:
    model: str
    method: str = "koopman"
    orders: tuple[int, ...] = ()
    radius: tuple[float, ...] | None = None
    radii: tuple[float, ...] = ()
    axis: int | None = None
    taylor_order: int = DEFAULT_TAYLOR_ORDER
    horizon: float | None = None
    samples: int = DEFAULT_SAMPLES

    def __post_init__(self) -> None:
        spec = get_model(self.model)
        if self.method not in ("koopman", "carleman"):
            raise ValueError(f"method must be 'koopman' or 'carleman', got {self.method!r}")
        if self.method == "koopman":
            even = [n for n in self.orders if n % 2 == 0 or n < 3]
            if even:
                raise ValueError(f"Koopman orders must be odd and >= 3, got {even}")
        elif any(n < 1 for n in self.orders):
            raise ValueError("Carleman truncation orders must be >= 1")
        if self.radius is not None and len(self.radius) not in (1, spec.dimension):
            raise ValueError(f"radius needs 1 or {spec.dimension} entries, got {len(self.radius)}")
        if self.radius is not None and not all(r > 0 and math.isfinite(r) for r in self.radius):
            raise ValueError("radii must be positive and finite")
        if any(not (r > 0 and math.isfinite(r)) for r in self.radii):
            raise ValueError("swept radii must be positive and finite")
        if self.axis is not None and not 1 <= self.axis <= spec.dimension:
            raise ValueError(f"axis must be in 1..{spec.dimension}, got {self.axis}")
        if self.horizon is not None and not self.horizon > 0:
            raise ValueError("horizon must be positive")
        if self.samples < 2:
            raise ValueError("samples must be >= 2")
        if self.taylor_order < 1:
            raise ValueError("Taylor order must be >= 1")

    @property
    def spec(self) -> ModelSpec:
        base = get_model(self.model)
        return base if self.horizon is None else replace(base, horizon=self.horizon)

    def radius_vector(self) -> tuple[float, ...]:
        spec = self.spec
        if self.radius is None:
            return spec.radius
        return tuple(np.broadcast_to(self.radius, (spec.dimension,)).tolist())


@dataclass
class SweepRow:
    param: float | int | str
    error: float
    matrix_side: int
    wall_time: float
    diverged: bool
    failure: str | None = None


@dataclass
class SweepResult:
    parameter: str
    rows: list[SweepRow] = field(default_factory=list)
    metric: str = ERROR_METRIC

    @property
    def params(self) -> list:
        return [r.param for r in self.rows]

    @property
    def errors(self) -> np.ndarray:
        return np.array([r.error for r in self.rows])

    @property
    def sides(self) -> list[int]:
        return [r.matrix_side for r in self.rows]

    @property
    def all_failed(self) -> bool:
        return bool(self.rows) and all(r.failure is not None or not math.isfinite(r.error) for r in self.rows)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for r in self.rows:
            writer.writerow(
                [_fmt(r.param), _fmt(r.error), str(r.matrix_side), _fmt(r.wall_time), "true" if r.diverged else "false"]
            )
        return buf.getvalue()

    def write_csv(self, path: str | Path) -> None:
        Path(path).write_text(self.to_csv(), encoding="utf-8", newline="")


def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        # repr round-trips exactly
        return repr(float(value))
    return str(value)


_RECOVERABLE = (ArithmeticError, ValueError, MemoryError, np.linalg.LinAlgError)


def _score(param, run_fn, reference: np.ndarray, side_hint: int) -> SweepRow:
    try:
        run = run_fn()
    except _RECOVERABLE as exc:
        logger.warning("run at %r failed: %s", param, exc)
        return SweepRow(param, math.inf, side_hint, 0.0, True, str(exc))
    err = max_error(run.states, reference)
    return SweepRow(param, err, run.matrix_side, run.wall_time, run.states.diverged or not math.isfinite(err))


def koopman_side(dimension: int, order: int) -> int:
    return order**dimension


def run_order_sweep(config: ExperimentConfig) -> SweepResult:
    spec = config.spec
    orders = config.orders or (spec.order,)
    times = sample_times(spec.horizon, config.samples)
    reference = reference_solution(spec, times)
    result = SweepResult("order")
    for n in sorted(orders):
        if config.method == "koopman":
            radius = config.radius_vector()
            row = _score(n, lambda: solve_koopman(spec, n, radius, times), reference, koopman_side(spec.dimension, n))
        else:
            row = _score(
                n,
                lambda: solve_carleman(spec, n, config.taylor_order, times),
                reference,
                _carleman_side_for(spec, n, config.taylor_order),
            )
        result.rows.append(row)
    return result


def _carleman_side_for(spec: ModelSpec, order: int, taylor_order: int) -> int:
    poly = spec.polynomial(taylor_order)
    return (1 if poly.has_constant else 0) + sum(spec.dimension**i for i in range(1, order + 1))


def run_radius_sweep(config: ExperimentConfig) -> list[SweepResult]:
    """One table per swept axis (every axis when ``config.axis`` is unset).

    The swept axis takes each value of ``config.radii``; the others stay at
    the configured (or default) radius.
    """
    if config.method != "koopman":
        raise ValueError("radius sweeps apply to the Koopman method only")
    if not config.radii:
        raise ValueError("radius sweep needs at least one radius")
    spec = config.spec
    order = config.orders[0] if config.orders else spec.order
    times = sample_times(spec.horizon, config.samples)
    reference = reference_solution(spec, times)
    base = config.radius_vector()
    axes = [config.axis] if config.axis is not None else list(range(1, spec.dimension + 1))
    tables = []
    for axis in axes:
        result = SweepResult(f"radius_axis_{axis}")
        for r in sorted(config.radii):
            radius = list(base)
            radius[axis - 1] = r
            row = _score(
                r,
                lambda: solve_koopman(spec, order, radius, times),
                reference,
                koopman_side(spec.dimension, order),
            )
            result.rows.append(row)
        tables.append(result)
    return tables


def run_comparison(
    model: str | ModelSpec,
    order: int,
    taylor_order: int = DEFAULT_TAYLOR_ORDER,
    *,
    samples: int = DEFAULT_SAMPLES,
    radius: Sequence[float] | None = None,
) -> SweepResult:
    """Koopman and Carleman at the same truncation order; rows are labelled by method."""
    spec = get_model(model) if isinstance(model, str) else model
    if order < 3 or order % 2 == 0:
        raise ValueError(f"comparison order must be odd and >= 3, got {order}")
    times = sample_times(spec.horizon, samples)
    reference = reference_solution(spec, times)
    result = SweepResult("method")
    result.rows.append(
        _score(
            "koopman",
            lambda: solve_koopman(spec, order, radius, times),
            reference,
            koopman_side(spec.dimension, order),
        )
    )
    result.rows.append(
        _score(
            "carleman",
            lambda: solve_carleman(spec, order, taylor_order, times),
            reference,
            _carleman_side_for(spec, order, taylor_order),
        )
    )
    return result
