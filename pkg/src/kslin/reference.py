"""Fixed-step RK4 reference trajectories."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .evolve import OVERFLOW_LIMIT, Trajectory


@dataclass(frozen=True)
class IntegratorConfig:
    steps_per_unit: int = 10_000

    def __post_init__(self) -> None:
        if self.steps_per_unit < 1:
            raise ValueError(f"steps_per_unit must be >= 1, got {self.steps_per_unit}")


def integrate(
    f: Callable[[np.ndarray], np.ndarray],
    x0: Sequence[float],
    T: float,
    config: IntegratorConfig | None = None,
    times: Sequence[float] | None = None,
) -> Trajectory:
    """Integrate ``dx/dt = f(x)`` from 0 to ``T`` with classical RK4.

    Every interval between consecutive sample times is split into
    ``ceil(length * steps_per_unit)`` equal steps, so each sample is
    reached exactly rather than interpolated. ``times`` defaults to
    ``[0, T]``.
    """
    config = config or IntegratorConfig()
    if not T > 0:
        raise ValueError(f"horizon must be positive, got {T}")
    t = np.asarray([0.0, T] if times is None else times, dtype=float)
    if t.ndim != 1 or t.size == 0 or t[0] < 0 or t[-1] > T or np.any(np.diff(t) < 0):
        raise ValueError("sample times must be ascending within [0, T]")

    x = np.array(x0, dtype=float).reshape(-1)
    out = np.full((t.size, x.size), np.nan)
    prev = 0.0
    for k, tk in enumerate(t):
        span = tk - prev
        n = math.ceil(span * config.steps_per_unit - 1e-9) if span > 0 else 0
        if n:
            h = span / n
            with np.errstate(over="ignore", invalid="ignore"):
                for _ in range(n):
                    k1 = f(x)
                    k2 = f(x + 0.5 * h * k1)
                    k3 = f(x + 0.5 * h * k2)
                    k4 = f(x + h * k3)
                    x = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            if not np.all(np.isfinite(x)) or np.max(np.abs(x)) > OVERFLOW_LIMIT:
                return Trajectory(t, out, k)
        out[k] = x
        prev = tk
    return Trajectory(t, out)
