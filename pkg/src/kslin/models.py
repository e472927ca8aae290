"""Benchmark systems with their default experiment settings."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .carleman import PolynomialODE, Term, taylor_polynomialize


@dataclass(frozen=True)
class ModelSpec:
    name: str
    dimension: int
    field: Callable[[np.ndarray], np.ndarray]
    x0: tuple[float, ...]
    horizon: float
    radius: tuple[float, ...]
    order: int
    closed_form: Optional[Callable[[np.ndarray], np.ndarray]] = None
    terms: Optional[tuple[Term, ...]] = None
    taylor_terms: Optional[Callable[[int], list[Term]]] = None

    @property
    def is_polynomial(self) -> bool:
        return self.terms is not None

    def solution(self, times: Sequence[float]) -> np.ndarray:
        """Closed-form states, shape ``(len(times), d)``."""
        if self.closed_form is None:
            raise ValueError(f"model {self.name!r} has no closed-form solution")
        t = np.asarray(times, dtype=float)
        return np.asarray(self.closed_form(t)).reshape(t.size, self.dimension)

    def polynomial(self, taylor_order: int = 12) -> PolynomialODE:
        """Exact polynomial form, or the Taylor polynomial for non-polynomial fields."""
        if self.terms is not None:
            return PolynomialODE.from_terms(self.dimension, self.terms)
        return taylor_polynomialize(self, taylor_order)


def _quadratic() -> ModelSpec:
    x0 = 0.08
    return ModelSpec(
        name="quadratic",
        dimension=1,
        field=lambda x: x**2,
        x0=(x0,),
        horizon=10.0,
        radius=(0.03,),
        order=11,
        closed_form=lambda t: 1.0 / (1.0 / x0 - t),
        terms=((0, (2,), 1.0),),
    )


def _cos2_taylor(order: int) -> list[Term]:
    # cos^2 x = (1 + cos 2x) / 2
    terms: list[Term] = [(0, (0,), 1.0)]
    for m in range(1, order // 2 + 1):
        terms.append((0, (2 * m,), (-1) ** m * 2.0 ** (2 * m - 1) / math.factorial(2 * m)))
    return terms


def _cosine_square() -> ModelSpec:
    x0 = 0.9
    return ModelSpec(
        name="cosine-square",
        dimension=1,
        field=lambda x: np.cos(x) ** 2,
        x0=(x0,),
        horizon=10.0,
        radius=(0.3,),
        order=9,
        # d(tan x)/dt = 1
        closed_form=lambda t: np.arctan(t + math.tan(x0)),
        taylor_terms=_cos2_taylor,
    )


def _pendulum_taylor(order: int) -> list[Term]:
    terms: list[Term] = [(0, (0, 1), 1.0)]
    for m in range(0, (order - 1) // 2 + 1):
        p = 2 * m + 1
        terms.append((1, (p, 0), (-1) ** (m + 1) / math.factorial(p)))
    return terms


def _pendulum() -> ModelSpec:
    return ModelSpec(
        name="pendulum",
        dimension=2,
        # g / L = 1
        field=lambda x: np.array([x[1], -math.sin(x[0])]),
        x0=(0.1, 0.1),
        horizon=10.0,
        radius=(1.0, 1.0),
        order=9,
        taylor_terms=_pendulum_taylor,
    )


def _lotka_volterra() -> ModelSpec:
    return ModelSpec(
        name="lotka-volterra",
        dimension=2,
        field=lambda x: np.array([1.1 * x[0] - 0.4 * x[0] * x[1], 0.1 * x[0] * x[1] - 0.4 * x[1]]),
        x0=(5.0, 5.0),
        horizon=10.0,
        radius=(3.0, 3.0),
        order=13,
        terms=(
            (0, (1, 0), 1.1),
            (0, (1, 1), -0.4),
            (1, (1, 1), 0.1),
            (1, (0, 1), -0.4),
        ),
    )


def _kraichnan_orszag() -> ModelSpec:
    return ModelSpec(
        name="kraichnan-orszag",
        dimension=3,
        field=lambda x: np.array([x[1] * x[2], x[0] * x[2], -2.0 * x[0] * x[1]]),
        x0=(0.1, -0.2, 0.3),
        horizon=5.0,
        radius=(0.1, 0.1, 0.1),
        order=9,
        terms=(
            (0, (0, 1, 1), 1.0),
            (1, (1, 0, 1), 1.0),
            (2, (1, 1, 0), -2.0),
        ),
    )


def linear_model(rate: float = -0.7, x0: float = 1.0, horizon: float = 5.0) -> ModelSpec:
    """``dx/dt = rate * x``; both linearisations are exact for it."""
    return ModelSpec(
        name="linear",
        dimension=1,
        field=lambda x: rate * x,
        x0=(x0,),
        horizon=horizon,
        radius=(0.5,),
        order=5,
        closed_form=lambda t: x0 * np.exp(rate * t),
        terms=((0, (1,), rate),),
    )


_CATALOG = (_quadratic(), _cosine_square(), _pendulum(), _lotka_volterra(), _kraichnan_orszag())


def catalog() -> list[ModelSpec]:
    return list(_CATALOG)


def get_model(name: str) -> ModelSpec:
    for model in _CATALOG:
        if model.name == name:
            return model
    if name == "linear":
        return linear_model()
    known = ", ".join(m.name for m in _CATALOG)
    raise ValueError(f"unknown model {name!r}; choose one of {known}")
