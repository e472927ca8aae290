"""Carleman linearisation of polynomial ODEs.

A polynomial field is written as ``dx/dt = b0 + B_1 x + B_2 x^(2) + ... + B_k x^(k)``
where ``x^(j)`` is the j-fold Kronecker power of the state and ``B_j`` has
shape ``(d, d**j)``. The lifted state stacks ``y_i = x^(i)`` for
``i = 1..N``; when ``b0`` is present a constant coordinate ``y_0 = 1`` is
prepended so the lifted system stays linear and homogeneous.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Iterable, Sequence

import numpy as np
import scipy.sparse as sp

from .exceptions import CarlemanSizeError

if TYPE_CHECKING:
    from .models import ModelSpec

DEFAULT_MAX_DENSE_SIDE = 4000

# (component, exponents, coefficient): coefficient * prod_m x_m**exponents[m] in f_component
Term = tuple[int, Sequence[int], float]


@dataclass(frozen=True)
class PolynomialODE:
    blocks: tuple[np.ndarray, ...]
    constant: np.ndarray | None = None

    def __post_init__(self) -> None:
        if not self.blocks:
            raise ValueError("need at least one coefficient block")
        d = self.blocks[0].shape[0]
        for j, B in enumerate(self.blocks, start=1):
            if B.shape != (d, d**j):
                raise ValueError(f"block {j} must have shape {(d, d**j)}, got {B.shape}")
        if self.constant is not None and np.shape(self.constant) != (d,):
            raise ValueError(f"constant term must have shape ({d},)")

    @property
    def dimension(self) -> int:
        return self.blocks[0].shape[0]

    @property
    def degree(self) -> int:
        return len(self.blocks)

    @property
    def has_constant(self) -> bool:
        return self.constant is not None and bool(np.any(self.constant))

    def block(self, j: int) -> np.ndarray:
        """``B_j`` for ``1 <= j <= degree``; ``j = 0`` gives ``b0`` as a ``(d, 1)`` column."""
        if j == 0:
            if self.constant is None:
                return np.zeros((self.dimension, 1))
            return np.asarray(self.constant, dtype=float).reshape(-1, 1)
        if not 1 <= j <= self.degree:
            raise ValueError(f"block index {j} outside 0..{self.degree}")
        return self.blocks[j - 1]

    def __call__(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        out = np.zeros(self.dimension) if self.constant is None else np.array(self.constant, dtype=float)
        power = np.ones(1)
        for B in self.blocks:
            power = np.kron(power, x)
            out = out + B @ power
        return out

    @classmethod
    def from_terms(cls, dimension: int, terms: Iterable[Term]) -> "PolynomialODE":
        """Assemble blocks from a monomial list.

        A monomial of degree ``j`` is stored at one column of ``B_j``: the
        Kronecker-power index of its factors in non-decreasing order.
        """
        terms = list(terms)
        degree = max((sum(e) for _, e, _ in terms), default=1)
        degree = max(degree, 1)
        blocks = [np.zeros((dimension, dimension**j)) for j in range(1, degree + 1)]
        constant = np.zeros(dimension)
        for comp, exps, coef in terms:
            if len(exps) != dimension:
                raise ValueError(f"exponent tuple {exps} does not match dimension {dimension}")
            j = sum(exps)
            if j == 0:
                constant[comp] += coef
                continue
            factors = [m for m, e in enumerate(exps) for _ in range(e)]
            col = 0
            for m in factors:
                col = col * dimension + m
            blocks[j - 1][comp, col] += coef
        return cls(tuple(blocks), constant if constant.any() else None)


def kron_power(x: np.ndarray, i: int) -> np.ndarray:
    out = np.ones(1)
    for _ in range(i):
        out = np.kron(out, x)
    return out


def carleman_side(dimension: int, truncation: int) -> int:
    """``sum_{i=1..N} d**i``, the side of the truncated Carleman matrix."""
    return sum(dimension**i for i in range(1, truncation + 1))


def _transfer_dense(i: int, B: np.ndarray, d: int) -> np.ndarray:
    total = np.zeros((d**i, B.shape[1] * d ** (i - 1)))
    for v in range(1, i + 1):
        total += np.kron(np.kron(np.eye(d ** (v - 1)), B), np.eye(d ** (i - v)))
    return total


def _transfer_sparse(i: int, B: np.ndarray, d: int) -> sp.csr_matrix:
    Bs = sp.csr_matrix(B)
    total = None
    for v in range(1, i + 1):
        term = sp.kron(sp.kron(sp.identity(d ** (v - 1), format="csr"), Bs), sp.identity(d ** (i - v), format="csr"))
        total = term if total is None else total + term
    return sp.csr_matrix(total)


def transfer_block(i: int, j: int, poly: PolynomialODE, *, sparse: bool = False):
    """``sum_{v=1..i} I^(v-1) x B_j x I^(i-v)``, mapping ``y_{i+j-1}`` into ``dy_i/dt``.

    ``j = 0`` is accepted for polynomials with a constant term and maps
    ``y_{i-1}`` into ``dy_i/dt``.
    """
    if i < 1:
        raise ValueError(f"row block index must be >= 1, got {i}")
    if j == 0 and not poly.has_constant:
        raise ValueError("j = 0 requires a constant term")
    if not 0 <= j <= poly.degree:
        raise ValueError(f"j must lie in 1..{poly.degree}, got {j}")
    if sparse:
        return _transfer_sparse(i, poly.block(j), poly.dimension)
    return _transfer_dense(i, poly.block(j), poly.dimension)


@dataclass(frozen=True)
class CarlemanSystem:
    """Truncated Carleman matrix.

    ``offsets[i]:offsets[i + 1]`` is the slice of ``y_i`` for ``i = 1..N``;
    ``offsets[0]:offsets[1]`` holds the constant coordinate (empty when the
    field has no constant term).
    """

    matrix: np.ndarray | sp.csr_matrix
    truncation: int
    dimension: int
    offsets: tuple[int, ...]

    @property
    def side(self) -> int:
        return self.matrix.shape[0]

    @property
    def is_sparse(self) -> bool:
        return sp.issparse(self.matrix)

    @property
    def has_constant(self) -> bool:
        return self.offsets[1] > 0

    @property
    def state_slice(self) -> slice:
        return slice(self.offsets[1], self.offsets[2])

    def block(self, i: int, m: int) -> np.ndarray:
        """Dense view of block row ``i``, block column ``m`` (``0`` = constant slot)."""
        rows = slice(self.offsets[i], self.offsets[i + 1])
        cols = slice(self.offsets[m], self.offsets[m + 1])
        sub = self.matrix[rows, cols]
        return sub.toarray() if sp.issparse(sub) else np.asarray(sub)


def build_carleman_matrix(
    poly: PolynomialODE,
    truncation: int,
    *,
    sparse: bool | None = None,
    max_dense_side: int = DEFAULT_MAX_DENSE_SIDE,
) -> CarlemanSystem:
    """Assemble the truncated Carleman matrix of order ``truncation``.

    ``sparse=None`` picks dense storage up to ``max_dense_side`` and CSR above
    it. Requesting ``sparse=False`` beyond the limit raises
    :class:`CarlemanSizeError`.
    """
    if truncation < 1:
        raise ValueError(f"truncation order must be >= 1, got {truncation}")
    d = poly.dimension
    lead = 1 if poly.has_constant else 0
    sizes = [lead] + [d**i for i in range(1, truncation + 1)]
    offsets = tuple(int(o) for o in np.concatenate([[0], np.cumsum(sizes)]))
    side = offsets[-1]
    if sparse is None:
        sparse = side > max_dense_side
    elif not sparse and side > max_dense_side:
        raise CarlemanSizeError(
            f"dense Carleman matrix of side {side} exceeds the limit {max_dense_side}; use sparse=True"
        )

    js = [j for j in range(0 if lead else 1, poly.degree + 1) if np.any(poly.block(j))]
    pairs = [(i, j) for i in range(1, truncation + 1) for j in js if i + j - 1 <= truncation]

    if not sparse:
        matrix = np.zeros((side, side))
        for i, j in pairs:
            m = i + j - 1
            matrix[offsets[i] : offsets[i + 1], offsets[m] : offsets[m + 1]] = _transfer_dense(i, poly.block(j), d)
        return CarlemanSystem(matrix, truncation, d, offsets)

    blocks: list[list] = [[None] * (truncation + 1) for _ in range(truncation + 1)]
    for i, j in pairs:
        blocks[i][i + j - 1] = _transfer_sparse(i, poly.block(j), d)
    # pin every block's shape so empty rows/columns survive bmat
    for i in range(truncation + 1):
        if blocks[i][i] is None:
            blocks[i][i] = sp.csr_matrix((sizes[i], sizes[i]))
    if not lead:
        blocks = [row[1:] for row in blocks[1:]]
    matrix = sp.bmat(blocks, format="csr")
    return CarlemanSystem(matrix, truncation, d, offsets)


def carleman_initial(x0: Sequence[float], truncation: int, *, constant: bool = False) -> np.ndarray:
    """Stack ``x0^(1), ..., x0^(N)``, with a leading 1 when ``constant`` is set."""
    if truncation < 1:
        raise ValueError(f"truncation order must be >= 1, got {truncation}")
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    parts = [np.ones(1)] if constant else []
    power = np.ones(1)
    for _ in range(truncation):
        power = np.kron(power, x0)
        parts.append(power)
    return np.concatenate(parts)


def taylor_polynomialize(model: "ModelSpec", order: int) -> PolynomialODE:
    """Polynomial field from the model's Taylor table, truncated at total degree ``order``."""
    if model.taylor_terms is None:
        raise ValueError(f"model {model.name!r} has no Taylor coefficient table")
    if order < 1:
        raise ValueError(f"Taylor order must be >= 1, got {order}")
    return PolynomialODE.from_terms(model.dimension, model.taylor_terms(order))
