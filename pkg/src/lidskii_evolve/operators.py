"""Dense matrix realizations of the operators the solver works with.

Every constructor returns an immutable :class:`DiscretizedOperator`.  Left
sided Riemann-Liouville derivatives are discretized by Grunwald-Letnikov
lower-triangular Toeplitz matrices, so products of two such matrices on one
grid are again such a matrix (the generating symbols ``(1 - z)**beta``
multiply).  The symmetric tridiagonal Dirichlet Laplacian is kept alongside
for spectral work.

Operators are built with "accretive intent": the sign of the evolution
equation is applied by the solver, never here.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from math import comb
from typing import Callable, Mapping, Sequence, Union

import numpy as np
from scipy.linalg import toeplitz
from scipy.special import gamma

from .errors import (
    BetaTooLarge,
    CoefficientPositivity,
    EmptyCoefficients,
    InvalidInterval,
    NonAccretiveOperator,
    NonPositiveOrder,
    ParameterError,
    SignViolation,
    SingularQ,
)

__all__ = [
    "GridSpec",
    "DiscretizedOperator",
    "CoefficientSequence",
    "make_grid",
    "grunwald_weights",
    "gl_fractional_derivative",
    "dirichlet_laplacian",
    "composite_operator",
    "quasi_polynomial",
    "binomial_expansion_operator",
    "fractional_difference_coefficients",
    "difference_fractional_power",
    "difference_operator",
    "difference_perturbation",
    "perturbation_condition",
    "riesz_constant",
    "riesz_potential",
    "riesz_composite",
    "example_one_sequence",
    "diagonal_normal_operator",
    "from_matrix",
]

Samples = Union[float, Sequence[float], np.ndarray, Callable[[np.ndarray], np.ndarray]]


@dataclass(frozen=True)
class GridSpec:
    """Uniform grid on ``(a, b)`` with nodes ``a + j*spacing``, ``j = 1..n_points``."""

    a: float
    b: float
    n_points: int

    @property
    def spacing(self) -> float:
        return (self.b - self.a) / self.n_points

    @property
    def nodes(self) -> np.ndarray:
        return self.a + self.spacing * np.arange(1, self.n_points + 1)

    def to_dict(self) -> dict:
        return {"a": self.a, "b": self.b, "n_points": self.n_points}


def make_grid(a: float, b: float, n_points: int) -> GridSpec:
    if not b > a:
        raise InvalidInterval(f"need b > a, got a={a}, b={b}")
    if int(n_points) != n_points or n_points < 2:
        raise InvalidInterval(f"n_points must be an integer >= 2, got {n_points}")
    return GridSpec(float(a), float(b), int(n_points))


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, dtype=complex)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class DiscretizedOperator:
    """A square complex matrix standing in for the closed operator.

    Either ``dense`` or ``diagonal`` is set.  Diagonal operators keep only
    their diagonal so that abstract sequences of length 1e5 remain usable for
    spectral diagnostics; ``matrix`` materializes the dense form on demand.
    """

    kind: str
    dimension: int
    grid: GridSpec | None = None
    params: Mapping[str, float] = field(default_factory=dict)
    dense: np.ndarray | None = None
    diagonal: np.ndarray | None = None

    def __post_init__(self):
        if (self.dense is None) == (self.diagonal is None):
            raise ParameterError("exactly one of dense/diagonal must be given")
        if self.dense is not None:
            object.__setattr__(self, "dense", _frozen(self.dense))
            if self.dense.ndim != 2 or self.dense.shape[0] != self.dense.shape[1]:
                raise ParameterError(f"operator matrix must be square, got {self.dense.shape}")
            if self.dense.shape[0] != self.dimension:
                raise ParameterError("dimension does not match matrix size")
        else:
            object.__setattr__(self, "diagonal", _frozen(self.diagonal))
            if self.diagonal.shape != (self.dimension,):
                raise ParameterError("dimension does not match diagonal length")
        if self.grid is not None and self.grid.n_points != self.dimension:
            raise ParameterError("grid size does not match operator dimension")

    @cached_property
    def matrix(self) -> np.ndarray:
        if self.dense is not None:
            return self.dense
        return _frozen(np.diag(self.diagonal))

    @property
    def is_diagonal(self) -> bool:
        return self.diagonal is not None

    def __matmul__(self, other):
        if isinstance(other, DiscretizedOperator):
            other = other.matrix
        if self.is_diagonal and np.ndim(other) == 1:
            return self.diagonal * other
        return self.matrix @ other


@dataclass(frozen=True)
class CoefficientSequence:
    """Truncated coefficients ``C_0 .. C_{T-1}`` of a fractional difference power."""

    values: np.ndarray
    order: float
    truncation_length: int
    tail_bound: float


def from_matrix(matrix, kind: str = "matrix", grid: GridSpec | None = None, **params) -> DiscretizedOperator:
    matrix = np.asarray(matrix, dtype=complex)
    return DiscretizedOperator(kind, matrix.shape[0], grid, dict(params), dense=matrix)


# -- Grunwald-Letnikov -----------------------------------------------------

def grunwald_weights(order: float, n: int) -> np.ndarray:
    """First ``n`` coefficients of ``(1 - z)**order``, i.e. ``(-1)**k * binom(order, k)``."""
    w = np.empty(n)
    if n == 0:
        return w
    w[0] = 1.0
    for k in range(1, n):
        w[k] = w[k - 1] * (k - 1 - order) / k
    return w


def _lower_toeplitz(column: np.ndarray) -> np.ndarray:
    return toeplitz(column, np.zeros_like(column))


def gl_fractional_derivative(grid: GridSpec, order: float) -> DiscretizedOperator:
    """Grunwald-Letnikov matrix of the left-sided derivative of ``order`` > 0."""
    if not order > 0:
        raise NonPositiveOrder(f"order must be positive, got {order}")
    h = grid.spacing
    column = grunwald_weights(order, grid.n_points) * h ** (-order)
    return DiscretizedOperator(
        "gl_derivative", grid.n_points, grid, {"order": float(order)}, dense=_lower_toeplitz(column)
    )


def dirichlet_laplacian(grid: GridSpec) -> DiscretizedOperator:
    """Symmetric tridiagonal second difference ``(1, -2, 1)/h**2``; negative definite."""
    n, h = grid.n_points, grid.spacing
    m = np.zeros((n, n))
    idx = np.arange(n)
    m[idx, idx] = -2.0
    m[idx[1:], idx[:-1]] = 1.0
    m[idx[:-1], idx[1:]] = 1.0
    return DiscretizedOperator("dirichlet_laplacian", n, grid, {}, dense=m / h**2)


def _second_derivative(grid: GridSpec, laplacian_kind: str) -> np.ndarray:
    if laplacian_kind == "dirichlet":
        return np.asarray(dirichlet_laplacian(grid).matrix)
    if laplacian_kind == "gl_toeplitz":
        return np.asarray(gl_fractional_derivative(grid, 2.0).matrix)
    raise ParameterError(f"unknown laplacian_kind {laplacian_kind!r}")


def composite_operator(
    eta: float,
    xi: float,
    beta: float,
    grid: GridSpec,
    laplacian_kind: str = "dirichlet",
    *,
    strict: bool = True,
) -> DiscretizedOperator:
    """``eta * D2 + xi * D^beta`` with ``eta < 0`` and ``xi > 0``.

    ``strict=False`` admits the degenerate ``xi = 0`` case.
    """
    if eta >= 0 or xi < 0 or (strict and xi == 0):
        raise SignViolation(f"need eta < 0 and xi > 0, got eta={eta}, xi={xi}")
    if not 0 < beta < 1:
        raise ParameterError(f"beta must lie in (0, 1), got {beta}")
    m = eta * _second_derivative(grid, laplacian_kind)
    if xi != 0:
        m = m + xi * np.asarray(gl_fractional_derivative(grid, beta).matrix)
    params = {"eta": float(eta), "xi": float(xi), "beta": float(beta)}
    return DiscretizedOperator(f"composite_{laplacian_kind}", grid.n_points, grid, params, dense=m)


def quasi_polynomial(coefficients: Sequence[complex], theta: float, grid: GridSpec) -> DiscretizedOperator:
    """``sum_k C_k D^{k*theta}`` with the ``k = 0`` term read as ``C_0 * E``."""
    coefficients = list(coefficients)
    if not coefficients or all(c == 0 for c in coefficients):
        raise EmptyCoefficients("need at least one nonzero coefficient")
    if not theta > 0:
        raise NonPositiveOrder(f"theta must be positive, got {theta}")
    n = grid.n_points
    m = np.zeros((n, n), dtype=complex)
    for k, c in enumerate(coefficients):
        if c == 0:
            continue
        if k == 0:
            m += c * np.eye(n)
        else:
            m += c * np.asarray(gl_fractional_derivative(grid, k * theta).matrix)
    return DiscretizedOperator("quasi_polynomial", n, grid, {"theta": float(theta)}, dense=m)


def binomial_expansion_operator(n: int, beta: float, grid: GridSpec) -> DiscretizedOperator:
    """``sum_k (-1)**(n-k) C(n,k) D^{beta*k + 2(n-k)}``, the expanded n-th power of ``-D2 + D^beta``."""
    if n < 1:
        raise ParameterError(f"n must be a positive integer, got {n}")
    if not 0 < beta < 1.0 / n:
        raise BetaTooLarge(f"need 0 < beta < 1/n = {1.0 / n}, got {beta}")
    size = grid.n_points
    m = np.zeros((size, size))
    for k in range(n + 1):
        order = beta * k + 2 * (n - k)
        m += (-1) ** (n - k) * comb(n, k) * np.asarray(gl_fractional_derivative(grid, order).matrix).real
    return DiscretizedOperator("binomial_expansion", size, grid, {"n": n, "beta": float(beta)}, dense=m)


# -- difference operator ---------------------------------------------------

def fractional_difference_coefficients(beta: float, c: float, count: int) -> np.ndarray:
    """``C_k = -beta Gamma(k - beta) / (k! Gamma(1 - beta)) * c**beta`` for ``k < count``.

    Evaluated by the ratio ``C_k / C_{k-1} = (k - 1 - beta)/k``; this stays
    finite at integer ``beta`` where the Gamma form is 0/0.
    """
    return grunwald_weights(beta, count) * c**beta


def difference_fractional_power(
    c: float, d_shift: int, beta: float, dimension: int, truncation: int
) -> tuple[DiscretizedOperator, CoefficientSequence]:
    """Banded lower-triangular matrix of ``J^beta``, ``J f = c [f(x) - f(x - d)]``.

    ``C_k`` sits on sub-diagonal ``k * d_shift``.  Since ``sum_k C_k = 0`` and
    ``C_k < 0`` for ``k >= 1`` (``0 < beta <= 1``) the dropped tail
    ``sum_{k >= T} |C_k|`` equals the kept partial sum exactly.
    """
    if truncation < 1:
        raise ParameterError("truncation must be >= 1")
    if dimension < d_shift or d_shift < 1:
        raise ParameterError("need 1 <= d_shift <= dimension")
    if not 0 < beta <= 1:
        raise ParameterError(f"beta must lie in (0, 1], got {beta}")
    values = fractional_difference_coefficients(beta, c, truncation)
    tail = max(float(values.sum()), 0.0)
    m = np.zeros((dimension, dimension))
    for k, ck in enumerate(values):
        offset = k * d_shift
        if offset >= dimension:
            break
        m += ck * np.eye(dimension, k=-offset)
    op = DiscretizedOperator(
        "difference_power", dimension, None,
        {"c": float(c), "d_shift": int(d_shift), "beta": float(beta)}, dense=m,
    )
    return op, CoefficientSequence(values, float(beta), int(truncation), tail)


def difference_operator(c: float, d_shift: int, dimension: int) -> tuple[np.ndarray, np.ndarray]:
    """Matrices of ``J`` and its adjoint ``J*`` (shift by ``d_shift`` grid steps)."""
    shift = np.eye(dimension, k=-d_shift)
    j = c * (np.eye(dimension) - shift)
    return j, j.T.copy()


def _samples(fn: Samples, dimension: int, grid: GridSpec | None = None) -> np.ndarray:
    if callable(fn):
        if grid is None:
            raise ParameterError("callable coefficients need a grid")
        return np.asarray(fn(grid.nodes), dtype=complex) * np.ones(dimension)
    return np.asarray(fn, dtype=complex) * np.ones(dimension)


def perturbation_condition(gamma_n: float, q_inverse_norm: float, sigma: float) -> bool:
    """The sufficient condition ``gamma_N > sigma * ||Q^{-1}||**2``."""
    return gamma_n > sigma * q_inverse_norm**2


def difference_perturbation(
    a_fn: Samples,
    b_fn: Samples,
    c: float,
    d_shift: int,
    beta: float,
    Q,
    N_op,
) -> tuple[DiscretizedOperator, float]:
    """Assemble ``J* a J + b J^beta + Q* N Q`` and its bound ``sigma``.

    ``sigma = 4 c ||a|| + 2 c**beta ||b||``: the series in the bound is taken
    over absolute values, ``sum_k |Gamma(k - beta)|/k! = 2 Gamma(1 - beta)/beta``.
    """
    q = np.asarray(getattr(Q, "matrix", Q), dtype=complex)
    nm = np.asarray(getattr(N_op, "matrix", N_op), dtype=complex)
    dim = q.shape[0]
    if np.linalg.matrix_rank(q) < dim:
        raise SingularQ("Q is not invertible")
    gamma_n = np.linalg.eigvalsh((nm + nm.conj().T) / 2)[0]
    if gamma_n <= 0:
        raise NonAccretiveOperator(f"N is not strictly accretive (lower bound {gamma_n:.3g})")
    a = _samples(a_fn, dim)
    b = _samples(b_fn, dim)
    j, j_adj = difference_operator(c, d_shift, dim)
    jb, _ = difference_fractional_power(c, d_shift, beta, dim, dim)
    m = j_adj @ (a[:, None] * j) + b[:, None] * np.asarray(jb.matrix) + q.conj().T @ nm @ q
    sigma = 4 * c * np.max(np.abs(a)) + 2 * c**beta * np.max(np.abs(b))
    params = {"c": float(c), "d_shift": int(d_shift), "beta": float(beta), "sigma": float(sigma),
              "gamma_n": float(gamma_n)}
    return DiscretizedOperator("difference_perturbation", dim, None, params, dense=m), float(sigma)


# -- Riesz potential -------------------------------------------------------

def riesz_constant(beta: float) -> float:
    return 1.0 / (2 * gamma(beta) * np.cos(beta * np.pi / 2))


def riesz_potential(grid: GridSpec, beta: float) -> DiscretizedOperator:
    """Riesz potential truncated to the grid interval.

    Entry ``(i, j)`` is ``B_beta`` times the exact integral of
    ``|s - x_i|**(beta - 1)`` over cell ``j`` (width ``h`` centred on ``x_j``),
    which also covers the integrable singularity on the diagonal.
    """
    if not 0 < beta < 1:
        raise ParameterError(f"beta must lie in (0, 1), got {beta}")
    n, h = grid.n_points, grid.spacing
    d = np.arange(n) * h

    def antiderivative(y):
        return np.sign(y) * np.abs(y) ** beta / beta

    column = riesz_constant(beta) * (antiderivative(d + h / 2) - antiderivative(d - h / 2))
    return DiscretizedOperator("riesz_potential", n, grid, {"beta": float(beta)}, dense=toeplitz(column))


def riesz_composite(grid: GridSpec, a_fn: Samples, delta: float, beta: float) -> DiscretizedOperator:
    """``D2 a D2 + I^{2(1-beta)} D2 + delta`` with the Dirichlet ``D2``."""
    if not 0.75 < beta < 1:
        raise ParameterError(f"beta must lie in (3/4, 1), got {beta}")
    a = _samples(a_fn, grid.n_points, grid)
    if np.any(a.real <= 0):
        raise CoefficientPositivity("Re a(x) must be positive on the grid")
    d2 = np.asarray(dirichlet_laplacian(grid).matrix).real
    pot = np.asarray(riesz_potential(grid, 2 * (1 - beta)).matrix).real
    m = d2 @ (a[:, None] * d2) + pot @ d2 + delta * np.eye(grid.n_points)
    return DiscretizedOperator("riesz_composite", grid.n_points, grid,
                               {"delta": float(delta), "beta": float(beta)}, dense=m)


# -- normal operator -------------------------------------------------------

def example_one_sequence(kappa: float, count: int) -> np.ndarray:
    """``mu_n = n**k ln**k n ln**k ln n`` for ``n = 1..count``.

    ``ln ln n`` is negative for ``n <= e``; indices 1 and 2 reuse ``mu_3``.
    """
    n = np.maximum(np.arange(1, count + 1, dtype=float), 3.0)
    return (n * np.log(n) * np.log(np.log(n))) ** kappa


def diagonal_normal_operator(
    kappa: float,
    M: float,
    dimension: int,
    arg_pattern: str = "alternating",
    eta_ratio: float | None = None,
    seed: int = 0,
) -> DiscretizedOperator:
    """Diagonal normal operator with eigenvalues ``mu_n + i eta_n``, ``|eta_n| <= eta_ratio * mu_n``.

    Parameters
    ----------
    kappa : float
        Exponent of the sequence ``(n ln n ln ln n)**kappa``, in (0, 1).
    M : float
        Bound ``|eta_n| < M mu_n``.
    arg_pattern : {"constant", "alternating", "random"}
        Sign pattern of ``eta_n``; ``random`` draws ``eta_n/mu_n`` uniformly
        from ``[-eta_ratio, eta_ratio]``.
    eta_ratio : float, optional
        Defaults to ``0.99 * M``; must be below ``M`` unless both are zero.
    """
    if not 0 < kappa < 1:
        raise ParameterError(f"kappa must lie in (0, 1), got {kappa}")
    if M < 0 or dimension < 1:
        raise ParameterError("need M >= 0 and dimension >= 1")
    ratio = 0.99 * M if eta_ratio is None else float(eta_ratio)
    if ratio < 0 or (M > 0 and ratio >= M) or (M == 0 and ratio != 0):
        raise ParameterError(f"eta_ratio must satisfy 0 <= eta_ratio < M, got {ratio} (M={M})")
    mu = example_one_sequence(kappa, dimension)
    if arg_pattern == "constant":
        signs = np.ones(dimension)
    elif arg_pattern == "alternating":
        signs = np.where(np.arange(dimension) % 2 == 0, 1.0, -1.0)
    elif arg_pattern == "random":
        signs = np.random.default_rng(seed).uniform(-1.0, 1.0, dimension)
    else:
        raise ParameterError(f"unknown arg_pattern {arg_pattern!r}")
    values = mu * (1 + 1j * ratio * signs)
    params = {"kappa": float(kappa), "M": float(M), "eta_ratio": ratio}
    return DiscretizedOperator("diagonal_normal", dimension, None, params, diagonal=values)
