"""Dense matrix helpers, spectral quantities and the regularized weighted objective.

Matrices are plain ``numpy.ndarray`` objects of dtype float64.  ``as_matrix``
is the single entry point that enforces shape and finiteness.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "as_matrix",
    "WlraProblem",
    "Factorization",
    "hadamard",
    "weighted_objective",
    "objective_row_form",
    "objective_col_form",
    "row_scaled",
    "col_scaled",
    "singular_values",
    "numerical_rank",
    "statistical_dimension",
    "stable_rank",
]

# relative cutoff below which a singular value counts as zero
RANK_RTOL = 1e-12


def as_matrix(M, name="matrix") -> np.ndarray:
    """Return ``M`` as a finite 2-D float64 array (copy only if needed)."""
    arr = np.asarray(M, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr.reshape(1, -1)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError(f"{name} must be a non-empty 2-D array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains NaN or Inf")
    return arr


@dataclass(frozen=True)
class WlraProblem:
    """An instance of regularized weighted low rank approximation.

    Inputs with fewer rows than columns are transposed on construction so
    that ``n >= d`` always holds; ``transposed`` records whether that
    happened so factors can be mapped back.
    """

    A: np.ndarray
    W: np.ndarray
    k: int
    lam: float
    epsilon: float = 0.5
    transposed: bool = field(default=False)

    def __post_init__(self):
        A = as_matrix(self.A, "A")
        W = as_matrix(self.W, "W")
        if A.shape != W.shape:
            raise ValueError(f"A has shape {A.shape} but W has shape {W.shape}")
        if np.any(W < 0):
            raise ValueError("weights must be nonnegative")
        transposed = self.transposed
        if A.shape[0] < A.shape[1]:
            A, W = A.T.copy(), W.T.copy()
            transposed = not transposed
        if not 1 <= int(self.k) <= A.shape[1]:
            raise ValueError(f"k must lie in [1, {A.shape[1]}], got {self.k}")
        if self.lam < 0:
            raise ValueError("lambda must be nonnegative")
        if not 0 < self.epsilon < 1:
            raise ValueError("epsilon must lie in (0, 1)")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "W", W)
        object.__setattr__(self, "k", int(self.k))
        object.__setattr__(self, "lam", float(self.lam))
        object.__setattr__(self, "transposed", transposed)

    @property
    def shape(self):
        return self.A.shape

    @property
    def weight_rank(self) -> int:
        return numerical_rank(self.W)


@dataclass(frozen=True)
class Factorization:
    U: np.ndarray
    V: np.ndarray
    objective: float | None = None

    def __post_init__(self):
        U = as_matrix(self.U, "U")
        V = as_matrix(self.V, "V")
        if U.shape[1] != V.shape[0]:
            raise ValueError(f"inner dimensions differ: U {U.shape}, V {V.shape}")
        object.__setattr__(self, "U", U)
        object.__setattr__(self, "V", V)

    @property
    def rank(self) -> int:
        return self.U.shape[1]

    def with_objective(self, problem: WlraProblem) -> "Factorization":
        return Factorization(self.U, self.V, weighted_objective(problem, self))


def hadamard(W, M) -> np.ndarray:
    W = np.asarray(W, dtype=np.float64)
    M = np.asarray(M, dtype=np.float64)
    if W.shape != M.shape:
        raise ValueError(f"shape mismatch: {W.shape} vs {M.shape}")
    return W * M


def _check_factor_shapes(problem: WlraProblem, F: Factorization):
    n, d = problem.shape
    if F.U.shape[0] != n or F.V.shape[1] != d:
        raise ValueError(
            f"factors {F.U.shape} x {F.V.shape} do not match problem shape {(n, d)}"
        )


def _reg_terms(lam, F):
    return lam * (np.sum(F.U**2) + np.sum(F.V**2))


def weighted_objective(problem: WlraProblem, F: Factorization) -> float:
    """``||W o (UV - A)||_F^2 + lam ||U||_F^2 + lam ||V||_F^2``."""
    _check_factor_shapes(problem, F)
    R = problem.W * (F.U @ F.V - problem.A)
    return float(np.sum(R**2) + _reg_terms(problem.lam, F))


def objective_row_form(problem: WlraProblem, F: Factorization) -> float:
    """Same objective, summed row by row as ``||U_i V D_{W_i} - A_i D_{W_i}||^2``."""
    _check_factor_shapes(problem, F)
    total = 0.0
    for i in range(problem.shape[0]):
        w = problem.W[i]
        r = F.U[i] @ row_scaled(problem, i, F.V) - problem.A[i] * w
        total += float(r @ r)
    return total + float(_reg_terms(problem.lam, F))


def objective_col_form(problem: WlraProblem, F: Factorization) -> float:
    """Same objective, summed column by column as ``||D_{W_j} U V_j - D_{W_j} A_j||^2``."""
    _check_factor_shapes(problem, F)
    total = 0.0
    for j in range(problem.shape[1]):
        r = col_scaled(problem, j, F.U) @ F.V[:, j] - problem.W[:, j] * problem.A[:, j]
        total += float(r @ r)
    return total + float(_reg_terms(problem.lam, F))


def row_scaled(problem: WlraProblem, i: int, M) -> np.ndarray:
    """``M @ diag(W[i, :])`` computed as a column scaling."""
    n = problem.shape[0]
    if not 0 <= i < n:
        raise IndexError(f"row index {i} out of range for {n} rows")
    M = np.asarray(M, dtype=np.float64)
    return M * problem.W[i][None, :]


def col_scaled(problem: WlraProblem, j: int, M) -> np.ndarray:
    """``diag(W[:, j]) @ M`` computed as a row scaling."""
    d = problem.shape[1]
    if not 0 <= j < d:
        raise IndexError(f"column index {j} out of range for {d} columns")
    M = np.asarray(M, dtype=np.float64)
    return problem.W[:, j][:, None] * M


def singular_values(M) -> np.ndarray:
    M = np.asarray(M, dtype=np.float64)
    if M.size == 0:
        return np.zeros(0)
    return np.linalg.svd(M, compute_uv=False)


def _nonzero_singular_values(M) -> np.ndarray:
    M = np.asarray(M, dtype=np.float64)
    s = singular_values(M)
    if s.size == 0 or s[0] == 0.0:
        return s[:0]
    tol = max(M.shape) * s[0] * RANK_RTOL
    return s[s > tol]


def numerical_rank(M) -> int:
    return int(_nonzero_singular_values(M).size)


def statistical_dimension(M, lam: float) -> float:
    """``sum_i 1 / (1 + lam / sigma_i^2)`` over the nonzero singular values.

    With ``lam == 0`` this is the numerical rank.
    """
    if lam < 0:
        raise ValueError("lambda must be nonnegative")
    s = _nonzero_singular_values(M)
    if lam == 0:
        return float(s.size)
    s2 = s**2
    return float(np.sum(s2 / (s2 + lam)))


def stable_rank(M) -> float:
    """``||M||_F^2 / ||M||_2^2``."""
    s = singular_values(M)
    if s.size == 0 or s[0] == 0.0:
        raise ValueError("stable rank of the zero matrix is undefined")
    return float(np.sum(s**2) / s[0] ** 2)
