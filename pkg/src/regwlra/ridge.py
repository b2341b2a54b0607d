"""Solvers for the ridge subproblems produced by alternating minimization.

Exact solves go through the normal equations in whichever of the two
dimensions is smaller; sketched solves apply the same routine to
``(S M, S b)``.  Richardson iteration covers the polynomial-degree variant.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np
import scipy.linalg as la

__all__ = [
    "RidgeProblem",
    "RichardsonConfig",
    "RichardsonResult",
    "Preconditioner",
    "RICHARDSON_C",
    "ridge_objective",
    "ridge_solve",
    "sketched_ridge_solve",
    "solve_ridge_batch",
    "batch_objective_ratio",
    "richardson_solve",
    "richardson_iteration_bound",
    "richardson_polynomial_coefficients",
    "evaluate_richardson_polynomial",
    "check_containment",
    "build_preconditioner",
]

# multiplier in the iteration bound ceil(C * log(c_B / eps) / eta)
RICHARDSON_C = 2.0


@dataclass(frozen=True)
class RidgeProblem:
    M: np.ndarray
    b: np.ndarray
    lam: float

    def __post_init__(self):
        M = np.asarray(self.M, dtype=np.float64)
        if M.ndim == 1:
            M = M[:, None]
        b = np.asarray(self.b, dtype=np.float64).reshape(-1)
        if M.shape[0] != b.size:
            raise ValueError(f"M has {M.shape[0]} rows but b has length {b.size}")
        if self.lam < 0:
            raise ValueError("lambda must be nonnegative")
        if not (np.all(np.isfinite(M)) and np.all(np.isfinite(b))):
            raise ValueError("ridge inputs must be finite")
        object.__setattr__(self, "M", M)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "lam", float(self.lam))


def ridge_objective(p: RidgeProblem, x) -> float:
    r = p.M @ x - p.b
    return float(r @ r + p.lam * (x @ x))


def _ridge(M, b, lam):
    n, k = M.shape
    if lam == 0:
        # minimum-norm least squares
        return np.linalg.lstsq(M, b, rcond=None)[0]
    if n >= k:
        G = M.T @ M
        G[np.diag_indices_from(G)] += lam
        return la.cho_solve(la.cho_factor(G), M.T @ b)
    G = M @ M.T
    G[np.diag_indices_from(G)] += lam
    return M.T @ la.cho_solve(la.cho_factor(G), b)


def ridge_solve(p: RidgeProblem) -> np.ndarray:
    """``argmin_x ||M x - b||^2 + lam ||x||^2``.

    For ``lam == 0`` and rank-deficient ``M`` the minimum-norm solution is
    returned.
    """
    return _ridge(p.M, p.b, p.lam)


def sketched_ridge_solve(p: RidgeProblem, S) -> np.ndarray:
    """``argmin_y ||S (M y - b)||^2 + lam ||y||^2``."""
    S = np.asarray(S, dtype=np.float64)
    if S.ndim != 2 or S.shape[1] != p.M.shape[0]:
        raise ValueError(f"sketch of shape {S.shape} cannot act on {p.M.shape[0]} rows")
    return _ridge(S @ p.M, S @ p.b, p.lam)


def solve_ridge_batch(M, b, lam: float) -> np.ndarray:
    """Solve many independent ridge problems at once.

    Parameters
    ----------
    M : ndarray, shape (m, n, k)
        Design matrices.
    b : ndarray, shape (m, n)
        Targets.
    lam : float
        Shared regularization weight, must be positive.

    Returns
    -------
    ndarray, shape (m, k)
    """
    if lam <= 0:
        raise ValueError("batched ridge solve needs lambda > 0")
    m, n, k = M.shape
    if n >= k:
        G = np.matmul(M.transpose(0, 2, 1), M)
        G[:, np.arange(k), np.arange(k)] += lam
        rhs = np.matmul(M.transpose(0, 2, 1), b[:, :, None])
        return np.linalg.solve(G, rhs)[:, :, 0]
    G = np.matmul(M, M.transpose(0, 2, 1))
    G[:, np.arange(n), np.arange(n)] += lam
    z = np.linalg.solve(G, b[:, :, None])
    return np.matmul(M.transpose(0, 2, 1), z)[:, :, 0]


def batch_objective_ratio(problems: Sequence[RidgeProblem], S) -> float:
    """Unsketched cost of the sketched solutions over the optimal cost.

    Every problem shares the one sketch ``S``.
    """
    if len(problems) == 0:
        raise ValueError("need at least one ridge problem")
    n = problems[0].M.shape[0]
    if any(p.M.shape[0] != n for p in problems):
        raise ValueError("all problems must share the ambient dimension")
    num = den = 0.0
    for p in problems:
        num += ridge_objective(p, sketched_ridge_solve(p, S))
        den += ridge_objective(p, ridge_solve(p))
    if den == 0.0:
        return 1.0 if num == 0.0 else math.inf
    return num / den


@dataclass(frozen=True)
class RichardsonConfig:
    eta: float
    max_iters: int = 10_000
    tau: float = 1e-12

    def __post_init__(self):
        if not 0 < self.eta <= 1:
            raise ValueError("eta must lie in (0, 1]")
        if self.tau <= 0:
            raise ValueError("tau must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be positive")


@dataclass
class RichardsonResult:
    x: np.ndarray
    iterations: int
    residual_norms: list = field(default_factory=list)
    eta: float = 1.0
    containment_ok: bool = True

    @property
    def degree(self) -> int:
        """Degree in ``B^{-1} A`` of the polynomial that produces ``x``."""
        return max(self.iterations - 1, 0)

    def polynomial_coefficients(self) -> np.ndarray:
        return richardson_polynomial_coefficients(self.eta, self.iterations)


class _PsdInverse:
    """Applies ``B^+`` for symmetric PSD ``B``; raises if ``B`` is indefinite."""

    def __init__(self, B, name="B"):
        try:
            self._cho = la.cho_factor(B)
            self._pinv = None
        except la.LinAlgError:
            w, Q = np.linalg.eigh(B)
            scale = max(abs(w).max(), 1.0) if w.size else 1.0
            if w.size and w.min() < -1e-10 * scale:
                raise ValueError(f"{name} is not positive semidefinite") from None
            keep = w > 1e-12 * scale
            self._cho = None
            self._pinv = (Q[:, keep] / w[keep]) @ Q[:, keep].T

    def __call__(self, v):
        if self._cho is not None:
            return la.cho_solve(self._cho, v)
        return self._pinv @ v


def _symmetric(X, name):
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] != X.shape[1]:
        raise ValueError(f"{name} must be square")
    if not np.allclose(X, X.T, rtol=1e-10, atol=1e-12 * max(1.0, abs(X).max())):
        raise ValueError(f"{name} must be symmetric")
    return X


def check_containment(A, B, eta: float, probes: int = 20, seed: int = 0, exact: bool = False) -> bool:
    """Check ``eta A <= B <= A`` in the Loewner order.

    By default only ``probes`` random Rayleigh quotients are compared; with
    ``exact=True`` the generalized eigenvalues are computed instead.
    """
    A = np.asarray(A, dtype=np.float64)
    B = np.asarray(B, dtype=np.float64)
    slack = 1e-9
    if exact:
        lo = np.linalg.eigvalsh(B - eta * A).min()
        hi = np.linalg.eigvalsh(A - B).min()
        scale = max(abs(A).max(), 1e-300)
        return bool(lo >= -slack * scale and hi >= -slack * scale)
    rng = np.random.default_rng(seed)
    V = rng.standard_normal((A.shape[0], probes))
    qa = np.einsum("ij,ij->j", V, A @ V)
    qb = np.einsum("ij,ij->j", V, B @ V)
    tol = slack * np.abs(qa)
    return bool(np.all(eta * qa <= qb + tol) and np.all(qb <= qa + tol))


def richardson_solve(A, B, b, cfg: RichardsonConfig, exact_check: bool = False) -> RichardsonResult:
    """Preconditioned Richardson iteration ``x <- x - eta B^{-1} (A x - b)`` from ``x = 0``.

    Stops after ``cfg.max_iters`` steps or once ``||A x - b|| <= cfg.tau``.
    A failed containment check ``eta A <= B <= A`` only warns.
    """
    A = _symmetric(A, "A")
    B = _symmetric(B, "B")
    b = np.asarray(b, dtype=np.float64).reshape(-1)
    if A.shape != B.shape or A.shape[0] != b.size:
        raise ValueError("A, B and b have inconsistent shapes")
    _PsdInverse(A, "A")  # raises on indefinite A
    B_inv = _PsdInverse(B, "B")
    ok = check_containment(A, B, cfg.eta, exact=exact_check)
    if not ok:
        warnings.warn("containment eta*A <= B <= A looks violated; convergence not guaranteed",
                      RuntimeWarning, stacklevel=2)

    x = np.zeros_like(b)
    r = -b
    norms = [float(np.linalg.norm(r))]
    it = 0
    while it < cfg.max_iters and norms[-1] > cfg.tau:
        x = x - cfg.eta * B_inv(r)
        r = A @ x - b
        it += 1
        norms.append(float(np.linalg.norm(r)))
    return RichardsonResult(x=x, iterations=it, residual_norms=norms, eta=cfg.eta, containment_ok=ok)


def richardson_iteration_bound(c_B: float, eps: float, eta: float, C: float = RICHARDSON_C) -> int:
    """``ceil(C * log(c_B / eps) / eta)``."""
    return max(1, math.ceil(C * math.log(max(c_B, 1.0) / eps) / eta))


def richardson_polynomial_coefficients(eta: float, t: int) -> np.ndarray:
    """Coefficients ``c_m`` with ``x_t = sum_m c_m (B^{-1}A)^m B^{-1} b``.

    ``x_t = eta * sum_{j<t} (I - eta Z)^j B^{-1} b`` with ``Z = B^{-1} A``.
    """
    coeffs = np.zeros(max(t, 1))
    # (1 - eta z)^j expanded binomially, accumulated over j
    for j in range(t):
        m = np.arange(j + 1)
        binom = np.array([math.comb(j, mm) for mm in m], dtype=np.float64)
        coeffs[: j + 1] += eta * binom * (-eta) ** m
    return coeffs[:t] if t > 0 else coeffs[:0]


def evaluate_richardson_polynomial(A, B, b, eta: float, t: int) -> np.ndarray:
    """Evaluate the Richardson iterate ``x_t`` through its polynomial form."""
    B_inv = _PsdInverse(np.asarray(B, dtype=np.float64))
    A = np.asarray(A, dtype=np.float64)
    v = B_inv(np.asarray(b, dtype=np.float64))
    x = np.zeros_like(v)
    for c in richardson_polynomial_coefficients(eta, t):
        x += c * v
        v = B_inv(A @ v)
    return x


class Preconditioner(NamedTuple):
    B: np.ndarray
    eta: float


def build_preconditioner(factor, S, l_W: float, u_W: float, n: float, lam: float = 0.0) -> Preconditioner:
    """Weight-oblivious preconditioner for the systems ``F D_w S S^T D_w F^T + lam I``.

    ``R = l_W * factor`` replaces the row-dependent weight diagonal by its
    uniform lower bound and ``B = (R S S^T R^T + lam I) / log n``, paired with
    ``eta = 1 / (log(n)^2 * u_W / l_W)``.

    Parameters
    ----------
    factor : ndarray, shape (k, m)
        ``V`` for U-steps, or ``U^T`` for V-steps.
    S : ndarray, shape (m, ell)
        The right-acting sketch.
    l_W, u_W : float
        Bounds ``0 < l_W <= |W| <= u_W`` on the weights.
    n : float
        Problem size entering the logarithmic slack; ``log n`` is floored at 1.
    lam : float
        Ridge weight added to the diagonal so ``B`` shares the kernel of the
        regularized system.
    """
    if l_W <= 0:
        raise ValueError("l_W must be positive")
    if u_W < l_W:
        raise ValueError("need l_W <= u_W")
    F = np.asarray(factor, dtype=np.float64)
    S = np.asarray(S, dtype=np.float64)
    if F.shape[1] != S.shape[0]:
        raise ValueError(f"factor {F.shape} and sketch {S.shape} are incompatible")
    log_n = max(math.log(n), 1.0)
    RS = l_W * F @ S
    B = RS @ RS.T
    B[np.diag_indices_from(B)] += lam
    B /= log_n
    B = 0.5 * (B + B.T)
    return Preconditioner(B=B, eta=1.0 / (log_n**2 * (u_W / l_W)))
