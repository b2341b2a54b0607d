"""Random sketching operators and the distortion quantities used to analyse them."""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .matrix_core import RANK_RTOL, as_matrix

__all__ = [
    "SketchKind",
    "SketchSpec",
    "DistortionDiagnostics",
    "DEFAULT_SIZE_CONSTANT",
    "sample_sketch",
    "recommended_sketch_size",
    "orthonormal_basis",
    "distortion_factors",
    "gamma_alpha_diagnostics",
    "head_tail_split",
    "amm_error",
    "amm_threshold",
]

# chosen by scripts/calibrate_sketch_constant.py, see README
DEFAULT_SIZE_CONSTANT = 4.0


class SketchKind(str, Enum):
    GAUSSIAN = "gaussian"
    COUNTSKETCH = "countsketch"


@dataclass(frozen=True)
class SketchSpec:
    """Distribution, row count and seed of a sketch.

    The same ``(kind, rows, seed, n)`` always yields the same matrix.
    Column ``j`` depends only on ``(kind, rows, seed, j)``, so a sketch for
    a larger ambient dimension extends a smaller one.
    """

    kind: SketchKind
    rows: int
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "kind", SketchKind(self.kind))
        if int(self.rows) < 1:
            raise ValueError("sketch must have at least one row")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        object.__setattr__(self, "rows", int(self.rows))
        object.__setattr__(self, "seed", int(self.seed))

    def child(self, index: int) -> "SketchSpec":
        """An independent spec derived from this one (for resampling)."""
        seed = np.random.SeedSequence([self.seed, int(index)]).generate_state(1, np.uint64)[0]
        return SketchSpec(self.kind, self.rows, int(seed))


def _bit_generator(seed):
    # Philox is counter based: key = seed, so streams are reproducible
    return np.random.Philox(key=int(seed))


def sample_sketch(spec: SketchSpec, n: int) -> np.ndarray:
    """Realize ``spec`` as a dense ``rows x n`` matrix.

    Gaussian entries have mean 0 and variance ``1/rows``.  CountSketch puts a
    single uniformly signed 1 in a uniformly chosen row of every column.
    """
    if n < 1:
        raise ValueError("ambient dimension must be positive")
    ell = spec.rows
    if spec.kind is SketchKind.GAUSSIAN:
        gen = np.random.Generator(_bit_generator(spec.seed))
        return gen.standard_normal((n, ell)).T / math.sqrt(ell)
    bits = _bit_generator(spec.seed).random_raw(n)
    rows = ((bits >> np.uint64(1)) % np.uint64(ell)).astype(np.intp)
    signs = np.where(bits & np.uint64(1), 1.0, -1.0)
    S = np.zeros((ell, n))
    S[rows, np.arange(n)] = signs
    return S


def recommended_sketch_size(s: float, epsilon: float, c: float = DEFAULT_SIZE_CONSTANT) -> int:
    """``ceil(c * (s + ln(1/epsilon)) / epsilon)``, at least 1."""
    if not 0 < epsilon < 1:
        raise ValueError("epsilon must lie in (0, 1)")
    if s < 0:
        raise ValueError("statistical dimension must be nonnegative")
    return max(1, math.ceil(c * (s + math.log(1.0 / epsilon)) / epsilon))


@dataclass(frozen=True)
class DistortionDiagnostics:
    """Measured distortion of one sketch on one matrix.

    ``K`` and ``kappa`` are the extreme values of ``||S M v||^2 / ||M v||^2``.
    The remaining fields are filled by :func:`gamma_alpha_diagnostics`.
    """

    K: float
    kappa: float
    gamma: float | None = None
    c_h: float | None = None
    alpha: float | None = None
    sigma_max: float | None = None
    head_rank: int | None = None

    @property
    def c_S(self) -> float:
        return max(self.K, 1.0 / self.kappa) if self.kappa > 0 else math.inf

    def to_dict(self) -> dict:
        return {
            "K": self.K,
            "kappa": self.kappa,
            "c_S": self.c_S,
            "gamma": self.gamma,
            "c_h": self.c_h,
            "alpha": self.alpha,
            "sigma_max": self.sigma_max,
            "head_rank": self.head_rank,
        }


def orthonormal_basis(M) -> np.ndarray:
    """Orthonormal basis of the column space of ``M`` (columns)."""
    M = np.asarray(M, dtype=np.float64)
    U, s, _ = np.linalg.svd(M, full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        return U[:, :0]
    r = int(np.sum(s > max(M.shape) * s[0] * RANK_RTOL))
    return U[:, :r]


def _extreme_gains(S, Q):
    """Largest and smallest squared singular value of ``S Q``."""
    sv = np.linalg.svd(S @ Q, compute_uv=False)
    K = float(sv[0] ** 2)
    # a sketch with fewer rows than the subspace dimension has a null direction
    kappa = float(sv[-1] ** 2) if S.shape[0] >= Q.shape[1] else 0.0
    return K, kappa


def distortion_factors(S, M) -> DistortionDiagnostics:
    S = as_matrix(S, "S")
    M = as_matrix(M, "M")
    if S.shape[1] != M.shape[0]:
        raise ValueError(f"sketch has {S.shape[1]} columns but M has {M.shape[0]} rows")
    Q = orthonormal_basis(M)
    if Q.shape[1] == 0:
        raise ValueError("distortion of the zero matrix is undefined")
    K, kappa = _extreme_gains(S, Q)
    return DistortionDiagnostics(K=K, kappa=kappa)


def head_tail_split(M, lam: float):
    """Split ``M = M_h + M_t`` by singular values, ``sigma^2 >= lam`` going to the head."""
    U, s, Vt = np.linalg.svd(np.asarray(M, dtype=np.float64), full_matrices=False)
    head = s**2 >= lam
    if s.size and s[0] > 0:
        head &= s > max(np.shape(M)) * s[0] * RANK_RTOL
    else:
        head[:] = False
    M_h = (U[:, head] * s[head]) @ Vt[head]
    return M_h, np.asarray(M) - M_h, int(head.sum())


def gamma_alpha_diagnostics(S, M, b, lam: float) -> DistortionDiagnostics:
    """Distortion diagnostics of a sketch on one ridge problem ``(M, b, lam)``.

    Gamma is the spectral deviation from identity of the sketched Gram of an
    orthonormal basis of ``[M; sqrt(lam) I | b; 0]`` under ``blockdiag(S, I)``.
    ``c_h`` is the conditioning of ``S`` on ``[M_h, b]``, where ``M_h`` keeps the
    singular directions with ``sigma^2 >= lam``; ``alpha = c_h (1 + Gamma)``.
    """
    if lam <= 0:
        raise ValueError("lambda must be positive for the head/tail split")
    S = as_matrix(S, "S")
    M = as_matrix(M, "M")
    b = np.asarray(b, dtype=np.float64).reshape(-1)
    n, k = M.shape
    if S.shape[1] != n or b.size != n:
        raise ValueError("S, M and b have inconsistent shapes")

    M_hat = np.vstack([M, math.sqrt(lam) * np.eye(k)])
    b_hat = np.concatenate([b, np.zeros(k)])
    U_b = orthonormal_basis(np.column_stack([M_hat, b_hat]))
    SU = np.vstack([S @ U_b[:n], U_b[n:]])
    dev = SU.T @ SU - np.eye(U_b.shape[1])
    gamma = float(np.linalg.svd(dev, compute_uv=False)[0])

    M_h, _, head_rank = head_tail_split(M, lam)
    Q = orthonormal_basis(np.column_stack([M_h, b]))
    if Q.shape[1] == 0:
        K = kappa = 1.0
    else:
        K, kappa = _extreme_gains(S, Q)
    c_h = max(K, 1.0 / kappa) if kappa > 0 else math.inf
    sigma_max = float(np.linalg.svd(M, compute_uv=False)[0])
    return DistortionDiagnostics(
        K=K,
        kappa=kappa,
        gamma=gamma,
        c_h=c_h,
        alpha=c_h * (1.0 + gamma),
        sigma_max=sigma_max,
        head_rank=head_rank,
    )


def amm_error(S, A, B) -> float:
    """Spectral norm of ``A^T S^T S B - A^T B``."""
    S = np.asarray(S, dtype=np.float64)
    A = np.asarray(A, dtype=np.float64)
    B = np.asarray(B, dtype=np.float64)
    if A.ndim == 1:
        A = A[:, None]
    if B.ndim == 1:
        B = B[:, None]
    if A.shape[0] != B.shape[0] or S.shape[1] != A.shape[0]:
        raise ValueError(f"incompatible shapes S {S.shape}, A {A.shape}, B {B.shape}")
    E = (S @ A).T @ (S @ B) - A.T @ B
    return float(np.linalg.norm(E, 2))


def amm_threshold(A, B, gamma: float, K: float) -> float:
    """``gamma * sqrt((||A||^2 + ||A||_F^2/K) (||B||^2 + ||B||_F^2/K))``."""
    A = np.atleast_2d(np.asarray(A, dtype=np.float64))
    B = np.atleast_2d(np.asarray(B, dtype=np.float64))
    a = np.linalg.norm(A, 2) ** 2 + np.sum(A**2) / K
    b = np.linalg.norm(B, 2) ** 2 + np.sum(B**2) / K
    return float(gamma * math.sqrt(a * b))
