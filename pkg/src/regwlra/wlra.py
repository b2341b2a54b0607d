"""Regularized weighted low rank approximation by (sketched) alternating minimization.

Row ``i`` of ``U`` is the solution of a ridge problem with design
``(V D_{W_i} S')^T`` and target ``S'^T D_{W_i} A_i^T``; columns of ``V``
are symmetric.  All ``n`` (or ``d``) problems of a half-step are solved in
one batched call.
"""
from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field, asdict
from enum import Enum

import numpy as np

from .matrix_core import (
    Factorization,
    WlraProblem,
    numerical_rank,
    statistical_dimension,
    weighted_objective,
)
from .ridge import build_preconditioner, solve_ridge_batch
from .sketch import SketchSpec, orthonormal_basis, recommended_sketch_size, sample_sketch

__all__ = [
    "Solver",
    "AmConfig",
    "SolveReport",
    "RoundedWeights",
    "RankReduction",
    "best_response_U",
    "best_response_V",
    "sketched_objective_U",
    "sketched_objective_V",
    "initialize_factors",
    "estimate_sd",
    "auto_sketch_rows",
    "alternating_minimization",
    "svd_baseline",
    "rank_reduce_projection",
    "rank_reduced_factorization",
    "balanced_factorization",
    "round_weight_factors",
]

log = logging.getLogger(__name__)


class Solver(str, Enum):
    DIRECT = "direct"
    RICHARDSON = "richardson"
    PRECOND = "precond"


@dataclass(frozen=True)
class AmConfig:
    """Settings for :func:`alternating_minimization`.

    ``sketch_u`` realizes ``S'`` (d columns, applied on the right in U-steps);
    ``sketch_v`` realizes ``S''`` (n columns, applied on the left in V-steps).
    Both are sampled once unless ``resample`` is set.
    """

    iterations: int = 25
    sketch_u: SketchSpec | None = None
    sketch_v: SketchSpec | None = None
    init_seed: int = 0
    solver: Solver = Solver.DIRECT
    resample: bool = False
    richardson_iters: int = 2000
    tau: float = 1e-8
    track_sd: bool = True
    sd_samples: int = 8

    def __post_init__(self):
        object.__setattr__(self, "solver", Solver(self.solver))
        if self.iterations < 0:
            raise ValueError("iterations must be nonnegative")

    @property
    def sketched(self) -> bool:
        return self.sketch_u is not None or self.sketch_v is not None


@dataclass
class SolveReport:
    objective_trace: list = field(default_factory=list)
    step_seconds: list = field(default_factory=list)
    total_seconds: float = 0.0
    sd_estimates: list = field(default_factory=list)
    regularization_share: float = 0.0
    sketch_rows_u: int | None = None
    sketch_rows_v: int | None = None
    solver: str = "direct"

    def to_dict(self) -> dict:
        return asdict(self)


def _row_responses(A, W, V, lam, S=None, solver=Solver.DIRECT, richardson_iters=2000, tau=1e-8,
                   x0=None):
    """``U`` minimizing ``sum_i ||(U_i V - A_i) D_{W_i} S||^2 + lam ||U_i||^2``.

    ``S`` (d x t) defaults to the identity.  Row-wise products such as
    ``V D_{W_i} S`` are formed for all rows at once as ``W @ KR`` with a
    Khatri-Rao style matrix ``KR``, which avoids an ``n x k x d`` temporary.
    """
    n, d = A.shape
    k = V.shape[0]
    if V.shape[1] != d:
        raise ValueError(f"factor of shape {V.shape} does not match {d} columns")
    if S is None:
        # G_i = V D_{W_i}^2 V^T, rhs_i = V D_{W_i}^2 A_i^T
        W2 = W * W
        KR = (V[:, None, :] * V[None, :, :]).reshape(k * k, d)
        G = (W2 @ KR.T).reshape(n, k, k)
        rhs = (W2 * A) @ V.T
        P = c = None
    else:
        if S.shape[0] != d:
            raise ValueError(f"sketch has {S.shape[0]} rows, expected {d}")
        t = S.shape[1]
        # P_i = V D_{W_i} S, c_i = A_i D_{W_i} S
        KR = (V.T[:, :, None] * S[:, None, :]).reshape(d, k * t)
        P = (W @ KR).reshape(n, k, t)
        c = (W * A) @ S
        G = rhs = None

    if solver is Solver.DIRECT:
        if P is not None and lam > 0:
            return solve_ridge_batch(P.transpose(0, 2, 1), c, lam)
        if P is not None:
            G = np.matmul(P, P.transpose(0, 2, 1))
            rhs = np.matmul(P, c[:, :, None])[:, :, 0]
        if lam > 0:
            G[:, np.arange(k), np.arange(k)] += lam
            return np.linalg.solve(G, rhs[:, :, None])[:, :, 0]
        return np.matmul(np.linalg.pinv(G, hermitian=True), rhs[:, :, None])[:, :, 0]

    if lam <= 0:
        raise ValueError("Richardson solvers need lambda > 0")
    if P is not None:
        G = np.matmul(P, P.transpose(0, 2, 1))
        rhs = np.matmul(P, c[:, :, None])[:, :, 0]
    G[:, np.arange(k), np.arange(k)] += lam
    return _richardson_rows(G, rhs, V, W, lam, S, solver, richardson_iters, tau, x0)


def _richardson_rows(G, rhs, V, W, lam, S, solver, max_iters, tau, x0=None):
    """Iterative row solves, warm-started at ``x0`` so each one can only
    lower its own ridge objective."""
    n, k, _ = G.shape
    if solver is Solver.RICHARDSON:
        # B = lam I and eta_i = lam / L_i with L_i = trace(G_i) >= lambda_max(G_i)
        step = (1.0 / np.trace(G, axis1=1, axis2=2))[:, None]

        def precond(r):
            return step * r
    else:
        positive = W[W > 0]
        l_W = float(positive.min()) if positive.size else 1.0
        S_eff = np.eye(V.shape[1]) if S is None else S
        pc = build_preconditioner(V, S_eff, l_W, float(W.max()), n, lam)
        B_inv = np.linalg.inv(pc.B)
        # the nominal eta only certifies eta*G <= B when u_W/l_W <= log n,
        # so cap each row's step at 1/lambda_max(B^{-1} G_i)
        L_inv = np.linalg.inv(np.linalg.cholesky(pc.B))
        top = np.linalg.eigvalsh(L_inv @ G @ L_inv.T)[:, -1]
        step = np.minimum(pc.eta, 1.0 / top)[:, None]

        def precond(r):
            return step * (r @ B_inv)

    x = np.zeros((n, k)) if x0 is None else np.array(x0, dtype=np.float64)
    for _ in range(max_iters):
        r = np.matmul(G, x[:, :, None])[:, :, 0] - rhs
        if np.max(np.linalg.norm(r, axis=1)) <= tau / n:
            break
        x = x - precond(r)
    return x


def best_response_U(problem: WlraProblem, V, sketch=None, **solver_kw) -> np.ndarray:
    """Best ``U`` for fixed ``V``; ``sketch`` is a realized ``d x t`` matrix ``S'``.

    Iterative solvers accept ``x0``, an ``n x k`` starting point.
    """
    V = np.asarray(V, dtype=np.float64)
    if V.ndim != 2:
        raise ValueError("V must be 2-D")
    return _row_responses(problem.A, problem.W, V, problem.lam, sketch, **solver_kw)


def best_response_V(problem: WlraProblem, U, sketch=None, **solver_kw) -> np.ndarray:
    """Best ``V`` for fixed ``U``; ``sketch`` is a realized ``t x n`` matrix ``S''``."""
    U = np.asarray(U, dtype=np.float64)
    if U.ndim != 2 or U.shape[0] != problem.shape[0]:
        raise ValueError(f"U of shape {np.shape(U)} does not match {problem.shape[0]} rows")
    S = None if sketch is None else np.asarray(sketch, dtype=np.float64).T
    if solver_kw.get("x0") is not None:
        solver_kw = {**solver_kw, "x0": np.asarray(solver_kw["x0"]).T}
    return _row_responses(problem.A.T, problem.W.T, U.T, problem.lam, S, **solver_kw).T


def sketched_objective_U(problem: WlraProblem, F: Factorization, S) -> float:
    """``sum_i ||(U_i V - A_i) D_{W_i} S'||^2`` plus both regularizers."""
    R = (problem.W * (F.U @ F.V - problem.A)) @ S
    return float(np.sum(R**2) + problem.lam * (np.sum(F.U**2) + np.sum(F.V**2)))


def sketched_objective_V(problem: WlraProblem, F: Factorization, S) -> float:
    """``sum_j ||S'' D_{W_j} (U V_j - A_j)||^2`` plus both regularizers."""
    R = S @ (problem.W * (F.U @ F.V - problem.A))
    return float(np.sum(R**2) + problem.lam * (np.sum(F.U**2) + np.sum(F.V**2)))


def initialize_factors(problem: WlraProblem, seed: int):
    """``U`` = random columns of ``A``, ``V`` = random rows, drawn without replacement."""
    n, d = problem.shape
    k = problem.k
    rng = np.random.default_rng(seed)
    cols = rng.choice(d, size=k, replace=False)
    rows = rng.choice(n, size=k, replace=False)
    return problem.A[:, cols].copy(), problem.A[rows, :].copy()


def estimate_sd(problem: WlraProblem, U, V, samples: int = 8, seed: int = 0) -> float:
    """Max of ``sd(V D_{W_i})`` and ``sd(D_{W_j} U)`` over sampled rows and columns."""
    n, d = problem.shape
    rng = np.random.default_rng(seed)
    rows = rng.choice(n, size=min(samples, n), replace=False)
    cols = rng.choice(d, size=min(samples, d), replace=False)
    lam = problem.lam
    s = 0.0
    for i in rows:
        s = max(s, statistical_dimension(V * problem.W[i][None, :], lam))
    for j in cols:
        s = max(s, statistical_dimension(problem.W[:, j][:, None] * U, lam))
    return s


def auto_sketch_rows(problem: WlraProblem, seed: int = 0, c: float | None = None) -> int:
    """Sketch size from the statistical dimension estimated at initialization."""
    U, V = initialize_factors(problem, seed)
    s = estimate_sd(problem, U, V)
    kw = {} if c is None else {"c": c}
    return recommended_sketch_size(s, problem.epsilon, **kw)


def alternating_minimization(problem: WlraProblem, cfg: AmConfig = AmConfig(), init=None):
    """Run ``cfg.iterations`` rounds of U-step then V-step.

    Returns
    -------
    Factorization
        Final factors with cached objective.
    SolveReport
        Objective after initialization and after every round, per-round
        wall-clock seconds (updates only), statistical-dimension estimates.
    """
    n, d = problem.shape
    if init is None:
        U, V = initialize_factors(problem, cfg.init_seed)
    else:
        U, V = (np.array(x, dtype=np.float64) for x in init)

    def realize(i):
        Su = Sv = None
        if cfg.sketch_u is not None:
            spec = cfg.sketch_u.child(i) if cfg.resample else cfg.sketch_u
            Su = sample_sketch(spec, d).T
        if cfg.sketch_v is not None:
            spec = cfg.sketch_v.child(i) if cfg.resample else cfg.sketch_v
            Sv = sample_sketch(spec, n)
        return Su, Sv

    solver_kw = dict(solver=cfg.solver, richardson_iters=cfg.richardson_iters, tau=cfg.tau)
    report = SolveReport(
        sketch_rows_u=None if cfg.sketch_u is None else cfg.sketch_u.rows,
        sketch_rows_v=None if cfg.sketch_v is None else cfg.sketch_v.rows,
        solver=cfg.solver.value,
    )
    report.objective_trace.append(weighted_objective(problem, Factorization(U, V)))
    if cfg.track_sd:
        report.sd_estimates.append(estimate_sd(problem, U, V, cfg.sd_samples, cfg.init_seed))

    Su, Sv = realize(0)
    for it in range(cfg.iterations):
        if cfg.resample and it > 0:
            Su, Sv = realize(it)
        t0 = time.perf_counter()
        warm = cfg.solver is not Solver.DIRECT
        U = best_response_U(problem, V, Su, x0=U if warm else None, **solver_kw)
        V = best_response_V(problem, U, Sv, x0=V if warm else None, **solver_kw)
        report.step_seconds.append(time.perf_counter() - t0)
        report.objective_trace.append(weighted_objective(problem, Factorization(U, V)))
        if cfg.track_sd:
            report.sd_estimates.append(estimate_sd(problem, U, V, cfg.sd_samples, cfg.init_seed + it + 1))
        log.debug("iteration %d objective %.6g", it, report.objective_trace[-1])

    report.total_seconds = float(sum(report.step_seconds))
    final = report.objective_trace[-1]
    reg = problem.lam * (np.sum(U**2) + np.sum(V**2))
    report.regularization_share = float(reg / final) if final > 0 else 0.0
    return Factorization(U, V, final), report


def svd_baseline(A, k: int) -> Factorization:
    """Best unweighted rank-``k`` approximation: ``U = U_k Sigma_k``, ``V = V_k^T``."""
    A = np.asarray(A, dtype=np.float64)
    if not 1 <= k <= min(A.shape):
        raise ValueError(f"k must lie in [1, {min(A.shape)}]")
    Ul, s, Vt = np.linalg.svd(A, full_matrices=False)
    return Factorization(Ul[:, :k] * s[:k], Vt[:k])


@dataclass(frozen=True)
class RankReduction:
    P: np.ndarray
    k_prime: int
    weight_rank: int


def rank_reduce_projection(W, Spp) -> RankReduction:
    """Projection onto the joint row space of ``S'' D_{Y_t}``, ``t = 1..r``.

    ``W = Y Z`` is the rank-``r`` SVD factorization.  Every ``S'' D_{W_j}`` is
    a combination of these ``r`` blocks, so ``S'' D_{W_j} P = S'' D_{W_j}``.
    """
    W = np.asarray(W, dtype=np.float64)
    Spp = np.asarray(Spp, dtype=np.float64)
    n = W.shape[0]
    if Spp.shape[1] != n:
        raise ValueError(f"S'' has {Spp.shape[1]} columns, expected {n}")
    r = numerical_rank(W)
    Ul, s, _ = np.linalg.svd(W, full_matrices=False)
    Y = Ul[:, :r] * s[:r]
    blocks = np.vstack([Spp * Y[:, t][None, :] for t in range(r)])
    Q = orthonormal_basis(blocks.T)
    return RankReduction(P=Q @ Q.T, k_prime=Q.shape[1], weight_rank=r)


def balanced_factorization(X, rank: int) -> Factorization:
    """Rank-``rank`` factors of ``X`` minimizing ``||U||_F^2 + ||V||_F^2``.

    The minimum is twice the nuclear norm, reached by splitting the
    singular values evenly between the two sides.
    """
    Ul, s, Vt = np.linalg.svd(np.asarray(X, dtype=np.float64), full_matrices=False)
    root = np.sqrt(s[:rank])
    return Factorization(Ul[:, :rank] * root, root[:, None] * Vt[:rank])


def rank_reduced_factorization(problem: WlraProblem, U, Spp, reduction: RankReduction | None = None):
    """Rank-``k'`` factorization with the data fit of ``(U, V~)``, ``V~`` the sketched V-step.

    Every column of ``V~`` lies in ``U^T range(P)``, so ``U V~ = (U U^T Q)(Q^T Z)``
    with ``Q`` an orthonormal basis of ``range(P)``.  The product is then
    re-split evenly, which can only lower the regularizer.

    Returns
    -------
    Factorization
        Rank ``k'`` factors, objective cached.
    ndarray
        ``V~``, the sketched best response to ``U``.
    RankReduction
    """
    U = np.asarray(U, dtype=np.float64)
    Spp = np.asarray(Spp, dtype=np.float64)
    rr = reduction if reduction is not None else rank_reduce_projection(problem.W, Spp)
    V_tilde = best_response_V(problem, U, Spp)
    Q = orthonormal_basis(rr.P)
    lam = problem.lam
    Z = np.empty((problem.shape[0], problem.shape[1]))
    for j in range(problem.shape[1]):
        R = Spp * problem.W[:, j][None, :]  # S'' D_{W_j}
        Qj = R @ U
        G = Qj @ Qj.T
        G[np.diag_indices_from(G)] += lam
        Z[:, j] = R.T @ np.linalg.solve(G, R @ problem.A[:, j])
    U_red = U @ (U.T @ Q)
    V_red = Q.T @ Z
    F = balanced_factorization(U_red @ V_red, rr.k_prime)
    return F.with_objective(problem), V_tilde, rr


@dataclass(frozen=True)
class RoundedWeights:
    Yp: np.ndarray
    Zp: np.ndarray
    Wp: np.ndarray
    epsilon: float
    distinct_rows: int
    distinct_cols: int


def _round_to_powers(X, base):
    out = np.zeros_like(X)
    pos = X > 0
    expo = np.rint(np.log(X[pos]) / math.log(base))
    out[pos] = base**expo
    return out


def round_weight_factors(Y, Z, epsilon: float) -> RoundedWeights:
    """Round nonnegative ``Y, Z`` entrywise to the nearest power of ``1 + epsilon``.

    Nearness is measured in log scale; zeros stay zero.  Raises
    ``RuntimeError`` if ``(1-eps)^2 W <= Y'Z' <= (1+eps)^2 W`` fails.
    """
    Y = np.asarray(Y, dtype=np.float64)
    Z = np.asarray(Z, dtype=np.float64)
    if not 0 < epsilon < 1:
        raise ValueError("epsilon must lie in (0, 1)")
    if np.any(Y < 0) or np.any(Z < 0):
        raise ValueError("factors must be entrywise nonnegative")
    base = 1.0 + epsilon
    Yp = _round_to_powers(Y, base)
    Zp = _round_to_powers(Z, base)
    W = Y @ Z
    Wp = Yp @ Zp
    if not (np.all((1 - epsilon) ** 2 * W <= Wp) and np.all(Wp <= (1 + epsilon) ** 2 * W)):
        raise RuntimeError("rounded weights escaped the (1 +/- eps)^2 sandwich")
    return RoundedWeights(
        Yp=Yp,
        Zp=Zp,
        Wp=Wp,
        epsilon=epsilon,
        distinct_rows=int(np.unique(Wp, axis=0).shape[0]),
        distinct_cols=int(np.unique(Wp, axis=1).shape[1]),
    )
