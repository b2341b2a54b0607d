"""Synthetic data: low statistical dimension matrices, weight profiles, ridge ensembles."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy.optimize import brentq

from ..matrix_core import statistical_dimension
from ..ridge import RidgeProblem

__all__ = [
    "ProfileKind",
    "WeightProfile",
    "DENSE_PROFILE",
    "BINARY_PROFILE",
    "gen_synthetic",
    "gen_weights",
    "random_orthonormal",
    "ridge_ensemble",
]

DOMINANT_SINGULAR_VALUE = 1e4


def random_orthonormal(rng, n, m):
    """``n x m`` matrix with orthonormal columns, Haar distributed."""
    Q, R = np.linalg.qr(rng.standard_normal((n, m)))
    return Q * np.sign(np.diag(R))


def gen_synthetic(n: int, d: int, sd_target: float, lam: float = 1.0, seed: int = 0) -> np.ndarray:
    """``A = Q diag(sigma) R^T`` with one singular value of 1e4 and a flat small tail.

    The tail level is solved for so that ``statistical_dimension(A, lam)``
    equals ``sd_target``.
    """
    m = min(n, d)
    if lam <= 0:
        raise ValueError("lambda must be positive")
    if sd_target < 1:
        raise ValueError("sd_target must be at least 1")
    if sd_target >= m:
        raise ValueError(f"sd_target {sd_target} not attainable with min(n, d) = {m}")
    s1 = DOMINANT_SINGULAR_VALUE
    head = s1**2 / (s1**2 + lam)
    x = max(sd_target - head, 0.0) / (m - 1) if m > 1 else 0.0
    tail = math.sqrt(lam * x / (1.0 - x))
    sigma = np.full(m, tail)
    sigma[0] = s1
    rng = np.random.default_rng(seed)
    Q = random_orthonormal(rng, n, m)
    R = random_orthonormal(rng, d, m)
    return (Q * sigma) @ R.T


class ProfileKind(str, Enum):
    DENSE = "dense"
    BINARY = "binary"
    UNIFORM = "uniform"
    CUSTOM = "custom"


@dataclass(frozen=True)
class WeightProfile:
    """Distribution of i.i.d. weight entries."""

    kind: ProfileKind
    values: tuple = ()
    probs: tuple = ()

    def __post_init__(self):
        kind = ProfileKind(self.kind)
        object.__setattr__(self, "kind", kind)
        if kind is ProfileKind.DENSE:
            values, probs = (1.0, 0.1, 0.01), (0.8, 0.15, 0.05)
        elif kind is ProfileKind.BINARY:
            values, probs = (1.0, 0.0), (0.9, 0.1)
        elif kind is ProfileKind.UNIFORM:
            values, probs = (tuple(self.values) or (1.0,))[:1], (1.0,)
        else:
            values, probs = tuple(self.values), tuple(self.probs)
        if len(values) == 0 or len(values) != len(probs):
            raise ValueError("values and probabilities must be non-empty and aligned")
        if any(v < 0 for v in values) or any(p < 0 for p in probs):
            raise ValueError("weights and probabilities must be nonnegative")
        if not math.isclose(sum(probs), 1.0, abs_tol=1e-9):
            raise ValueError("probabilities must sum to 1")
        object.__setattr__(self, "values", tuple(float(v) for v in values))
        object.__setattr__(self, "probs", tuple(float(p) for p in probs))


DENSE_PROFILE = WeightProfile(ProfileKind.DENSE)
BINARY_PROFILE = WeightProfile(ProfileKind.BINARY)


def gen_weights(n: int, d: int, profile: WeightProfile = DENSE_PROFILE, seed: int = 0) -> np.ndarray:
    rng = np.random.default_rng(seed)
    idx = rng.choice(len(profile.values), size=(n, d), p=np.array(profile.probs))
    return np.asarray(profile.values)[idx]


def _spectrum_designs(rng, n, d, k, head):
    """``d`` designs ``Q diag(g) R^T`` with ``head`` strong directions, unit-free."""
    designs = []
    for _ in range(d):
        g = np.empty(k)
        g[:head] = 10.0 ** rng.uniform(1.5, 2.5, size=head)
        g[head:] = 10.0 ** rng.uniform(-3.0, -2.0, size=k - head)
        g *= rng.uniform(0.5, 1.5)
        designs.append((random_orthonormal(rng, n, k) * np.sqrt(g)) @ random_orthonormal(rng, k, k).T)
    return designs


def ridge_ensemble(n: int, d: int, k: int, sd_target: float, seed: int = 0, noise: float = 0.5,
                   lam: float | None = None):
    """``d`` ridge problems sharing ``lam``, tuned so ``max_i sd_lam(M_i) = sd_target``.

    Each design has ``ceil(sd_target)`` dominant singular directions and a
    weak tail.  Targets are ``M x0 + z`` with the noise energy ``noise``
    times the signal energy.  Passing ``lam`` skips the tuning.
    """
    if not 0 < sd_target < k:
        raise ValueError("sd_target must lie in (0, k)")
    rng = np.random.default_rng(seed)
    head = math.ceil(sd_target)
    designs = _spectrum_designs(rng, n, d, k, head)

    def excess(log_lam):
        lam = math.exp(log_lam)
        return max(statistical_dimension(M, lam) for M in designs) - sd_target

    if lam is None:
        lam = math.exp(brentq(excess, -30.0, 30.0, xtol=1e-12))
    problems = []
    for M in designs:
        x0 = rng.standard_normal(k)
        signal = M @ x0
        z = rng.standard_normal(n)
        z *= math.sqrt(noise) * np.linalg.norm(signal) / np.linalg.norm(z)
        problems.append(RidgeProblem(M, signal + z, lam))
    return problems, lam
