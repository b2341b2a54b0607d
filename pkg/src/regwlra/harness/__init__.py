"""Datasets, the benchmark protocol and the verification suites."""
from .datasets import (
    BINARY_PROFILE,
    DENSE_PROFILE,
    ProfileKind,
    WeightProfile,
    gen_synthetic,
    gen_weights,
    ridge_ensemble,
)
from .verify import SUITES, verify_suite

__all__ = [
    "BINARY_PROFILE",
    "DENSE_PROFILE",
    "ProfileKind",
    "WeightProfile",
    "gen_synthetic",
    "gen_weights",
    "ridge_ensemble",
    "SUITES",
    "verify_suite",
]
