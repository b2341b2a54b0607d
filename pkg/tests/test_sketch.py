import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from regwlra.harness.verify import verify_sketch
from regwlra.sketch import (
    DistortionDiagnostics,
    SketchSpec,
    amm_error,
    distortion_factors,
    gamma_alpha_diagnostics,
    head_tail_split,
    recommended_sketch_size,
    sample_sketch,
)


@pytest.mark.parametrize("kind", ["gaussian", "countsketch"])
def test_same_spec_same_matrix(kind):
    a = sample_sketch(SketchSpec(kind, 7, 42), 30)
    b = sample_sketch(SketchSpec(kind, 7, 42), 30)
    assert a.tobytes() == b.tobytes()
    assert not np.array_equal(a, sample_sketch(SketchSpec(kind, 7, 43), 30))


@pytest.mark.parametrize("kind", ["gaussian", "countsketch"])
def test_columns_depend_only_on_index(kind):
    small = sample_sketch(SketchSpec(kind, 5, 9), 10)
    large = sample_sketch(SketchSpec(kind, 5, 9), 25)
    np.testing.assert_array_equal(large[:, :10], small)


def test_child_specs_are_distinct_and_reproducible():
    spec = SketchSpec("countsketch", 4, 1)
    assert spec.child(0) == spec.child(0)
    assert spec.child(0).seed != spec.child(1).seed


def test_countsketch_one_signed_entry_per_column():
    S = sample_sketch(SketchSpec("countsketch", 6, 3), 500)
    assert np.all(np.count_nonzero(S, axis=0) == 1)
    assert np.all(np.abs(S).sum(axis=0) == 1.0)
    assert set(np.unique(S)) <= {-1.0, 0.0, 1.0}
    # all rows hit and both signs present
    assert np.all(np.abs(S).sum(axis=1) > 0)
    assert (S == 1).sum() > 200 and (S == -1).sum() > 200


def test_gaussian_entry_variance():
    ell = 1000
    col = sample_sketch(SketchSpec("gaussian", ell, 0), 1)[:, 0]
    assert 0.9 / ell <= col.var() <= 1.1 / ell


@pytest.mark.parametrize("kind", ["gaussian", "countsketch"])
def test_unbiased_squared_norm(kind):
    res = verify_sketch(kind, rows=50, trials=1000, seed=0)
    assert abs(res["mean_squared_norm"] - 1.0) <= 0.05


def test_sketch_spec_validation():
    with pytest.raises(ValueError):
        SketchSpec("gaussian", 0)
    with pytest.raises(ValueError):
        SketchSpec("uniform", 3)
    with pytest.raises(ValueError):
        sample_sketch(SketchSpec("gaussian", 3), 0)


def test_recommended_sketch_size_arithmetic():
    assert recommended_sketch_size(2, 0.5) == 22
    assert recommended_sketch_size(0, 0.5) == 6
    assert recommended_sketch_size(3, 0.5, c=1) == math.ceil((3 + math.log(2)) / 0.5)
    with pytest.raises(ValueError):
        recommended_sketch_size(1, 1.5)


def test_distortion_identity_and_scaled_identity():
    M = np.random.default_rng(0).standard_normal((8, 3))
    d1 = distortion_factors(np.eye(8), M)
    assert d1.K == pytest.approx(1.0) and d1.kappa == pytest.approx(1.0)
    d2 = distortion_factors(2 * np.eye(8), M)
    assert d2.K == pytest.approx(4.0) and d2.kappa == pytest.approx(4.0)


def test_undersized_sketch_has_null_direction():
    M = np.random.default_rng(1).standard_normal((20, 4))
    S = sample_sketch(SketchSpec("gaussian", 3, 0), 20)
    d = distortion_factors(S, M)
    assert d.kappa == 0.0 and d.c_S == math.inf


def test_c_S_is_max_of_distortions():
    rng = np.random.default_rng(2)
    M = rng.standard_normal((30, 4))
    for seed in range(10):
        d = distortion_factors(sample_sketch(SketchSpec("gaussian", 12, seed), 30), M)
        assert d.c_S == max(d.K, 1 / d.kappa)


def test_full_size_gaussian_never_singular():
    M = np.random.default_rng(3).standard_normal((10, 10))
    assert all(distortion_factors(sample_sketch(SketchSpec("gaussian", 10, s), 10), M).kappa > 0
               for s in range(100))


def test_distortion_of_zero_matrix_rejected():
    with pytest.raises(ValueError):
        distortion_factors(np.eye(3), np.zeros((3, 2)))


def test_gamma_alpha_identity_sketch():
    rng = np.random.default_rng(4)
    M, b = rng.standard_normal((12, 3)), rng.standard_normal(12)
    diag = gamma_alpha_diagnostics(np.eye(12), M, b, 1.0)
    assert diag.gamma == pytest.approx(0.0, abs=1e-12)
    assert diag.c_h == pytest.approx(1.0)
    assert diag.alpha == pytest.approx(1.0)
    assert diag.alpha == diag.c_h * (1 + diag.gamma)
    assert isinstance(diag.to_dict()["c_S"], float)


def test_head_tail_split():
    rng = np.random.default_rng(5)
    M = rng.standard_normal((9, 3)) * 10
    M_h, M_t, r = head_tail_split(M, 1.0)
    assert r == 3 and np.allclose(M_t, 0)
    D = np.diag([3.0, 1.0, 0.5])
    _, _, r = head_tail_split(D, 1.0)
    assert r == 2  # sigma^2 == lambda goes to the head


def test_alpha_tail_shrinks_with_sketch_size():
    rng = np.random.default_rng(0)
    n = 50
    M = rng.standard_normal((n, 3)) @ np.diag([30.0, 1e-2, 1e-2])
    b = M @ rng.standard_normal(3)

    def tail(ell):
        a = [gamma_alpha_diagnostics(sample_sketch(SketchSpec("gaussian", ell, t), n), M, b, 1.0).alpha
             for t in range(200)]
        return np.mean(np.array(a) > 1.1)

    small, large = tail(400), tail(1600)
    assert large < small


def test_amm_trivial_cases():
    rng = np.random.default_rng(6)
    A, B = rng.standard_normal((10, 3)), rng.standard_normal((10, 2))
    assert amm_error(np.eye(10), A, B) == pytest.approx(0.0, abs=1e-12)
    S = sample_sketch(SketchSpec("gaussian", 4, 0), 10)
    assert amm_error(S, np.zeros((10, 3)), B) == 0.0


def test_amm_unit_column_concentrates():
    e = np.zeros(30)
    e[0] = 1.0
    errs = [amm_error(sample_sketch(SketchSpec("gaussian", 400, t), 30), e, e) for t in range(200)]
    assert np.mean(np.array(errs) < 0.5) >= 0.95


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32), st.integers(1, 15))
def test_K_at_least_kappa(seed, ell):
    rng = np.random.default_rng(seed)
    M = rng.standard_normal((15, 3))
    d = distortion_factors(sample_sketch(SketchSpec("countsketch", ell, seed), 15), M)
    assert isinstance(d, DistortionDiagnostics)
    assert d.K >= d.kappa >= 0
