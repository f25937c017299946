from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tdrr.errors import InputError, TooManySlicesError
from tdrr.generators import SdrModelSpec, Seed, gen_sdr
from tdrr.sdr import (
    dee_sir_matrix,
    dee_sir_matrix_unwhitened,
    make_slices,
    sir_matrix,
    slice_mean_matrix,
)


def _brute_dee(x, y):
    """Double loop over (i, j) on the whitened scalar covariate."""
    n = len(x)
    mean = sum(x) / n
    var = sum((v - mean) ** 2 for v in x) / n
    z = [(v - mean) / var**0.5 for v in x]
    total = 0.0
    for j in range(n):
        m = sum(z[i] for i in range(n) if y[i] <= y[j]) / n
        total += m * m
    return total / n


def test_slice_mean_hand_example():
    Z = np.array([-1.5, -0.5, 0.5, 1.5])
    plan = make_slices(np.arange(4.0), 2)
    assert slice_mean_matrix(Z, plan) == pytest.approx(np.array([[1.0]]))


def test_sir_on_hand_example_whitens_first():
    # the same column standardized to unit variance: slice means are -1/sqrt(1.25) and +1/sqrt(1.25)
    t = sir_matrix(np.array([-1.5, -0.5, 0.5, 1.5]), np.arange(4.0), 2)
    assert t.spectrum.values[0] == pytest.approx(0.8)


def test_slices_remainder_goes_to_earliest():
    plan = make_slices(np.arange(23.0), 5)
    assert plan.counts.tolist() == [5, 5, 5, 4, 4]


def test_slices_ties_resolved_by_index():
    y = np.array([1.0, 0.0, 1.0, 0.0, 1.0, 0.0])
    plan = make_slices(y, 2)
    assert plan.members(0).tolist() == [1, 3, 5]
    assert plan.members(1).tolist() == [0, 2, 4]


def test_too_many_slices():
    with pytest.raises(TooManySlicesError):
        make_slices(np.arange(9.0), 5)
    with pytest.raises(InputError):
        make_slices(np.arange(9.0), 1)


def test_sir_with_zero_slice_means_is_zero():
    # every slice is a +/- pair, so each slice mean of the whitened column vanishes
    x = np.array([1.0, -1.0, 2.0, -2.0, 3.0, -3.0])
    y = np.array([0.0, 0.0, 1.0, 1.0, 2.0, 2.0])
    t = sir_matrix(x, y, 3)
    np.testing.assert_allclose(t.matrix, 0.0, atol=1e-15)


def test_dee_constant_response_is_zero(rng):
    t = dee_sir_matrix(rng.standard_normal((20, 3)), np.full(20, 4.0))
    assert np.array_equal(t.matrix, np.zeros((3, 3)))


def test_dee_matches_brute_force_three_points():
    x, y = [0.0, 1.0, 2.0], [1.0, 2.0, 3.0]
    t = dee_sir_matrix(np.array(x), np.array(y))
    # z = (-1.2247, 0, 1.2247); m(1) = -0.4082, m(2) = -0.4082, m(3) = 0
    assert t.matrix[0, 0] == pytest.approx(_brute_dee(x, y), abs=1e-14)
    assert t.matrix[0, 0] == pytest.approx(1.0 / 9.0, abs=1e-14)


def test_dee_matches_brute_force_with_ties(rng):
    x = rng.standard_normal(15)
    y = np.round(rng.standard_normal(15), 1)
    y[3] = y[7] = y[11]
    t = dee_sir_matrix(x, y)
    assert t.matrix[0, 0] == pytest.approx(_brute_dee(list(x), list(y)), rel=1e-12)


def test_dee_two_routes_agree(rng):
    X = rng.standard_normal((120, 4)) @ rng.standard_normal((4, 4))
    y = X[:, 0] + rng.standard_normal(120)
    for weighting in ("none", "binary-sir", "mean-difference"):
        a = dee_sir_matrix(X, y, weighting).matrix
        b = dee_sir_matrix_unwhitened(X, y, weighting)
        np.testing.assert_allclose(a, b, atol=1e-8)


def test_dee_is_symmetric_psd(rng):
    X = rng.standard_normal((80, 6))
    t = dee_sir_matrix(X, np.sin(X[:, 0]) + X[:, 1] ** 2)
    assert np.array_equal(t.matrix, t.matrix.T)
    assert np.linalg.eigvalsh(t.matrix).min() > -1e-15


@pytest.mark.parametrize("H", [2, 3, 5, 10])
def test_sir_rank_bound(rng, H):
    X = rng.standard_normal((100, 8))
    t = sir_matrix(X, X[:, 0] + X[:, 1] ** 2, H)
    nonzero = int(np.sum(t.spectrum.values > 1e-12 * t.spectrum.values[0]))
    assert nonzero <= min(8, H - 1)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_estimators_permutation_invariant(seed):
    r = np.random.default_rng(seed)
    X = r.standard_normal((40, 4))
    y = X[:, 0] ** 2 + r.standard_normal(40)
    perm = r.permutation(40)
    for fn in (lambda a, b: sir_matrix(a, b, 4), dee_sir_matrix):
        np.testing.assert_allclose(fn(X[perm], y[perm]).matrix, fn(X, y).matrix, atol=1e-12)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_spectrum_affine_invariant(seed):
    r = np.random.default_rng(seed)
    X = r.standard_normal((60, 4))
    y = X[:, 0] - X[:, 1] + 0.5 * r.standard_normal(60)
    A = r.standard_normal((4, 4)) + 3.0 * np.eye(4)
    shift = r.standard_normal(4) * 10.0
    for fn in (lambda a, b: sir_matrix(a, b, 5), dee_sir_matrix):
        np.testing.assert_allclose(
            fn(X @ A + shift, y).spectrum.values, fn(X, y).spectrum.values, atol=1e-6
        )


def test_directions_unit_norm_and_recover_index():
    r = np.random.default_rng(1)
    X = r.standard_normal((400, 5))
    y = X[:, 0] + X[:, 1] + 0.1 * r.standard_normal(400)
    B = dee_sir_matrix(X, y).directions(1)
    assert np.linalg.norm(B[:, 0]) == pytest.approx(1.0)
    assert abs(B[:, 0] @ np.array([1, 1, 0, 0, 0]) / np.sqrt(2)) > 0.98


def test_example2_top_two_dominate():
    spec = SdrModelSpec("ex2", n=800, p=10)
    ratios = []
    for r in range(100):
        s = gen_sdr(spec, Seed(7, r))
        vals = sir_matrix(s.X, s.y, 10).spectrum.values
        # "the rest" read as the typical (mean) trailing eigenvalue
        ratios.append(vals[1] / vals[2:].mean())
    assert np.median(ratios) >= 10.0


def test_example1_dominating_eigenvalue():
    spec = SdrModelSpec("ex1", n=800, p=8)
    ratios = []
    for r in range(20):
        s = gen_sdr(spec, Seed(8, r))
        vals = dee_sir_matrix(s.X, s.y).spectrum.values
        ratios.append(vals[0] / vals[3])
    assert np.median(ratios) >= 10.0
