from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import diagonal_tuple, monotone_operator
from toeplitz_tuples.errors import NotHermitian, NotMonotone
from toeplitz_tuples.matcore import opnorm
from toeplitz_tuples.toeplitz import compute_qt, toeplitz_residual
from toeplitz_tuples.tuples import random_unitary, validate
from toeplitz_tuples.updown import classify, decompose, tail_profile, upper_cone_report, upper_cone_trivial


def test_classify_examples(F1, F2):
    assert classify(np.eye(3), F2) == "pure_lower_positive"
    assert classify(-np.eye(3), F2) == "upper"
    assert classify(np.diag([0, 5, 0]), F1) == "toeplitz"
    # T_1* X T_1 - X = diag(-3/4, 0, 1) has both signs
    assert classify(np.diag([1.0, 0.0, -1.0]), F2) == "none"


def test_classify_lower_not_pure():
    # T = I + contraction block: the unitary part keeps the tail from vanishing
    T = validate([np.diag([1.0, 0.5]), np.diag([1.0, 0.5])])
    assert classify(np.eye(2), T) == "lower"
    assert classify(np.diag([0.0, 1.0]), T) == "pure_lower_positive"


def test_classify_rejects_non_hermitian(F2):
    with pytest.raises(NotHermitian):
        classify(np.triu(np.ones((3, 3))), F2)


def test_decompose_scaled_pair(F2):
    dec = decompose(np.eye(3), F2)
    assert dec.orientation == "lower"
    assert opnorm(dec.U) <= 1e-12
    assert np.allclose(dec.N, np.eye(3))
    assert dec.tail_depth > 0
    dec = decompose(-np.eye(3), F2)
    assert dec.orientation == "upper"
    assert opnorm(dec.U) <= 1e-12 and np.allclose(dec.N, np.eye(3))


def test_decompose_toeplitz_input(F1):
    X = np.diag([0.0, 2.0, 0.0])
    dec = decompose(X, F1)
    assert np.array_equal(dec.U, X) and opnorm(dec.N) == 0.0


def test_decompose_rejects_mixed(F2):
    with pytest.raises(NotMonotone):
        decompose(np.diag([1.0, 0.0, -1.0]), F2)


def test_tail_profile_plateau():
    T = validate([np.eye(2), np.eye(2)])
    k, val = tail_profile(np.eye(2), T)
    assert k is None and val == pytest.approx(1.0)
    T = validate([0.5 * np.eye(2), np.eye(2)])
    k, _ = tail_profile(np.eye(2), T)
    # 0.25^k <= 1e-7 first at k = 12
    assert k == 12


def test_upper_cone(F1, F2):
    # P = diag(0, 1/2, 0) for the scaled pair
    assert upper_cone_trivial(F2)
    rep = upper_cone_report(F1)
    assert not rep["trivial"]
    assert np.allclose(rep["witness"], np.diag([0, 1, 0]))
    assert rep["witness_upper_min_eig"] >= -1e-12
    pure = validate([0.5 * np.eye(2), np.eye(2)])
    assert upper_cone_trivial(pure) and upper_cone_report(pure)["witness"] is None


@pytest.mark.parametrize("orientation", ["upper", "lower"])
def test_decompose_recovers_known_parts(orientation):
    for seed in range(10):
        T, X, U0, N0 = monotone_operator(seed, orientation)
        dec = decompose(X, T)
        assert opnorm(dec.U - U0) <= 1e-8
        assert opnorm(dec.N - N0) <= 1e-8
        assert opnorm(X - dec.recombine()) <= 1e-9
        assert toeplitz_residual(dec.U, T, T) <= 1e-8


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 100_000), st.integers(2, 6))
def test_tail_criterion_matches_qt(seed, dim):
    # for N = I the tail vanishes exactly when Q_T = 0
    T, *_ = diagonal_tuple(dim, 2, np.random.default_rng(seed), p_unit=0.3)
    label = classify(np.eye(dim), T)
    assert (label == "pure_lower_positive") == (opnorm(compute_qt(T)) <= 1e-8)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 100_000), st.sampled_from(["upper", "lower"]))
def test_decomposition_unique_across_tolerances(seed, orientation):
    T, X, _, _ = monotone_operator(seed, orientation, dim=5)
    a = decompose(X, T, tol=1e-12)
    b = decompose(X, T, tol=1e-10)
    assert opnorm(a.U - b.U) <= 1e-6 and opnorm(a.N - b.N) <= 1e-6


def test_classification_is_unitarily_invariant(F2):
    W = random_unitary(3, np.random.default_rng(0))
    T = validate([W @ A @ W.conj().T for A in F2])
    assert classify(np.eye(3), T) == "pure_lower_positive"
    assert classify(-np.eye(3), T) == "upper"
