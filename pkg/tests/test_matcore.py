from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from toeplitz_tuples.errors import MajorizationFails, NotHermitian, NotIsometricAction, NotPSD, RankMismatch
from toeplitz_tuples.matcore import (
    SubspaceBasis,
    adj,
    as_matrix,
    complete_to_unitary,
    douglas_solve,
    isometry_between_ranges,
    opnorm,
    orthonormal_complement,
    psd_sqrt,
    range_kernel,
    spectral_radius,
    unitarity_defect,
)
from toeplitz_tuples.tuples import random_unitary


def test_psd_sqrt_identity_and_diagonal():
    assert np.allclose(psd_sqrt(np.eye(3)), np.eye(3))
    assert np.allclose(psd_sqrt(np.diag([0.0, 4.0, 9.0])), np.diag([0.0, 2.0, 3.0]))


def test_psd_sqrt_against_eigendecomposition(rng):
    G = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    A = adj(G) @ G
    B = psd_sqrt(A)
    # independent oracle: scipy's matrix square root
    from scipy.linalg import sqrtm

    assert opnorm(B @ B - A) <= 1e-9
    assert opnorm(B - sqrtm(A)) <= 1e-8
    assert opnorm(B - adj(B)) == 0.0


def test_psd_sqrt_clamps_tiny_negative():
    B = psd_sqrt(np.diag([1.0, -1e-14]))
    assert np.allclose(B, np.diag([1.0, 0.0]))


def test_psd_sqrt_errors():
    with pytest.raises(NotPSD):
        psd_sqrt(np.diag([1.0, -0.1]))
    with pytest.raises(NotHermitian):
        psd_sqrt(np.array([[1.0, 1.0], [0.0, 1.0]]))


def test_range_kernel_diagonal_and_zero():
    rng_, ker = range_kernel(np.diag([0.0, 5.0, 0.0]))
    assert rng_.rank == 1 and np.allclose(np.abs(rng_.basis[:, 0]), [0, 1, 0])
    assert ker.rank == 2
    rng_, ker = range_kernel(np.zeros((2, 2)))
    assert rng_.rank == 0 and ker.rank == 2


def test_range_kernel_rank_one(rng):
    u = rng.standard_normal(4) + 1j * rng.standard_normal(4)
    v = rng.standard_normal(3) + 1j * rng.standard_normal(3)
    A = np.outer(u, v.conj())
    R, K = range_kernel(A)
    assert R.rank == 1
    assert abs(abs(np.vdot(R.basis[:, 0], u / np.linalg.norm(u))) - 1) < 1e-12
    assert opnorm(A @ K.basis) <= 1e-12
    assert opnorm(R.projector() @ A - A) <= 1e-12
    assert R.orthonormality_residual() <= 1e-10


def test_douglas_examples():
    assert np.allclose(douglas_solve(np.eye(2), np.eye(2)), np.eye(2))
    B = np.array([[1.0, 2.0], [0.0, 1.0]])
    assert np.allclose(douglas_solve(np.zeros((2, 2)), B), 0)
    C = douglas_solve(np.diag([1.0, 0.0]), np.diag([2.0, 3.0]))
    assert np.allclose(C, np.diag([0.5, 0.0]))


def test_douglas_vanishes_off_range(rng):
    B = np.diag([1.0, 2.0, 0.0]) @ random_unitary(3, rng)
    A = random_unitary(3, rng) @ np.diag([0.5, 1.0, 0.0]) @ B
    C = douglas_solve(A, B)
    assert opnorm(A - C @ B) <= 1e-10 * (1 + opnorm(B))
    P = range_kernel(B)[0].projector()
    assert opnorm(C @ P - C) <= 1e-10
    assert opnorm(C) <= 1 + 1e-9


def test_douglas_majorization_fails():
    with pytest.raises(MajorizationFails):
        douglas_solve(np.eye(2), 0.5 * np.eye(2))


def test_complete_to_unitary_identity_and_swap():
    full = SubspaceBasis.full(3)
    assert np.allclose(complete_to_unitary(full, full, np.eye(3)), np.eye(3))
    e1 = SubspaceBasis(np.array([[1.0], [0.0]], dtype=complex))
    e2 = SubspaceBasis(np.array([[0.0], [1.0]], dtype=complex))
    W = complete_to_unitary(e1, e2, np.eye(1))
    assert unitarity_defect(W) <= 1e-12
    assert np.allclose(W @ [1, 0], [0, 1])
    assert np.allclose(W, [[0, 1], [1, 0]])


def test_complete_to_unitary_errors():
    e1 = SubspaceBasis(np.eye(3, dtype=complex)[:, :1])
    e12 = SubspaceBasis(np.eye(3, dtype=complex)[:, :2])
    with pytest.raises(RankMismatch):
        complete_to_unitary(e1, e12, np.eye(1))
    with pytest.raises(NotIsometricAction):
        complete_to_unitary(e1, e1, 2 * np.eye(1))


def test_complete_to_unitary_is_deterministic(rng):
    F = rng.standard_normal((5, 3)) + 1j * rng.standard_normal((5, 3))
    U0 = random_unitary(5, rng)
    G = U0 @ F
    dom, cod, act = isometry_between_ranges(F, G)
    W1 = complete_to_unitary(dom, cod, act)
    W2 = complete_to_unitary(dom, cod, act)
    assert np.array_equal(W1, W2)
    assert unitarity_defect(W1) <= 1e-9
    assert opnorm(W1 @ F - G) <= 1e-9


def test_scaled_pair_isometry(F2):
    # U(R_1 T_2 h, R_2 h) = (R_1 h, R_2 T_1 h) for the scaled pair with N = I
    T1, T2 = F2
    N = np.eye(3)
    R1 = psd_sqrt(N - adj(T1) @ N @ T1)
    R2 = psd_sqrt(N - adj(T2) @ N @ T2)
    F = np.vstack([R1 @ T2, R2])
    G = np.vstack([R1, R2 @ T1])
    W = complete_to_unitary(*isometry_between_ranges(F, G))
    h = np.random.default_rng(3).standard_normal((3, 20))
    assert opnorm(W @ F @ h - G @ h) / np.linalg.norm(h, axis=0).max() <= 1e-9


def test_orthonormal_complement_spans_rest(rng):
    Q = random_unitary(6, rng)[:, :2]
    C = orthonormal_complement(Q)
    assert C.shape == (6, 4)
    assert unitarity_defect(np.hstack([Q, C])) <= 1e-10


def test_spectral_radius_examples(rng):
    assert spectral_radius(np.diag([0.0, 1.0, 0.0])) == pytest.approx(1.0)
    assert spectral_radius(np.array([[0.0, 1.0], [0.0, 0.0]])) == 0.0
    U = random_unitary(5, rng)
    assert abs(spectral_radius(0.5 * U) - 0.5) <= 1e-9


def test_as_matrix_rejects_nan():
    from toeplitz_tuples.errors import NotFinite

    with pytest.raises(NotFinite):
        as_matrix([[np.nan]])


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 6), st.integers(0, 2**31 - 1))
def test_psd_sqrt_squares_back(n, seed):
    r = np.random.default_rng(seed)
    G = r.standard_normal((n, n)) + 1j * r.standard_normal((n, n))
    A = adj(G) @ G
    B = psd_sqrt(A)
    assert opnorm(B @ B - A) <= 10 * 1e-12 * (1 + opnorm(A))


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 6), st.integers(1, 6), st.integers(0, 2**31 - 1))
def test_range_kernel_properties(m, n, seed):
    r = np.random.default_rng(seed)
    k = int(r.integers(0, min(m, n) + 1))
    A = (r.standard_normal((m, k)) @ r.standard_normal((k, n))) if k else np.zeros((m, n))
    R, K = range_kernel(A)
    assert R.orthonormality_residual() <= 1e-10
    assert K.orthonormality_residual() <= 1e-10
    assert R.rank + K.rank == n
    smax = opnorm(A)
    assert opnorm(A @ K.basis) <= 1e-10 * max(smax, 1e-300) * 10 + 1e-14
