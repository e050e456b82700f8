"""Generators with known answers, shared by the unit and acceptance tests."""

from __future__ import annotations

import numpy as np

from toeplitz_tuples.matcore import adj, opnorm
from toeplitz_tuples.toeplitz import compute_qt, solution_space
from toeplitz_tuples.tuples import OperatorTuple, random_unitary, validate


def diagonal_tuple(dim: int, n: int, rng, p_unit: float = 0.5, r_max: float = 0.9, order: int = 4):
    """Joint-diagonal tuple in a random orthonormal basis.

    Each joint eigenvector is unitary with probability ``p_unit`` (phases
    from the roots of unity of ``order``); otherwise every entry has modulus
    at most ``r_max``.  Returns the tuple, the eigenvalue array (dim x n),
    the mask of unitary indices and the basis change W.
    """
    lam = np.empty((dim, n), dtype=complex)
    unit = rng.random(dim) < p_unit
    for j in range(dim):
        if unit[j]:
            lam[j] = np.exp(2j * np.pi * rng.integers(order, size=n) / order)
        else:
            lam[j] = r_max * rng.random(n) * np.exp(2j * np.pi * rng.random(n))
    W = random_unitary(dim, rng)
    ops = [W @ np.diag(lam[:, i]) @ adj(W) for i in range(n)]
    return validate(ops, tol_commute=1e-12, tol_contract=1e-12), lam, unit, W


def monotone_operator(seed: int, orientation: str, dim: int = 6, n: int = 2):
    """X = U0 - N0 (upper) or U0 + N0 (lower) with U0 Toeplitz and N0 pure.

    U0 is a random Hermitian combination of the Toeplitz basis; N0 is
    diagonal in the joint eigenbasis with zero weight on unitary indices, so
    P^{*k} N0 P^k -> 0 and T_i* N0 T_i <= N0.
    """
    rng = np.random.default_rng(seed)
    T, lam, unit, W = diagonal_tuple(dim, n, rng)
    nu = np.where(unit, 0.0, rng.random(dim))
    N0 = W @ np.diag(nu) @ adj(W)
    space = solution_space(T, T)
    U0 = np.zeros((dim, dim), dtype=complex)
    for X in space.basis:
        U0 += rng.standard_normal() * (X + adj(X)) / 2
    if opnorm(U0) > 0:
        U0 /= opnorm(U0)
    X = U0 - N0 if orientation == "upper" else U0 + N0
    return T, X, U0, N0


def positive_toeplitz(T: OperatorTuple, rng) -> np.ndarray:
    """c Q_T^2 + B*B with B a random combination of Toeplitz basis elements."""
    Q = compute_qt(T)
    space = solution_space(T, T)
    B = np.zeros((T.dim, T.dim), dtype=complex)
    for X in space.basis:
        B += (rng.standard_normal() + 1j * rng.standard_normal()) * X
    return rng.random() * Q @ Q + adj(B) @ B


def strict_tuple(dim: int, n: int, rng, r_max: float = 0.9) -> OperatorTuple:
    """Commuting strict contractions, jointly diagonalizable."""
    T, *_ = diagonal_tuple(dim, n, rng, p_unit=0.0, r_max=r_max)
    return T
