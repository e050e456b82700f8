"""(S, T)-Toeplitz operators: averaging onto T(S, T), necessary conditions for
nonzero solutions, and the correspondence with the canonical extensions."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .errors import DimMismatch, NotStabilized, ZeroQT
from .matcore import adj, as_matrix, douglas_solve, opnorm, pinv, unitarity_defect
from .toeplitz import (
    PseudoExtension,
    canonical_isometric_pe,
    solution_space,
    toeplitz_residual,
)
from .tuples import OperatorTuple, is_adjoint_pure

M_MAX = 4096


@dataclass
class CesaroCertificate:
    m_final: int
    delta: float
    residual: float
    stages: int = 0

    def as_dict(self) -> dict:
        return {"m_final": self.m_final, "delta": self.delta, "residual": self.residual, "stages": self.stages}


def _window_average(X: np.ndarray, S: OperatorTuple, T: OperatorTuple, m: int) -> np.ndarray:
    """m^{-n} sum of S^{*alpha} X T^alpha over alpha in [m-1, 2m-1)^n.

    m must be a power of two.  Per coordinate the window average is a shift
    by m-1 followed by the mean over m consecutive powers, and the mean over
    2m powers is the mean over m powers of (X + L^m X)/2.  The coordinate
    maps commute, so they are applied one after the other.
    """
    Y = X
    for Si, Ti in zip(S, T):
        if m > 1:
            Sp = np.linalg.matrix_power(Si, m - 1)
            Tp = np.linalg.matrix_power(Ti, m - 1)
            Y = adj(Sp) @ Y @ Tp
        # powers S^j, T^j for j = m/2, m/4, ..., 1
        pows = []
        Sj, Tj, j = Si, Ti, 1
        while j < m:
            pows.append((Sj, Tj))
            Sj, Tj, j = Sj @ Sj, Tj @ Tj, 2 * j
        for Sj, Tj in reversed(pows):
            Y = 0.5 * (Y + adj(Sj) @ Y @ Tj)
    return Y


def cesaro_toeplitz(X, S: OperatorTuple, T: OperatorTuple, tol: float = 1e-9, m_max: int = M_MAX):
    """Average the orbit S^{*alpha} X T^alpha onto T(S, T).

    Window means at m = 1, 2, 4, ..., m_max are compared; the first m with
    ||Y(2m) - Y(m)|| <= tol and Toeplitz residual <= 10 tol is accepted and
    Y(m) returned.  Every Banach limit agrees with these means when they
    converge; otherwise ``NotStabilized`` is raised.
    """
    if S.n != T.n:
        raise DimMismatch(f"S has {S.n} operators but T has {T.n}")
    X = as_matrix(X, S.dim, T.dim)
    prev = X
    m = 1
    stages = 0
    delta = float("inf")
    while 2 * m <= m_max:
        nxt = _window_average(X, S, T, 2 * m)
        stages += 1
        delta = opnorm(nxt - prev)
        if delta <= tol:
            res = toeplitz_residual(prev, S, T)
            if res <= 10 * tol:
                return prev, CesaroCertificate(m, delta, res, stages)
        prev = nxt
        m *= 2
    raise NotStabilized(m_max, delta)


def necessary_conditions(S: OperatorTuple, T: OperatorTuple) -> dict:
    """Purity of P_S and P_T versus nonzero (S, T)-Toeplitz operators.

    A nonzero solution forces both product contractions to have non-pure
    adjoints, and then both canonical isometric pseudo-extensions exist.
    The converse fails in general, so ``sufficient`` is always False.
    """
    space = solution_space(S, T)
    pure_S, pure_T = is_adjoint_pure(S), is_adjoint_pure(T)
    out = {
        "solution_dim": space.dim,
        "adjoint_pure_S": pure_S,
        "adjoint_pure_T": pure_T,
        "extension_S": None,
        "extension_T": None,
        "sufficient": False,
    }
    if not pure_S and not pure_T:
        out["extension_S"] = canonical_isometric_pe(S)
        out["extension_T"] = canonical_isometric_pe(T)
    out["pass"] = space.dim == 0 or not (pure_S or pure_T)
    return out


def _vec_basis(mats: list, rows: int, cols: int) -> np.ndarray:
    if not mats:
        return np.zeros((rows * cols, 0), dtype=np.complex128)
    M = np.column_stack([X.reshape(-1, order="F") for X in mats])
    # orthonormalize: the pushed-forward basis need not be orthonormal
    U, s, _ = np.linalg.svd(M, full_matrices=False)
    r = int(np.sum(s > 1e-10 * s[0])) if s.size and s[0] > 0 else 0
    return U[:, :r]


def _max_angle(A: np.ndarray, B: np.ndarray) -> float:
    if A.shape[1] != B.shape[1]:
        return float(np.pi / 2)
    if A.shape[1] == 0:
        return 0.0
    return float(np.max(sla.subspace_angles(A, B)))


def lift_solution(A: np.ndarray, pe_S: PseudoExtension, pe_T: PseudoExtension):
    """B on the extension spaces with A = J_S* B J_T, by two Douglas steps.

    A* = X J_S gives C = X* with A = J_S* C, then C = B J_T.
    """
    nA = opnorm(A)
    if nA == 0.0:
        return np.zeros((pe_S.K_dim, pe_T.K_dim), dtype=np.complex128)
    An = A / nA
    X = douglas_solve(adj(An), pe_S.J, tol=1e-8)
    C = adj(X)
    B = douglas_solve(C, pe_T.J, tol=1e-8)
    return nA * B


def canonical_correspondence(S: OperatorTuple, T: OperatorTuple) -> dict:
    """Compare T(S, T) with J_S* T(W, V) J_T for the canonical extensions
    (J_S, W) of S and (J_T, V) of T."""
    space = solution_space(S, T)
    try:
        pe_S = canonical_isometric_pe(S)
        pe_T = canonical_isometric_pe(T)
    except ZeroQT:
        return {"degenerate": True, "solution_dim": space.dim, "lifted_dim": 0,
                "max_angle": 0.0, "pass": space.dim == 0}
    lifted = solution_space(pe_S.V, pe_T.V)
    pushed = [adj(pe_S.J) @ B @ pe_T.J for B in lifted.basis]
    ours = _vec_basis(space.basis, S.dim, T.dim)
    theirs = _vec_basis(pushed, S.dim, T.dim)
    angle = _max_angle(ours, theirs)
    recon, norm_gap, lift_res = 0.0, 0.0, 0.0
    for A in space.basis:
        B = lift_solution(A, pe_S, pe_T)
        recon = max(recon, opnorm(A - adj(pe_S.J) @ B @ pe_T.J))
        norm_gap = max(norm_gap, abs(opnorm(A) - opnorm(B)))
        lift_res = max(lift_res, toeplitz_residual(B, pe_S.V, pe_T.V))
    ext_unitary = max(max(unitarity_defect(V) for V in pe_S.V), max(unitarity_defect(V) for V in pe_T.V))
    return {
        "degenerate": False,
        "solution_dim": space.dim,
        "lifted_dim": lifted.dim,
        "max_angle": angle,
        "reconstruction": recon,
        "norm_gap": norm_gap,
        "lift_toeplitz_residual": lift_res,
        # in finite dimensions the isometric extensions are already unitary,
        # so they are their own minimal unitary extensions
        "extensions_unitary_defect": ext_unitary,
        "pass": angle <= 1e-7 and recon <= 1e-7 and norm_gap <= 1e-6 and lift_res <= 1e-7,
    }


def canonical_unitary_uniqueness(T: OperatorTuple, alt_basis: str = "pivoted") -> dict:
    """Two canonical extensions built with different bases of Ran Q_T differ
    by a unitary W with W V_i = V~_i W and W J = J~."""
    pe1 = canonical_isometric_pe(T, basis="svd")
    pe2 = canonical_isometric_pe(T, basis=alt_basis)
    W = pe2.J @ pinv(pe1.J)
    inter = max(opnorm(W @ V1 - V2 @ W) for V1, V2 in zip(pe1.V, pe2.V))
    jres = opnorm(W @ pe1.J - pe2.J)
    udef = unitarity_defect(W)
    return {
        "W": W,
        "K_dim": pe1.K_dim,
        "intertwining": inter,
        "J_residual": jres,
        "unitarity_defect": udef,
        "pass": inter <= 1e-8 and jres <= 1e-8 and udef <= 1e-8,
    }
