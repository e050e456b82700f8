"""Dense complex linear-algebra kernels.

Matrices are plain ``numpy.ndarray`` objects of dtype ``complex128``; a vector
is an ``(n, 1)`` matrix and a subspace is carried by a ``SubspaceBasis`` whose
columns are orthonormal.  Every function here is pure and deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DimMismatch,
    MajorizationFails,
    NotFinite,
    NotHermitian,
    NotIsometricAction,
    NotPSD,
    RankMismatch,
)

RANK_TOL = 1e-10
TOL_ORTH = 1e-10
COMPLEMENT_TOL = 1e-10


def as_matrix(A, rows: int | None = None, cols: int | None = None) -> np.ndarray:
    """Coerce ``A`` to a finite 2-D complex array, optionally checking its shape."""
    M = np.array(A, dtype=np.complex128)
    if M.ndim == 1:
        M = M.reshape(-1, 1)
    if M.ndim != 2:
        raise DimMismatch(f"expected a matrix, got array of dimension {M.ndim}")
    if rows is not None and M.shape[0] != rows:
        raise DimMismatch(f"expected {rows} rows, got {M.shape[0]}")
    if cols is not None and M.shape[1] != cols:
        raise DimMismatch(f"expected {cols} columns, got {M.shape[1]}")
    if not np.all(np.isfinite(M)):
        raise NotFinite("matrix has NaN or infinite entries")
    return M


def opnorm(A: np.ndarray) -> float:
    """Spectral norm; 0 for matrices with an empty dimension."""
    if A.size == 0:
        return 0.0
    return float(np.linalg.norm(A, 2))


def adj(A: np.ndarray) -> np.ndarray:
    return A.conj().T


def hermitian_part(A: np.ndarray) -> np.ndarray:
    return 0.5 * (A + adj(A))


@dataclass(frozen=True)
class SubspaceBasis:
    """Orthonormal column basis of a subspace of C^ambient_dim."""

    basis: np.ndarray

    def __post_init__(self):
        if self.basis.ndim != 2:
            raise DimMismatch("basis must be a matrix")

    @property
    def ambient_dim(self) -> int:
        return self.basis.shape[0]

    @property
    def rank(self) -> int:
        return self.basis.shape[1]

    def projector(self) -> np.ndarray:
        return self.basis @ adj(self.basis)

    def orthonormality_residual(self) -> float:
        return opnorm(adj(self.basis) @ self.basis - np.eye(self.rank))

    @classmethod
    def empty(cls, ambient_dim: int) -> "SubspaceBasis":
        return cls(np.zeros((ambient_dim, 0), dtype=np.complex128))

    @classmethod
    def full(cls, ambient_dim: int) -> "SubspaceBasis":
        return cls(np.eye(ambient_dim, dtype=np.complex128))


def _fix_phases(Q: np.ndarray) -> np.ndarray:
    # Make the first entry of near-maximal modulus in each column real positive.
    Q = Q.copy()
    for j in range(Q.shape[1]):
        col = Q[:, j]
        mags = np.abs(col)
        top = mags.max() if mags.size else 0.0
        if top == 0.0:
            continue
        k = int(np.argmax(mags >= (1 - 1e-8) * top))
        Q[:, j] = col * (np.conj(col[k]) / abs(col[k]))
    return Q


def _svd_rank(s: np.ndarray, rank_tol: float) -> int:
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.sum(s > rank_tol * s[0]))


def range_kernel(A: np.ndarray, rank_tol: float = RANK_TOL) -> tuple[SubspaceBasis, SubspaceBasis]:
    """Orthonormal bases of Ran A and ker A from a full SVD.

    Singular values above ``rank_tol * sigma_max`` count towards the rank.
    Column phases are normalized so the leading entry of largest modulus is
    real and positive, which makes the output reproducible across runs.
    """
    A = as_matrix(A)
    m, n = A.shape
    if m == 0 or n == 0:
        return SubspaceBasis.empty(m), SubspaceBasis.full(n)
    U, s, Vh = np.linalg.svd(A, full_matrices=True)
    r = _svd_rank(s, rank_tol)
    rng = _fix_phases(U[:, :r])
    ker = _fix_phases(adj(Vh)[:, r:])
    return SubspaceBasis(rng), SubspaceBasis(ker)


def spectral_radius(A: np.ndarray) -> float:
    A = as_matrix(A)
    if A.shape[0] != A.shape[1]:
        raise DimMismatch("spectral radius needs a square matrix")
    if A.size == 0:
        return 0.0
    return float(np.max(np.abs(np.linalg.eigvals(A))))


def _check_hermitian(A: np.ndarray, tol: float) -> np.ndarray:
    if A.shape[0] != A.shape[1]:
        raise DimMismatch("expected a square matrix")
    scale = max(1.0, opnorm(A))
    defect = opnorm(A - adj(A))
    if defect > tol * scale:
        raise NotHermitian(f"||A - A*|| = {defect:.3e} exceeds {tol * scale:.3e}")
    return hermitian_part(A)


def psd_sqrt(A: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    """Hermitian PSD square root of a Hermitian PSD matrix.

    Eigenvalues of modulus at most ``tol * max(1, ||A||)`` are set to zero, so
    round-off from differences such as N - T*NT never produces spurious
    rank; anything more negative raises ``NotPSD``.
    """
    A = _check_hermitian(as_matrix(A), tol)
    if A.size == 0:
        return A.copy()
    w, Q = np.linalg.eigh(A)
    cut = tol * max(1.0, float(np.max(np.abs(w))))
    if w[0] < -cut:
        raise NotPSD(f"eigenvalue {w[0]:.3e} below -{cut:.3e}")
    w = np.where(w <= cut, 0.0, w)
    B = (Q * np.sqrt(w)) @ adj(Q)
    return hermitian_part(B)


def min_eigenvalue(H: np.ndarray) -> float:
    """Smallest eigenvalue of the Hermitian part; +inf for an empty matrix."""
    if H.size == 0:
        return float("inf")
    return float(np.linalg.eigvalsh(hermitian_part(H))[0])


def max_eigenvalue(H: np.ndarray) -> float:
    if H.size == 0:
        return float("-inf")
    return float(np.linalg.eigvalsh(hermitian_part(H))[-1])


def pinv(B: np.ndarray, rank_tol: float = RANK_TOL) -> np.ndarray:
    """Moore-Penrose inverse with the package-wide relative rank cut."""
    m, n = B.shape
    if m == 0 or n == 0:
        return np.zeros((n, m), dtype=np.complex128)
    U, s, Vh = np.linalg.svd(B, full_matrices=False)
    r = _svd_rank(s, rank_tol)
    return (adj(Vh[:r]) / s[:r]) @ adj(U[:, :r])


def douglas_solve(A: np.ndarray, B: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    """Contraction C with A = C B, vanishing on the complement of Ran B.

    Requires A*A <= B*B up to ``tol`` (scaled by ``max(1, ||B||^2)``).
    """
    A = as_matrix(A)
    B = as_matrix(B)
    if A.shape[1] != B.shape[1]:
        raise DimMismatch(f"A and B need a common domain, got {A.shape} and {B.shape}")
    if A.shape[1] > 0:
        margin = min_eigenvalue(adj(B) @ B - adj(A) @ A)
        if margin < -tol * max(1.0, opnorm(B) ** 2):
            raise MajorizationFails(margin)
    return A @ pinv(B)


def polar_isometry(M: np.ndarray) -> np.ndarray:
    """Isometric factor of the polar decomposition of a tall matrix."""
    if M.size == 0:
        return np.zeros(M.shape, dtype=np.complex128)
    U, _, Vh = np.linalg.svd(M, full_matrices=False)
    return U @ Vh


def procrustes_isometry(target: np.ndarray, source: np.ndarray) -> np.ndarray:
    """Isometry V minimizing ||V source - target||_F.

    When source*source = target*target and ``source`` has full row rank this
    is the unique isometry with V source = target; solving it this way
    avoids inverting small singular values.
    """
    return polar_isometry(target @ adj(source))


def orthonormal_complement(basis: np.ndarray, tol: float = COMPLEMENT_TOL) -> np.ndarray:
    """Orthonormal basis of the complement of span(basis).

    Columns of I - P are Gram-Schmidt orthonormalized (twice) in index order
    and kept when their norm after re-orthogonalization exceeds ``tol``.
    """
    d, r = basis.shape
    target = d - r
    I_minus_P = np.eye(d, dtype=np.complex128) - basis @ adj(basis)
    kept: list[np.ndarray] = []
    for j in range(d):
        if len(kept) == target:
            break
        v = I_minus_P[:, j].copy()
        for _ in range(2):
            v -= basis @ (adj(basis) @ v)
            for q in kept:
                v -= q * np.vdot(q, v)
        nv = np.linalg.norm(v)
        if nv > tol:
            kept.append(v / nv)
    if not kept:
        return np.zeros((d, 0), dtype=np.complex128)
    return np.column_stack(kept)


def complete_to_unitary(dom: SubspaceBasis, cod: SubspaceBasis, action: np.ndarray) -> np.ndarray:
    """Unitary W on the ambient space with W dom.basis = cod.basis action.

    ``action`` is the square unitary matrix of the isometry in the given
    coordinates.  The complements are paired column by column in the order
    produced by ``orthonormal_complement``.
    """
    if dom.ambient_dim != cod.ambient_dim:
        raise DimMismatch("domain and codomain live in different ambient spaces")
    if dom.rank != cod.rank:
        raise RankMismatch(f"domain rank {dom.rank} != codomain rank {cod.rank}")
    action = as_matrix(action, dom.rank, cod.rank)
    if dom.rank:
        defect = opnorm(adj(action) @ action - np.eye(dom.rank))
        if defect > 1e-9:
            raise NotIsometricAction(f"action is not isometric (defect {defect:.3e})")
    dc = orthonormal_complement(dom.basis)
    cc = orthonormal_complement(cod.basis)
    if dc.shape[1] != cc.shape[1]:
        raise RankMismatch("complements have different dimensions")
    return cod.basis @ action @ adj(dom.basis) + cc @ adj(dc)


def isometry_between_ranges(F: np.ndarray, G: np.ndarray, rank_tol: float = RANK_TOL):
    """Subspace data of the isometry F h -> G h when F*F = G*G.

    Returns ``(dom, cod, action)`` ready for ``complete_to_unitary``.  The
    action is fitted as an orthogonal Procrustes problem so that directions
    with tiny singular values do not blow up.
    """
    dom, _ = range_kernel(F, rank_tol)
    cod, _ = range_kernel(G, rank_tol)
    if dom.rank != cod.rank:
        raise RankMismatch(f"Ran F has rank {dom.rank} but Ran G has rank {cod.rank}")
    if dom.rank == 0:
        return dom, cod, np.zeros((0, 0), dtype=np.complex128)
    src = adj(dom.basis) @ F
    tgt = adj(cod.basis) @ G
    action = procrustes_isometry(tgt, src)
    return dom, cod, action


def unitarity_defect(W: np.ndarray) -> float:
    if W.size == 0:
        return 0.0
    n = W.shape[0]
    return max(opnorm(adj(W) @ W - np.eye(W.shape[1])), opnorm(W @ adj(W) - np.eye(n)))


def isometry_defect(W: np.ndarray) -> float:
    if W.size == 0:
        return 0.0
    return opnorm(adj(W) @ W - np.eye(W.shape[1]))
