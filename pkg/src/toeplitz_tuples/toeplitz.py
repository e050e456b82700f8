"""Solutions of S_i* X T_i = X, the canonical operator Q_T, isometric
pseudo-extensions and the factorization R = J*J of positive Toeplitz operators.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .errors import (
    CertificateFails,
    DimMismatch,
    NotConverged,
    NotToeplitz,
    NotUnitary,
    ZeroQT,
)
from .matcore import (
    RANK_TOL,
    SubspaceBasis,
    _fix_phases,
    _svd_rank,
    adj,
    as_matrix,
    douglas_solve,
    hermitian_part,
    isometry_defect,
    min_eigenvalue,
    opnorm,
    polar_isometry,
    procrustes_isometry,
    psd_sqrt,
    range_kernel,
    unitarity_defect,
)
from .tuples import OperatorTuple, product_contraction, validate

TOEPLITZ_TOL = 1e-8
UNIMODULAR_TOL = 1e-8


@dataclass
class SolutionSpace:
    """Orthonormal (trace inner product) basis of T(S, T)."""

    domain_dim: int
    codomain_dim: int
    basis: list = field(default_factory=list)
    residual: float = 0.0

    @property
    def dim(self) -> int:
        return len(self.basis)

    def vectorized(self) -> np.ndarray:
        """Basis as columns of a (codomain_dim * domain_dim) x dim matrix."""
        if not self.basis:
            return np.zeros((self.codomain_dim * self.domain_dim, 0), dtype=np.complex128)
        return np.column_stack([X.reshape(-1, order="F") for X in self.basis])


@dataclass
class PseudoExtension:
    """Triple (J, K, V) with J T_i = V_i J; K = C^k with k = J.shape[0].

    ``orientation`` is ``"forward"`` for J T_i = V_i J and ``"adjoint"`` for
    lifts that intertwine adjoints.
    """

    J: np.ndarray
    V: OperatorTuple
    kind: str
    canonical: bool
    commuting: bool
    orientation: str = "forward"

    @property
    def K_dim(self) -> int:
        return self.J.shape[0]

    def intertwining_residual(self, T: OperatorTuple) -> float:
        if self.K_dim == 0:
            return 0.0
        return max(opnorm(self.J @ Ti - Vi @ self.J) for Ti, Vi in zip(T, self.V))

    def isometry_residual(self) -> float:
        if self.K_dim == 0:
            return 0.0
        return max(isometry_defect(Vi) for Vi in self.V)


def _check_pair(S: OperatorTuple, T: OperatorTuple):
    if S.n != T.n:
        raise DimMismatch(f"S has {S.n} operators but T has {T.n}")


def toeplitz_residual(X, S: OperatorTuple, T: OperatorTuple) -> float:
    """max_i ||S_i* X T_i - X|| for X : C^T.dim -> C^S.dim."""
    _check_pair(S, T)
    X = as_matrix(X, S.dim, T.dim)
    return max(opnorm(adj(Si) @ X @ Ti - X) for Si, Ti in zip(S, T))


def lifted_operator(S: OperatorTuple, T: OperatorTuple) -> np.ndarray:
    """Stacked matrices of X -> S_i* X T_i - X acting on column-major vec(X)."""
    _check_pair(S, T)
    eye = np.eye(S.dim * T.dim, dtype=np.complex128)
    return np.vstack([np.kron(Ti.T, adj(Si)) - eye for Si, Ti in zip(S, T)])


def _pivoted_basis(N: np.ndarray) -> np.ndarray:
    """Canonical orthonormal basis of span(N) that depends only on the subspace.

    Column-pivoted QR of the orthogonal projector picks coordinates in order
    of decreasing weight, ties going to the lower index.
    """
    d = N.shape[1]
    if d == 0:
        return N
    P = N @ adj(N)
    Qm, _, _ = sla.qr(P, pivoting=True, mode="economic")
    B = Qm[:, :d]
    # one projection sweep removes the O(eps) leakage of the pivoted QR
    B = P @ B
    B, _ = np.linalg.qr(B)
    return _fix_phases(B)


def solution_space(S: OperatorTuple, T: OperatorTuple, rank_tol: float = RANK_TOL) -> SolutionSpace:
    """Joint nullspace of the lifted equations, as a list of matrices."""
    L = lifted_operator(S, T)
    D = L.shape[1]
    _, s, Vh = np.linalg.svd(L, full_matrices=True)
    r = _svd_rank(s, rank_tol)
    null = adj(Vh)[:, r:]
    null = _pivoted_basis(null)
    basis = [null[:, j].reshape((S.dim, T.dim), order="F") for j in range(null.shape[1])]
    res = max((toeplitz_residual(X, S, T) for X in basis), default=0.0)
    assert D == S.dim * T.dim
    return SolutionSpace(T.dim, S.dim, basis, res)


def power_limit(P: np.ndarray, A0: np.ndarray | None = None, tol: float = 1e-12, max_iter: int = 10_000):
    """SOT-limit of P^{*k} A0 P^k for a contraction P, by repeated squaring.

    Stage j holds k = 2^j; the iteration stops once two consecutive stages
    differ by at most ``tol``, or by at most the rounding floor
    ``64 * eps * k`` of a k-fold product.  Returns
    ``(limit, stages, last_delta, k)``.
    """
    eps = np.finfo(float).eps
    A = np.eye(P.shape[0], dtype=np.complex128) if A0 is None else A0
    scale = max(1.0, opnorm(A))
    Pk = P.copy()
    k = 1
    delta = float("inf")
    for stage in range(1, max_iter + 1):
        A_next = hermitian_part(adj(Pk) @ A @ Pk)
        delta = opnorm(A_next - A)
        A = A_next
        if delta <= max(tol, 64 * eps * k * scale):
            return A, stage, delta, k
        Pk = Pk @ Pk
        # powers of a contraction are contractions; clipping the norm stops
        # rounding excess above 1 from compounding through repeated squaring
        nrm = opnorm(Pk)
        if nrm > 1.0:
            Pk = Pk / nrm
        k *= 2
    raise NotConverged(max_iter, delta)


def qt_with_info(T: OperatorTuple, tol: float = 1e-12, max_iter: int = 10_000):
    """Q_T together with ``(stages, last_delta)`` of the limit iteration."""
    P = product_contraction(T)
    A, stages, delta, _ = power_limit(P, None, tol, max_iter)
    return psd_sqrt(A, tol), stages, delta


def compute_qt(T: OperatorTuple, tol: float = 1e-12, max_iter: int = 10_000) -> np.ndarray:
    """Positive square root of lim P^{*k} P^k, P the product contraction."""
    return qt_with_info(T, tol, max_iter)[0]


def _range_basis(Q: np.ndarray, basis: str) -> np.ndarray:
    if basis == "svd":
        return range_kernel(Q)[0].basis
    if basis == "pivoted":
        rng = range_kernel(Q)[0].basis
        return _pivoted_basis(rng)
    if basis == "reversed":
        rng = range_kernel(Q)[0].basis
        return rng[:, ::-1]
    raise ValueError(f"unknown basis rule {basis!r}")


def canonical_isometric_pe(T: OperatorTuple, tol: float = 1e-12, max_iter: int = 10_000,
                           basis: str = "svd") -> PseudoExtension:
    """Canonical isometric pseudo-extension (J_T, Ran Q_T, V).

    J_T h = Q_T h in coordinates of an orthonormal basis of Ran Q_T, and V_i
    is the Douglas solution of V_i Q_T = Q_T T_i restricted to Ran Q_T.
    ``basis`` selects the coordinate rule for Ran Q_T.
    """
    Q = compute_qt(T, tol, max_iter)
    if opnorm(Q) <= 1e-8:
        raise ZeroQT("Q_T vanishes: the product contraction has pure adjoint, T(T) = {0}")
    Kb = _range_basis(Q, basis)
    J = adj(Kb) @ Q
    V = [adj(Kb) @ douglas_solve(Q @ Ti, Q, tol=1e-9) @ Kb for Ti in T]
    for i, Vi in enumerate(V):
        d = isometry_defect(Vi)
        if d > 1e-8:
            raise CertificateFails(f"V_{i + 1} isometric", d, 1e-8)
    prod = np.eye(Kb.shape[1], dtype=np.complex128)
    for Vi in V:
        prod = prod @ Vi
    d = isometry_defect(prod)
    if d > 1e-8:
        raise CertificateFails("V_1...V_n isometric", d, 1e-8)
    Vt = validate(V, tol_commute=1e-8, tol_contract=1e-8)
    return PseudoExtension(J, Vt, "isometric", canonical=True, commuting=True)


def factorize_positive(R, T: OperatorTuple, tol: float = 1e-9) -> PseudoExtension:
    """J, V with J*J = R and J T_i = V_i J for a positive T-Toeplitz R.

    K is Ran R^{1/2}; each V_i is the isometry R^{1/2} h -> R^{1/2} T_i h,
    fitted as an orthogonal Procrustes problem on K.  R = 0 gives the
    factorization through the zero space.
    """
    R = as_matrix(R, T.dim, T.dim)
    scale = max(1.0, opnorm(R))
    res = toeplitz_residual(R, T, T)
    if res > tol * scale:
        raise NotToeplitz(f"R is not T-Toeplitz (residual {res:.3e})")
    Rh = psd_sqrt(R, tol=min(tol, 1e-12))
    Kb = range_kernel(Rh)[0].basis
    r = Kb.shape[1]
    if r == 0:
        empty = tuple(np.zeros((0, 0), dtype=np.complex128) for _ in T)
        return PseudoExtension(np.zeros((0, T.dim), dtype=np.complex128), OperatorTuple(empty),
                               "isometric", canonical=False, commuting=True)
    J = adj(Kb) @ Rh
    V = [procrustes_isometry(J @ Ti, J) for Ti in T]
    Vt = validate(V, tol_commute=1e-8, tol_contract=1e-8)
    return PseudoExtension(J, Vt, "isometric", canonical=False, commuting=True)


def unimodular_subspace(A: np.ndarray, thresh: float = UNIMODULAR_TOL) -> SubspaceBasis:
    """Span of eigenvectors of A whose eigenvalues satisfy ||lam| - 1| <= thresh."""
    w, vecs = np.linalg.eig(A)
    sel = np.abs(np.abs(w) - 1.0) <= thresh
    if not np.any(sel):
        return SubspaceBasis.empty(A.shape[0])
    return range_kernel(vecs[:, sel], rank_tol=1e-8)[0]


def structure_checks(X, T: OperatorTuple) -> dict:
    """Finite-dimensional structure of a T-Toeplitz X.

    X and X* commute with each T_i and with P_T, and X vanishes off the
    unimodular eigenspaces of each T_i and of P_T.
    """
    X = as_matrix(X, T.dim, T.dim)
    res = toeplitz_residual(X, T, T)
    if res > TOEPLITZ_TOL * max(1.0, opnorm(X)):
        raise NotToeplitz(f"X is not T-Toeplitz (residual {res:.3e})")
    P = product_contraction(T)
    ops = list(T) + [P]
    names = [f"T_{i + 1}" for i in range(T.n)] + ["P"]
    commute, support = {}, {}
    for name, A in zip(names, ops):
        commute[name] = max(opnorm(X @ A - A @ X), opnorm(adj(X) @ A - A @ adj(X)))
        U = unimodular_subspace(A)
        perp = np.eye(T.dim) - U.projector()
        support[name] = max(opnorm(X @ perp), opnorm(adj(X) @ perp))
    worst = max(list(commute.values()) + list(support.values()))
    return {
        "toeplitz_residual": res,
        "commutator": commute,
        "off_unimodular": support,
        "max_residual": worst,
        "pass": worst <= 1e-7,
    }


def qt_projection_check(T: OperatorTuple, tol: float = 1e-12, max_iter: int = 10_000) -> dict:
    """Q_T is an orthogonal projection and T_i, P compress to unitaries on its range."""
    Q = compute_qt(T, tol, max_iter)
    proj = opnorm(Q @ Q - Q)
    Kb = range_kernel(Q)[0].basis
    P = product_contraction(T)
    unit = {}
    for name, A in zip([f"T_{i + 1}" for i in range(T.n)] + ["P"], list(T) + [P]):
        C = adj(Kb) @ A @ Kb
        # compression must be unitary and Ran Q_T invariant
        leak = opnorm(A @ Kb - Kb @ C) if Kb.shape[1] else 0.0
        unit[name] = max(unitarity_defect(C), leak)
    worst = max([proj] + list(unit.values()))
    return {
        "Q": Q,
        "rank": Kb.shape[1],
        "projection_residual": proj,
        "unitary_compression": unit,
        "pass": worst <= 1e-7,
    }


def unitary_intertwiner_subspaces(U: OperatorTuple, V: OperatorTuple) -> dict:
    """Joint reducing subspaces M (for U) and N (for V) on which U and V agree.

    A nonzero B with B U_i = V_i B is taken from T(V, U); M = (ker B)^perp,
    N = Ran B and the partial isometry of the polar decomposition of B
    implements the unitary equivalence.
    """
    for name, tup in (("U", U), ("V", V)):
        for i, A in enumerate(tup):
            d = isometry_defect(A)
            if d > 1e-10:
                raise NotUnitary(f"{name}_{i + 1} is not unitary (defect {d:.3e})")
    space = solution_space(V, U)
    if space.dim == 0:
        return {"nonzero": False, "message": "no joint reducing equivalence detected", "pass": True}
    B = space.basis[0]
    Nb, kerB = range_kernel(B)
    Mb = range_kernel(adj(B))[0]
    W = polar_isometry(B) if B.shape[0] >= B.shape[1] else adj(polar_isometry(adj(B)))
    Wc = adj(Nb.basis) @ W @ Mb.basis
    inter = 0.0
    reduce_ = 0.0
    for Ui, Vi in zip(U, V):
        cu = adj(Mb.basis) @ Ui @ Mb.basis
        cv = adj(Nb.basis) @ Vi @ Nb.basis
        inter = max(inter, opnorm(Wc @ cu - cv @ Wc))
        reduce_ = max(reduce_, opnorm(Ui @ Mb.basis - Mb.basis @ cu), opnorm(adj(Ui) @ Mb.basis - Mb.basis @ adj(cu)),
                      opnorm(Vi @ Nb.basis - Nb.basis @ cv), opnorm(adj(Vi) @ Nb.basis - Nb.basis @ adj(cv)))
    wdef = unitarity_defect(Wc)
    worst = max(inter, reduce_, wdef)
    return {
        "nonzero": True,
        "solution_dim": space.dim,
        "B": B,
        "M": Mb,
        "N": Nb,
        "W": Wc,
        "intertwining_residual": inter,
        "reducing_residual": reduce_,
        "unitarity_defect": wdef,
        "pass": worst <= 1e-7,
    }


def domination_gap(X: np.ndarray, pe: PseudoExtension) -> float:
    """Smallest eigenvalue of J*J - X (nonnegative when X <= J*J)."""
    return min_eigenvalue(adj(pe.J) @ pe.J - X)
