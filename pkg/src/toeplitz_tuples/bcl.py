"""Degree-one inner pencils, truncated Hardy-space models and the
transfer-function constructions that realize a positive pure lower operator
N as Pi* Pi with Pi T_i = M_i* Pi.

The Hardy space H^2_E is truncated to the first ``depth`` Taylor
coefficients, stored as a stacked vector of ``depth`` blocks of size dim E.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DimMismatch,
    HypothesisFails,
    NeedAtLeastThree,
    NotConverged,
    NotIsometricPencil,
    NotPSD,
    NotPureLower,
)
from .matcore import (
    SubspaceBasis,
    _check_hermitian,
    adj,
    as_matrix,
    complete_to_unitary,
    opnorm,
    procrustes_isometry,
    unitarity_defect,
)
from .tuples import OperatorTuple, product_contraction, product_without
from .updown import classify

PENCIL_TOL = 1e-9
HYPOTHESIS_TOL = 1e-9
TAIL_TARGET = 1e-14
K_MAX = 512
GRID_POINTS = 256


@dataclass
class Pencil:
    """z -> A + z B on C^e.  ``unitary``/``projection`` are kept when the
    pencil has the form (P + z P^perp) U* or U (P^perp + z P)."""

    A: np.ndarray
    B: np.ndarray
    unitary: np.ndarray | None = None
    projection: np.ndarray | None = None

    @property
    def dim(self) -> int:
        return self.A.shape[0]

    def __call__(self, z: complex) -> np.ndarray:
        return self.A + z * self.B

    def isometry_defect(self) -> float:
        """max(||A*A + B*B - I||, ||A*B||); zero iff M_Phi is an isometry."""
        if self.dim == 0:
            return 0.0
        I = np.eye(self.dim)
        return max(opnorm(adj(self.A) @ self.A + adj(self.B) @ self.B - I), opnorm(adj(self.A) @ self.B))


@dataclass
class TruncatedHardyOp:
    """Block lower-bidiagonal matrix of M_Phi on the first ``depth`` coefficients."""

    diag: np.ndarray
    subdiag: np.ndarray
    depth: int
    tail_bound: float = 0.0

    @property
    def coeff_dim(self) -> int:
        return self.diag.shape[0]

    def matrix(self) -> np.ndarray:
        e, K = self.coeff_dim, self.depth
        M = np.zeros((e * K, e * K), dtype=np.complex128)
        for k in range(K):
            M[k * e:(k + 1) * e, k * e:(k + 1) * e] = self.diag
            if k + 1 < K:
                M[(k + 1) * e:(k + 2) * e, k * e:(k + 1) * e] = self.subdiag
        return M

    def _blocks(self, f: np.ndarray) -> np.ndarray:
        e, K = self.coeff_dim, self.depth
        if f.shape[0] != e * K:
            raise DimMismatch(f"vector has {f.shape[0]} rows, expected {e * K}")
        return f.reshape(K, e, -1)

    def apply(self, f: np.ndarray) -> np.ndarray:
        g = self._blocks(f)
        out = np.einsum("ij,kjm->kim", self.diag, g)
        out[1:] += np.einsum("ij,kjm->kim", self.subdiag, g[:-1])
        return out.reshape(f.shape)

    def apply_adjoint(self, f: np.ndarray) -> np.ndarray:
        """Truncated adjoint: block k is A* f_k + B* f_{k+1}, with f_K = 0."""
        g = self._blocks(f)
        out = np.einsum("ji,kjm->kim", self.diag.conj(), g)
        out[:-1] += np.einsum("ji,kjm->kim", self.subdiag.conj(), g[1:])
        return out.reshape(f.shape)


def mult_op(phi: Pencil, depth: int, check: bool = True) -> TruncatedHardyOp:
    if depth < 1:
        raise ValueError("depth must be at least 1")
    if check:
        d = phi.isometry_defect()
        if d > PENCIL_TOL:
            raise NotIsometricPencil(f"A*A + B*B = I, A*B = 0 violated (defect {d:.3e})")
    return TruncatedHardyOp(phi.A, phi.B, depth)


def shift_op(e: int, depth: int) -> TruncatedHardyOp:
    return TruncatedHardyOp(np.zeros((e, e), dtype=np.complex128), np.eye(e, dtype=np.complex128), depth)


def hardy_embedding(coords: np.ndarray, Q: np.ndarray, depth: int, lift: np.ndarray | None = None) -> np.ndarray:
    """Stacked blocks lift @ coords @ Q^k for k < depth."""
    blocks = []
    cur = coords.copy()
    for _ in range(depth):
        blocks.append(cur if lift is None else lift @ cur)
        cur = cur @ Q
    return np.vstack(blocks)


def defect_coordinates(M: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    """rho of full row rank with rho* rho = M for a PSD defect M.

    Eigenvalues down to -tol * max(1, ||M||) are accepted as round-off;
    eigenvalues at most 1e-12 * max(1, ||M||) are dropped.
    """
    M = _check_hermitian(M, tol)
    if M.size == 0:
        return np.zeros((0, M.shape[1]), dtype=np.complex128)
    w, Q = np.linalg.eigh(M)
    scale = max(1.0, float(np.max(np.abs(w))))
    if w[0] < -tol * scale:
        raise NotPSD(f"defect operator has eigenvalue {w[0]:.3e}")
    keep = w > 1e-12 * scale
    # largest eigenvalues first
    idx = np.nonzero(keep)[0][::-1]
    return np.sqrt(w[idx])[:, None] * adj(Q[:, idx])


def _iso_from_coords(G: np.ndarray, rho: np.ndarray) -> np.ndarray:
    """Isometry X with X rho = G, for G*G = rho*rho and rho of full row rank."""
    if rho.shape[0] == 0:
        return np.zeros((G.shape[0], 0), dtype=np.complex128)
    return procrustes_isometry(G, rho)


def tail_value(N: np.ndarray, P: np.ndarray, k: int) -> float:
    Pk = np.linalg.matrix_power(P, k)
    return opnorm(adj(Pk) @ N @ Pk)


def choose_depth(N: np.ndarray, P: np.ndarray, target: float = TAIL_TARGET, k_max: int = K_MAX) -> tuple[int, float]:
    """Smallest K >= 1 with ||P^{*K} N P^K|| <= target."""
    A = adj(P) @ N @ P
    for K in range(1, k_max + 1):
        val = opnorm(A)
        if val <= target:
            return K, val
        A = adj(P) @ A @ P
    raise NotConverged(k_max, val)


@dataclass
class BCLResult:
    E_dim: int
    Pi: np.ndarray
    depth: int
    tail_bound: float
    pencils: list = field(default_factory=list)
    unitary_data: dict = field(default_factory=dict)
    residuals: dict = field(default_factory=dict)
    theorem: str = ""

    def mult_ops(self) -> list[TruncatedHardyOp]:
        return [mult_op(p, self.depth, check=False) for p in self.pencils]


def transfer_lift(Q, R, S, T, V, W, depth: int):
    """Transfer-function lift of a contraction through a block unitary.

    ``R`` (r x d) and ``S`` (s x d) are coordinate maps of defect operators,
    ``V`` (e x r) an isometry and ``W`` a unitary on C^e + C^m whose
    lower-right m x m block vanishes, with m = (padding) + s.  The hypothesis
    W (V R h, 0, S Q h) = (V R T h, 0, S h) is checked on the standard basis.
    Returns the pencil Phi(z) = A* + z C* B* of W* and the stacked embedding
    Pi with blocks V R Q^k, together with a residual report.
    """
    Q, T = as_matrix(Q), as_matrix(T)
    R, S, V, W = as_matrix(R), as_matrix(S), as_matrix(V), as_matrix(W)
    d = Q.shape[0]
    e = V.shape[0]
    m = W.shape[0] - e
    s = S.shape[0]
    if Q.shape != (d, d) or T.shape != (d, d) or R.shape[1] != d or S.shape[1] != d:
        raise DimMismatch("Q, T must be square and R, S must act on the same space")
    if V.shape[1] != R.shape[0] or m < s:
        raise DimMismatch("V must act on the coordinates of R; W too small for S")
    comm = opnorm(Q @ T - T @ Q)
    if comm > HYPOTHESIS_TOL:
        raise HypothesisFails("QT = TQ", comm)
    tail_D = W[e:, e:]
    if opnorm(tail_D) > HYPOTHESIS_TOL:
        raise HypothesisFails("lower-right block of W is zero", opnorm(tail_D))
    ud = unitarity_defect(W)
    if ud > HYPOTHESIS_TOL:
        raise HypothesisFails("W unitary", ud)
    pad = np.zeros((m - s, d), dtype=np.complex128)
    lhs = W @ np.vstack([V @ R, pad, S @ Q])
    rhs = np.vstack([V @ R @ T, pad, S])
    hyp = opnorm(lhs - rhs)
    if hyp > HYPOTHESIS_TOL * max(1.0, opnorm(R), opnorm(S)):
        raise HypothesisFails("W(VRh, 0, SQh) = (VRTh, 0, Sh)", hyp)
    A, B, C = W[:e, :e], W[:e, e:], W[e:, :e]
    phi = Pencil(adj(A), adj(C) @ adj(B))
    M = mult_op(phi, depth)
    VR = V @ R
    internal = opnorm(VR @ T - A @ VR - B @ C @ VR @ Q)
    Pi = hardy_embedding(R, Q, depth, V)
    leak = opnorm(R @ np.linalg.matrix_power(Q, depth))
    M.tail_bound = leak ** 2
    inter = opnorm(Pi @ T - M.apply_adjoint(Pi))
    report = {
        "hypothesis": hyp,
        "internal_identity": internal,
        "pencil_isometry": phi.isometry_defect(),
        "intertwining": inter,
        "tail_bound": M.tail_bound,
        "pass": inter <= 4 * leak + 1e-9 and internal <= HYPOTHESIS_TOL,
    }
    return phi, M, Pi, report


def _zero_result(T: OperatorTuple, theorem: str) -> BCLResult:
    empty = np.zeros((0, 0), dtype=np.complex128)
    res = BCLResult(0, np.zeros((0, T.dim), dtype=np.complex128), 1, 0.0,
                    [Pencil(empty, empty) for _ in T], {}, {}, theorem)
    res.residuals = verify_bcl(res, np.zeros((T.dim, T.dim)), T)
    return res


def _prepare(N, T: OperatorTuple, depth):
    N = _check_hermitian(as_matrix(N, T.dim, T.dim), 1e-10)
    if opnorm(N) == 0.0:
        return N, None, None, None
    label = classify(N, T)
    if label != "pure_lower_positive":
        raise NotPureLower(f"N is classified as {label!r}, not positive pure lower")
    P = product_contraction(T)
    if depth in (None, "auto"):
        K, tail = choose_depth(N, P)
    else:
        K = int(depth)
        if K < 1:
            raise ValueError("depth must be at least 1")
        tail = tail_value(N, P, K)
    return N, P, K, tail


def construct_pair(N, T: OperatorTuple, depth="auto") -> BCLResult:
    """Pencils Phi_1 = (P + zP^perp)U*, Phi_2 = U(P^perp + zP) and Pi for n = 2.

    E = Ran R_1 + Ran R_2 in defect coordinates; U is the unitary extension
    of (R_1 T_2 h, R_2 h) -> (R_1 h, R_2 T_1 h) and P projects onto the
    Ran R_2 summand.
    """
    if T.n != 2:
        raise DimMismatch(f"construct_pair needs n = 2, got n = {T.n}")
    N, P, K, tail = _prepare(N, T, depth)
    if P is None:
        return _zero_result(T, "pair-transfer-function-model")
    T1, T2 = T[0], T[1]
    rho = defect_coordinates(N - adj(P) @ N @ P)
    rho1 = defect_coordinates(N - adj(T1) @ N @ T1)
    rho2 = defect_coordinates(N - adj(T2) @ N @ T2)
    r1, r2 = rho1.shape[0], rho2.shape[0]
    e = r1 + r2
    F = np.vstack([rho1 @ T2, rho2])
    G = np.vstack([rho1, rho2 @ T1])
    XF = _iso_from_coords(F, rho)
    V = _iso_from_coords(G, rho)
    r = rho.shape[0]
    U = complete_to_unitary(SubspaceBasis(XF), SubspaceBasis(V), np.eye(r))
    Pr = np.zeros((e, e), dtype=np.complex128)
    Pr[r1:, r1:] = np.eye(r2)
    Pperp = np.eye(e) - Pr
    iota1 = np.eye(e)[:, :r1]
    iota2 = np.eye(e)[:, r1:]
    W1 = np.block([[U, np.zeros((e, r1))], [np.zeros((r1, e)), np.eye(r1)]]) @ \
        np.block([[Pr, iota1], [adj(iota1), np.zeros((r1, r1))]])
    W2 = np.block([[Pperp, iota2], [adj(iota2), np.zeros((r2, r2))]]) @ \
        np.block([[adj(U), np.zeros((e, r2))], [np.zeros((r2, e)), np.eye(r2)]])
    phi1, _, Pi, rep1 = transfer_lift(P, rho, rho1, T1, V, W1, K)
    phi2, _, _, rep2 = transfer_lift(P, rho, rho2, T2, V, W2, K)
    phi1.unitary, phi1.projection = U, Pr
    phi2.unitary, phi2.projection = U, Pr
    result = BCLResult(e, Pi, K, tail, [phi1, phi2],
                       {"U": U, "P": Pr, "W": [W1, W2], "V": V}, {}, "pair-transfer-function-model")
    result.residuals = verify_bcl(result, N, T)
    result.residuals["lift"] = [rep1, rep2]
    return result


def construct_tuple(N, T: OperatorTuple, depth="auto") -> BCLResult:
    """Pencils Theta_i = (P_i + z P_i^perp) U_i* and Pi for n >= 3.

    For each i the unitary U~_i on S_i = E_i + Ran R_i + Ran R~_i extends
    (R_i P~_i h, R~_i h) -> (R_i h, R~_i T_i h), where P~_i is the product
    without T_i.  E = Ran R + D with dim E = max_i dim(Ran R_i + Ran R~_i),
    and each S_i is padded by E_i to the same dimension.
    """
    if T.n < 3:
        raise NeedAtLeastThree(f"construct_tuple needs n >= 3, got n = {T.n}")
    N, P, K, tail = _prepare(N, T, depth)
    if P is None:
        return _zero_result(T, "tuple-transfer-function-model")
    rho = defect_coordinates(N - adj(P) @ N @ P)
    r = rho.shape[0]
    parts = []
    for i, Ti in enumerate(T):
        Pt = product_without(T, i)
        rho_i = defect_coordinates(N - adj(Ti) @ N @ Ti)
        rho_t = defect_coordinates(N - adj(Pt) @ N @ Pt)
        parts.append((Ti, Pt, rho_i, rho_t))
    e = max(p[2].shape[0] + p[3].shape[0] for p in parts)
    pencils, lifts, units = [], [], []
    Pi_R = hardy_embedding(rho, P, K)
    Pi = np.zeros((K * e, T.dim), dtype=np.complex128)
    Pi.reshape(K, e, T.dim)[:, :r, :] = Pi_R.reshape(K, r, T.dim)
    dom_R = SubspaceBasis(np.eye(e, dtype=np.complex128)[:, :r])
    for Ti, Pt, rho_i, rho_t in parts:
        ri, rt = rho_i.shape[0], rho_t.shape[0]
        pad = e - ri - rt
        # S_i coordinates: (E_i padding, Ran R_i, Ran R~_i)
        F = np.vstack([np.zeros((pad, T.dim)), rho_i @ Pt, rho_t])
        G = np.vstack([np.zeros((pad, T.dim)), rho_i, rho_t @ Ti])
        XF = _iso_from_coords(F, rho)
        Vi = _iso_from_coords(G, rho)
        Ut = complete_to_unitary(SubspaceBasis(XF), SubspaceBasis(Vi), np.eye(r))
        Vt = complete_to_unitary(dom_R, SubspaceBasis(Vi), np.eye(r))
        Pt_proj = np.zeros((e, e), dtype=np.complex128)
        Pt_proj[pad + ri:, pad + ri:] = np.eye(rt)
        m = pad + ri
        iota = np.eye(e)[:, :m]
        Wi = np.block([[Ut, np.zeros((e, m))], [np.zeros((m, e)), np.eye(m)]]) @ \
            np.block([[Pt_proj, iota], [adj(iota), np.zeros((m, m))]])
        S_coords = np.vstack([np.zeros((pad, T.dim)), rho_i])
        phi, _, _, rep = transfer_lift(P, rho, S_coords, Ti, Vi, Wi, K)
        Pi_ = adj(Vt) @ Pt_proj @ Vt
        Ui = adj(Vt) @ Ut @ Vt
        theta = Pencil(Pi_ @ adj(Ui), (np.eye(e) - Pi_) @ adj(Ui), Ui, Pi_)
        # conjugating the lifted pencil must reproduce Theta_i
        conj = max(opnorm(adj(Vt) @ phi.A @ Vt - theta.A), opnorm(adj(Vt) @ phi.B @ Vt - theta.B))
        rep["conjugation"] = conj
        pencils.append(theta)
        lifts.append(rep)
        units.append({"U": Ui, "P": Pi_, "U_tilde": Ut, "V_tilde": Vt, "W": Wi})
    result = BCLResult(e, Pi, K, tail, pencils, {"per_index": units, "R_dim": r}, {}, "tuple-transfer-function-model")
    result.residuals = verify_bcl(result, N, T)
    result.residuals["lift"] = lifts
    return result


def symbol_commutator_sup(p: Pencil, q: Pencil, points: int = GRID_POINTS) -> float:
    """sup over |z| = 1 of ||Phi(z) Psi(z) - Psi(z) Phi(z)||, on a uniform grid.

    This is the norm of M_Phi M_Psi - M_Psi M_Phi on the full Hardy space.
    """
    if p.dim == 0:
        return 0.0
    worst = 0.0
    for z in np.exp(2j * np.pi * np.arange(points) / points):
        a, b = p(z), q(z)
        worst = max(worst, opnorm(a @ b - b @ a))
    return worst


def _block_argmax(D: np.ndarray, e: int) -> int:
    if D.size == 0 or e == 0:
        return -1
    norms = np.linalg.norm(D.reshape(-1, e, D.shape[1]), axis=(1, 2))
    return int(np.argmax(norms))


def verify_bcl(result: BCLResult, N, T: OperatorTuple) -> dict:
    """Recompute every certificate of a BCL result from its raw matrices.

    Budgets: Gram ||Pi*Pi - N|| <= tail + 1e-8, intertwining and product
    identity <= 4 sqrt(tail) (times n for the product) + 1e-9, pencil
    identities <= 1e-9.  Localized residuals give the worst Taylor block.
    """
    N = as_matrix(N, T.dim, T.dim)
    e, K, Pi = result.E_dim, result.depth, result.Pi
    tail = result.tail_bound
    root = np.sqrt(max(tail, 0.0))
    P = product_contraction(T)
    rep: dict = {"depth": K, "tail_bound": tail, "E_dim": e}
    checks = []
    gram = opnorm(adj(Pi) @ Pi - N)
    rep["gram"] = gram
    checks.append(gram <= tail + 1e-8)
    ops = [mult_op(p, K, check=False) for p in result.pencils]
    rep["pencil_isometry"] = [p.isometry_defect() for p in result.pencils]
    checks.extend(d <= PENCIL_TOL for d in rep["pencil_isometry"])
    inter, where = [], []
    for Ti, M in zip(T, ops):
        D = Pi @ Ti - M.apply_adjoint(Pi) if e else np.zeros((0, T.dim))
        inter.append(opnorm(D))
        where.append(_block_argmax(D, e))
    rep["intertwining"] = inter
    rep["intertwining_block"] = where
    checks.extend(v <= 4 * root + 1e-9 for v in inter)
    if e:
        Z = shift_op(e, K)
        lhs = Z.apply_adjoint(Pi)
        rhs = Pi.copy()
        for M in reversed(ops):
            rhs = M.apply_adjoint(rhs)
        prod = opnorm(lhs - rhs)
        shift_res = opnorm(lhs - Pi @ P)
    else:
        prod = shift_res = 0.0
    rep["product_identity"] = prod
    rep["shift_intertwining"] = shift_res
    checks.append(prod <= 4 * T.n * root + 1e-9)
    if T.n == 2 and e:
        (A1, B1), (A2, B2) = (result.pencils[0].A, result.pencils[0].B), (result.pencils[1].A, result.pencils[1].B)
        I = np.eye(e)
        ident = {
            "A1A2": opnorm(A1 @ A2),
            "A1B2+B1A2-I": opnorm(A1 @ B2 + B1 @ A2 - I),
            "B1B2": opnorm(B1 @ B2),
            "A2A1": opnorm(A2 @ A1),
            "A2B1+B2A1-I": opnorm(A2 @ B1 + B2 @ A1 - I),
            "B2B1": opnorm(B2 @ B1),
        }
        rep["pencil_product"] = ident
        checks.extend(v <= PENCIL_TOL for v in ident.values())
    if T.n > 2:
        rep["commutation_defect"] = max(
            (symbol_commutator_sup(result.pencils[i], result.pencils[j])
             for i in range(T.n) for j in range(i + 1, T.n)), default=0.0)
    # converse direction: Pi* M_z^k M_z^{*k} Pi reproduces P^{*k} N P^k
    k = K // 2
    if e:
        tail_blocks = Pi[k * e:]
        from_pi = opnorm(adj(tail_blocks) @ tail_blocks)
    else:
        from_pi = 0.0
    direct = tail_value(N, P, k)
    rep["converse_tail_k"] = k
    rep["converse_tail"] = abs(from_pi - direct)
    checks.append(rep["converse_tail"] <= tail + 1e-8)
    rep["pi_norm"] = opnorm(Pi)
    if opnorm(N) <= 1.0:
        checks.append(rep["pi_norm"] <= 1 + 1e-8)
    rep["pass"] = bool(all(checks))
    return rep


def closed_form_pair_pi(a: float = 0.5, r: float = 1.0, s: float = 1.0, t: float = 1.0, depth: int = 24) -> BCLResult:
    """Closed-form Pi, U and P for T_1 = diag(a, a, 0), T_2 = diag(0, 1, 1),
    N = diag(r, s, t), written out independently of the construction."""
    c = np.sqrt(1 - a * a)
    Pi = np.zeros((4 * depth, 3), dtype=np.complex128)
    Pi[0, 0] = np.sqrt(r) * c
    Pi[1, 1] = np.sqrt(s) * c
    Pi[2, 2] = np.sqrt(t)
    Pi[3, 0] = a * np.sqrt(r)
    for k in range(1, depth):
        Pi[4 * k + 1, 1] = a ** k * np.sqrt(s) * c
    U = np.array([[-a, 0, 0, c], [0, 1, 0, 0], [0, 0, 1, 0], [c, 0, 0, a]], dtype=np.complex128)
    Pr = np.diag([0, 0, 0, 1]).astype(np.complex128)
    I = np.eye(4)
    phi1 = Pencil(Pr @ adj(U), (I - Pr) @ adj(U), U, Pr)
    phi2 = Pencil(U @ (I - Pr), U @ Pr, U, Pr)
    tail = s * a ** (2 * depth)
    return BCLResult(4, Pi, depth, tail, [phi1, phi2], {"U": U, "P": Pr}, {}, "pair-transfer-function-model")
