"""Upper and lower T-Toeplitz operators, the splitting X = U -/+ N and the
cone of positive pure lower operators."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import CertificateFails, NotConverged, NotMonotone
from .matcore import _check_hermitian, adj, as_matrix, max_eigenvalue, min_eigenvalue, opnorm
from .toeplitz import canonical_isometric_pe, power_limit, toeplitz_residual
from .tuples import OperatorTuple, is_adjoint_pure, product_contraction

HERMITIAN_TOL = 1e-10
ORDER_TOL = 1e-9
TAIL_TOL = 1e-7
PLATEAU_WINDOW = 100
PLATEAU_RATIO = 1e-9

LABELS = ("toeplitz", "upper", "lower", "pure_lower_positive", "none")


@dataclass
class Decomposition:
    """X = U - N (orientation "upper") or X = U + N (orientation "lower")."""

    U: np.ndarray
    N: np.ndarray
    orientation: str
    residuals: dict = field(default_factory=dict)
    tail_depth: int = 0
    stages: int = 0

    def recombine(self) -> np.ndarray:
        return self.U - self.N if self.orientation == "upper" else self.U + self.N


def _symmetrize(X, dim: int) -> np.ndarray:
    return _check_hermitian(as_matrix(X, dim, dim), HERMITIAN_TOL)


def defect_spectra(X: np.ndarray, T: OperatorTuple) -> list[tuple[float, float]]:
    """(min, max) eigenvalue of T_i* X T_i - X for each i."""
    out = []
    for Ti in T:
        D = adj(Ti) @ X @ Ti - X
        out.append((min_eigenvalue(D), max_eigenvalue(D)))
    return out


def tail_profile(N: np.ndarray, T: OperatorTuple, threshold: float = TAIL_TOL, max_iter: int = 10_000):
    """Smallest k with ||P^{*k} N P^k|| <= threshold, by direct iteration.

    Returns ``(k, value)``; ``k`` is ``None`` when the sequence plateaus
    (relative decrease below 1e-9 for 100 consecutive steps) or max_iter is
    reached without crossing the threshold.
    """
    P = product_contraction(T)
    A = N.copy()
    val = opnorm(A)
    if val <= threshold:
        return 0, val
    flat = 0
    for k in range(1, max_iter + 1):
        A = adj(P) @ A @ P
        new = opnorm(A)
        if new <= threshold:
            return k, new
        flat = flat + 1 if val - new < PLATEAU_RATIO * val else 0
        val = new
        if flat >= PLATEAU_WINDOW:
            return None, val
    return None, val


def classify(X, T: OperatorTuple, max_iter: int = 10_000) -> str:
    """One of "toeplitz", "upper", "lower", "pure_lower_positive", "none"."""
    X = _symmetrize(X, T.dim)
    tol = ORDER_TOL * max(1.0, opnorm(X))
    spectra = defect_spectra(X, T)
    if all(lo >= -tol and hi <= tol for lo, hi in spectra):
        return "toeplitz"
    if all(hi <= tol for _, hi in spectra):
        if min_eigenvalue(X) >= -tol:
            k, _ = tail_profile(X, T, TAIL_TOL, max_iter)
            if k is not None:
                return "pure_lower_positive"
        return "lower"
    if all(lo >= -tol for lo, _ in spectra):
        return "upper"
    return "none"


def decompose(X, T: OperatorTuple, tol: float = 1e-12, max_iter: int = 10_000) -> Decomposition:
    """Split a monotone X into its Toeplitz part U and pure part N.

    U is the limit of P^{*k} X P^k along k = 1, 2, 4, ...; the sequence is
    monotone in k because X is upper or lower, and the diagonal multi-indices
    are cofinal, so this is the full limit of the net.
    """
    X = _symmetrize(X, T.dim)
    label = classify(X, T, max_iter)
    if label == "none":
        raise NotMonotone("X satisfies neither T_i* X T_i >= X nor T_i* X T_i <= X for all i")
    if label == "toeplitz":
        dec = Decomposition(X.copy(), np.zeros_like(X), "lower")
        dec.residuals = _certify(dec, X, T, max_iter)
        return dec
    P = product_contraction(T)
    U, stages, _, _ = power_limit(P, X, tol, max_iter)
    if label == "upper":
        dec = Decomposition(U, U - X, "upper", stages=stages)
    else:
        dec = Decomposition(U, X - U, "lower", stages=stages)
    dec.residuals = _certify(dec, X, T, max_iter)
    dec.tail_depth = dec.residuals["tail_depth"]
    return dec


def _certify(dec: Decomposition, X: np.ndarray, T: OperatorTuple, max_iter: int) -> dict:
    scale = max(1.0, opnorm(X))
    res = {
        "toeplitz_U": toeplitz_residual(dec.U, T, T),
        "recombine": opnorm(X - dec.recombine()),
        "N_min_eig": min_eigenvalue(dec.N) if dec.N.size else 0.0,
        "N_lower_max_eig": max((hi for _, hi in defect_spectra(dec.N, T)), default=0.0),
    }
    k, tail = tail_profile(dec.N, T, TAIL_TOL, max_iter)
    res["tail_depth"] = -1 if k is None else k
    res["tail"] = tail
    checks = [
        ("toeplitz_U", res["toeplitz_U"], 1e-7 * scale),
        ("recombine", res["recombine"], 1e-9 * scale),
        ("N_psd", -res["N_min_eig"], ORDER_TOL * scale),
        ("N_lower", res["N_lower_max_eig"], ORDER_TOL * scale),
    ]
    for name, value, bound in checks:
        if value > bound:
            raise CertificateFails(name, value, bound)
    if k is None:
        raise NotConverged(max_iter, tail)
    return res


def upper_cone_trivial(T: OperatorTuple) -> bool:
    """True iff the only positive upper T-Toeplitz operator is 0."""
    return is_adjoint_pure(T)


def upper_cone_report(T: OperatorTuple) -> dict:
    """``upper_cone_trivial`` plus the witness J_T* J_T when the cone is nonzero."""
    trivial = upper_cone_trivial(T)
    out = {"trivial": trivial, "witness": None}
    if not trivial:
        pe = canonical_isometric_pe(T)
        W = adj(pe.J) @ pe.J
        out["witness"] = W
        out["witness_norm"] = opnorm(W)
        out["witness_upper_min_eig"] = min(lo for lo, _ in defect_spectra(W, T))
    return out
