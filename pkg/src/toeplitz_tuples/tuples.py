"""Commuting contraction tuples: validation, multi-index powers, generators."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import (
    DimMismatch,
    NotCommuting,
    NotContraction,
    TupleInvalid,
    UnknownFamily,
)
from .matcore import adj, as_matrix, opnorm, spectral_radius

TOL_COMMUTE = 1e-10
TOL_CONTRACT = 1e-10
PURITY_MARGIN = 1e-10

FAMILIES = ("joint-diagonal", "joint-triangular", "polynomials-of-one-matrix")


@dataclass(frozen=True)
class OperatorTuple:
    """n operators on a common space C^dim.

    Build instances through ``validate``; ``commuting=False`` marks tuples
    (such as lifted BCL tuples) that were checked without the commutator test.
    """

    ops: tuple
    tol_commute: float = TOL_COMMUTE
    tol_contract: float = TOL_CONTRACT
    commuting: bool = True

    @property
    def n(self) -> int:
        return len(self.ops)

    @property
    def dim(self) -> int:
        return self.ops[0].shape[0]

    def __getitem__(self, i: int) -> np.ndarray:
        return self.ops[i]

    def __iter__(self):
        return iter(self.ops)

    def __len__(self) -> int:
        return len(self.ops)

    def adjoint(self) -> "OperatorTuple":
        return OperatorTuple(tuple(adj(A) for A in self.ops), self.tol_commute, self.tol_contract, self.commuting)

    def identity(self) -> np.ndarray:
        return np.eye(self.dim, dtype=np.complex128)


@dataclass(frozen=True, order=True)
class MultiIndex:
    components: tuple = field(default_factory=tuple)

    def __post_init__(self):
        comps = tuple(int(c) for c in self.components)
        if any(c < 0 for c in comps):
            raise ValueError(f"multi-index components must be nonnegative, got {comps}")
        object.__setattr__(self, "components", comps)

    def __len__(self) -> int:
        return len(self.components)

    def __add__(self, other: "MultiIndex") -> "MultiIndex":
        if len(self) != len(other):
            raise DimMismatch("multi-indices of different length")
        return MultiIndex(tuple(a + b for a, b in zip(self.components, other.components)))

    def le(self, other: "MultiIndex") -> bool:
        """Componentwise partial order."""
        return all(a <= b for a, b in zip(self.components, other.components))

    @classmethod
    def unit(cls, n: int, i: int) -> "MultiIndex":
        return cls(tuple(1 if j == i else 0 for j in range(n)))

    @classmethod
    def diagonal(cls, n: int, k: int) -> "MultiIndex":
        return cls((k,) * n)


def validate(ops: Sequence, tol_commute: float = TOL_COMMUTE, tol_contract: float = TOL_CONTRACT,
             check_commute: bool = True) -> OperatorTuple:
    """Check squareness, common size, commutativity and contractivity.

    All violations are collected; a single one is raised as is, several are
    wrapped in ``TupleInvalid``.
    """
    mats = [as_matrix(A) for A in ops]
    if not mats:
        raise DimMismatch("empty tuple")
    d = mats[0].shape[0]
    for i, A in enumerate(mats):
        if A.shape != (d, d):
            raise DimMismatch(f"operator {i + 1} has shape {A.shape}, expected ({d}, {d})")
    violations = []
    if check_commute:
        for i in range(len(mats)):
            for j in range(i + 1, len(mats)):
                res = opnorm(mats[i] @ mats[j] - mats[j] @ mats[i])
                if res > tol_commute:
                    violations.append(NotCommuting(i + 1, j + 1, res))
    for i, A in enumerate(mats):
        nrm = opnorm(A)
        if nrm > 1 + tol_contract:
            violations.append(NotContraction(i + 1, nrm))
    if len(violations) == 1:
        raise violations[0]
    if violations:
        raise TupleInvalid(violations)
    return OperatorTuple(tuple(mats), tol_commute, tol_contract, check_commute)


def power(T: OperatorTuple, alpha) -> np.ndarray:
    """T_1^a_1 ... T_n^a_n, multiplied left to right."""
    comps = alpha.components if isinstance(alpha, MultiIndex) else tuple(alpha)
    if len(comps) != T.n:
        raise DimMismatch(f"multi-index has {len(comps)} components, tuple has {T.n}")
    out = T.identity()
    for A, k in zip(T.ops, comps):
        if k:
            out = out @ np.linalg.matrix_power(A, int(k))
    return out


def product_contraction(T: OperatorTuple) -> np.ndarray:
    out = T.identity()
    for A in T.ops:
        out = out @ A
    return out


def product_without(T: OperatorTuple, i: int) -> np.ndarray:
    """Product of all operators except the i-th (0-based)."""
    out = T.identity()
    for j, A in enumerate(T.ops):
        if j != i:
            out = out @ A
    return out


def is_adjoint_pure(T: OperatorTuple) -> bool:
    # For a contraction P, P^k -> 0 iff its spectral radius is below 1.
    return spectral_radius(product_contraction(T)) < 1 - PURITY_MARGIN


def commutator_residual(T: OperatorTuple) -> float:
    worst = 0.0
    for i in range(T.n):
        for j in range(i + 1, T.n):
            worst = max(worst, opnorm(T[i] @ T[j] - T[j] @ T[i]))
    return worst


# --- generators -------------------------------------------------------------

def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    Z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    Q, R = np.linalg.qr(Z)
    d = np.diag(R)
    return Q * (d / np.abs(d))


def _phase(rng: np.random.Generator, root_order: int | None) -> complex:
    if root_order:
        return complex(np.exp(2j * np.pi * rng.integers(root_order) / root_order))
    return complex(np.exp(2j * np.pi * rng.random()))


def _joint_diagonal(dim, n, rng, root_order, p_unitary, r_max, p_unimodular=0.3):
    lam = np.zeros((n, dim), dtype=np.complex128)
    for j in range(dim):
        all_unimodular = rng.random() < p_unitary
        for i in range(n):
            if all_unimodular or rng.random() < p_unimodular:
                lam[i, j] = _phase(rng, root_order)
            else:
                lam[i, j] = r_max * rng.random() * _phase(rng, root_order)
        if not all_unimodular and np.allclose(np.abs(lam[:, j]), 1.0):
            i = int(rng.integers(n))
            lam[i, j] *= r_max * rng.random()
    W = random_unitary(dim, rng)
    return [W @ np.diag(lam[i]) @ adj(W) for i in range(n)]


def _upper_toeplitz(coeffs, size):
    out = np.zeros((size, size), dtype=np.complex128)
    for k, c in enumerate(coeffs[:size]):
        out += c * np.eye(size, k=k)
    return out


def _joint_triangular(dim, n, rng, root_order, p_unitary, r_max):
    u = int(rng.integers(1, dim)) if rng.random() < p_unitary else 0
    s = dim - u
    W = random_unitary(dim, rng)
    ops = []
    for _ in range(n):
        block = np.zeros((dim, dim), dtype=np.complex128)
        for j in range(u):
            block[j, j] = _phase(rng, root_order)
        coeffs = [r_max * rng.random() * _phase(rng, root_order)]
        coeffs += list(0.5 * (rng.standard_normal(3) + 1j * rng.standard_normal(3)))
        tri = _upper_toeplitz(coeffs, s)
        tri /= max(1.0, opnorm(tri))
        block[u:, u:] = tri
        ops.append(W @ block @ adj(W))
    return ops


def _polynomials(dim, n, rng, root_order, p_unitary, r_max):
    u = int(rng.integers(1, dim)) if rng.random() < p_unitary else 0
    s = dim - u
    base = np.zeros((dim, dim), dtype=np.complex128)
    for j in range(u):
        base[j, j] = _phase(rng, root_order)
    C = rng.standard_normal((s, s)) + 1j * rng.standard_normal((s, s))
    if s:
        C *= r_max * (0.5 + 0.5 * rng.random()) / opnorm(C)
    base[u:, u:] = C
    W = random_unitary(dim, rng)
    ops = []
    for _ in range(n):
        if rng.random() < 0.7:
            k = int(rng.integers(1, 4))
            coeffs = np.zeros(k + 1, dtype=np.complex128)
            coeffs[k] = _phase(rng, root_order)
        else:
            coeffs = rng.standard_normal(4) + 1j * rng.standard_normal(4)
            coeffs *= (0.5 + 0.5 * rng.random()) / np.sum(np.abs(coeffs))
        val = np.zeros((dim, dim), dtype=np.complex128)
        pw = np.eye(dim, dtype=np.complex128)
        for c in coeffs:
            val += c * pw
            pw = pw @ base
        ops.append(W @ val @ adj(W))
    return ops


_GENERATORS = {
    "joint-diagonal": _joint_diagonal,
    "joint-triangular": _joint_triangular,
    "polynomials-of-one-matrix": _polynomials,
}


def random_commuting_tuple(dim: int, n: int, family: str, seed: int, *, root_order: int | None = None,
                           p_unitary: float = 0.35, r_max: float = 0.95,
                           p_unimodular: float = 0.3) -> OperatorTuple:
    """Reproducible random tuple of commuting contractions.

    ``p_unitary`` controls how often a unimodular (unitary) part is planted,
    ``r_max`` bounds the modulus of the remaining spectrum, and
    ``root_order`` restricts unimodular phases to roots of unity of that
    order (useful when two independent tuples should share spectrum).
    For the joint-diagonal family ``p_unimodular`` is the chance that a
    single operator gets a unimodular eigenvalue at a non-unitary index;
    ``p_unitary=0, p_unimodular=0`` yields strict contractions.
    """
    try:
        gen = _GENERATORS[family]
    except KeyError:
        raise UnknownFamily(f"unknown family {family!r}; expected one of {FAMILIES}") from None
    rng = np.random.default_rng(seed)
    if family == "joint-diagonal":
        ops = gen(dim, n, rng, root_order, p_unitary, r_max, p_unimodular)
    else:
        ops = gen(dim, n, rng, root_order, p_unitary, r_max)
    T = validate(ops, tol_commute=1e-12, tol_contract=1e-12)
    return OperatorTuple(T.ops)
