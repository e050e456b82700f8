"""Toeplitz operators for tuples of commuting contractions: solution spaces,
pseudo-extensions, upper/lower decompositions and transfer-function models."""

from .bcl import BCLResult, Pencil, TruncatedHardyOp, construct_pair, construct_tuple, mult_op, transfer_lift, verify_bcl
from .cross import CesaroCertificate, canonical_correspondence, canonical_unitary_uniqueness, cesaro_toeplitz, necessary_conditions
from .errors import InputError, NumericalError, ToeplitzError
from .toeplitz import (
    PseudoExtension,
    SolutionSpace,
    canonical_isometric_pe,
    compute_qt,
    factorize_positive,
    qt_projection_check,
    solution_space,
    structure_checks,
    toeplitz_residual,
    unitary_intertwiner_subspaces,
)
from .tuples import MultiIndex, OperatorTuple, is_adjoint_pure, power, product_contraction, random_commuting_tuple, validate
from .updown import Decomposition, classify, decompose, upper_cone_trivial

__version__ = "0.1.0"
