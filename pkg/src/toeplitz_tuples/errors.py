"""Exception hierarchy shared by all modules.

Numerical failures (convergence, violated hypotheses) derive from
``NumericalError``; malformed input derives from ``InputError``.  The CLI maps
the two families to exit codes 3 and 2.
"""

from __future__ import annotations


class ToeplitzError(Exception):
    """Base class for every error raised by this package."""


class InputError(ToeplitzError):
    pass


class NumericalError(ToeplitzError):
    pass


class DimMismatch(InputError):
    pass


class NotFinite(InputError):
    pass


class UnknownFamily(InputError):
    pass


class UnknownFixture(InputError):
    pass


class NotHermitian(NumericalError):
    pass


class NotPSD(NumericalError):
    pass


class MajorizationFails(NumericalError):
    def __init__(self, margin: float):
        super().__init__(f"A*A <= B*B violated, min eigenvalue of B*B - A*A is {margin:.3e}")
        self.margin = margin


class RankMismatch(NumericalError):
    pass


class NotIsometricAction(NumericalError):
    pass


class NotCommuting(NumericalError):
    def __init__(self, i: int, j: int, residual: float):
        super().__init__(f"T_{i} and T_{j} do not commute (residual {residual:.3e})")
        self.i, self.j, self.residual = i, j, residual


class NotContraction(NumericalError):
    def __init__(self, i: int, norm: float):
        super().__init__(f"T_{i} is not a contraction (norm {norm:.15g})")
        self.i, self.norm = i, norm


class TupleInvalid(NumericalError):
    """Collects every violation found while validating a tuple."""

    def __init__(self, violations: list[ToeplitzError]):
        super().__init__("; ".join(str(v) for v in violations))
        self.violations = violations


class NotConverged(NumericalError):
    def __init__(self, iterations: int, last_delta: float):
        super().__init__(f"no convergence after {iterations} iterations (last delta {last_delta:.3e})")
        self.iterations, self.last_delta = iterations, last_delta


class NotStabilized(NumericalError):
    def __init__(self, m_max: int, last_delta: float):
        super().__init__(f"Cesaro means did not stabilize up to m={m_max} (last delta {last_delta:.3e})")
        self.m_max, self.last_delta = m_max, last_delta


class ZeroQT(NumericalError):
    pass


class NotToeplitz(NumericalError):
    pass


class NotMonotone(NumericalError):
    pass


class NotUnitary(NumericalError):
    pass


class NotPureLower(NumericalError):
    pass


class NeedAtLeastThree(InputError):
    pass


class NotIsometricPencil(NumericalError):
    pass


class HypothesisFails(NumericalError):
    def __init__(self, identity: str, residual: float):
        super().__init__(f"hypothesis '{identity}' fails with residual {residual:.3e}")
        self.identity, self.residual = identity, residual


class CertificateFails(NumericalError):
    """A constructed object failed its own post-construction check."""

    def __init__(self, name: str, residual: float, bound: float):
        super().__init__(f"certificate '{name}' failed: {residual:.3e} > {bound:.3e}")
        self.name, self.residual, self.bound = name, residual, bound


class ParseError(InputError):
    """Malformed input file; the message carries the line and column."""
