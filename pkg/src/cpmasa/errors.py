"""Exception taxonomy for cpmasa.

Negative answers of decision procedures (a map without an invariant masa, a
pair of generator presentations that are not gauge equivalent) are results,
not errors, and are returned as values.  Exceptions are reserved for inputs
that violate a documented precondition or for numerical breakdown.
"""

__all__ = [
    "CpmasaError",
    "DimensionMismatch",
    "NotSelfAdjoint",
    "NotUnital",
    "NotInvariant",
    "NotMinimal",
    "DegenerateSpectrum",
    "PreconditionFailed",
    "PatternExplosion",
    "NumericalFailure",
    "HypothesisFailed",
    "AssertionFailure",
    "ToleranceInvalid",
    "ParseError",
]


class CpmasaError(Exception):
    """Base class for every exception raised by this package."""


class DimensionMismatch(CpmasaError):
    """Operands do not share the required square shape or ambient dimension."""


class NotSelfAdjoint(CpmasaError):
    """A matrix required to be self-adjoint is not, beyond tolerance."""


class NotUnital(CpmasaError):
    """A map required to be unital fails T(1) = 1 beyond tolerance."""


class NotInvariant(CpmasaError):
    """A subalgebra required to be invariant under the given map is not."""


class NotMinimal(CpmasaError):
    """A Kraus family required to be minimal (with the identity adjoined,
    where the operation says so) is linearly dependent."""


class DegenerateSpectrum(CpmasaError):
    """A self-adjoint element has repeated eigenvalues, so it does not
    generate a maximal abelian subalgebra."""


class PreconditionFailed(CpmasaError):
    """A documented structural precondition of the operation is violated."""


class PatternExplosion(CpmasaError):
    """A combinatorial enumeration would exceed the supported size."""


class NumericalFailure(CpmasaError):
    """A numerical kernel produced non-finite output or failed to converge."""


class HypothesisFailed(CpmasaError):
    """A structural hypothesis the construction relies on does not hold for
    the given input, so the construction cannot proceed."""


class AssertionFailure(CpmasaError):
    """A report assertion requested on the command line failed."""


class ToleranceInvalid(CpmasaError):
    """Tolerance parameters are non-finite or negative."""


class ParseError(CpmasaError):
    """Input file or payload could not be parsed into matrices."""
