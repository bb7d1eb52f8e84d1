"""Exception hierarchy.

Verification routines raise a subclass of :class:`VerificationError` when a
check fails; the failing :class:`~symcalc.report.CheckReport` rides along as
``err.report`` so the harness can record it instead of crashing.
"""


class SymcalcError(Exception):
    """Base class for every error raised by this package."""


class InputError(SymcalcError):
    """Bad user input: unknown scenario, malformed file, bad parameter."""


class UnknownScenario(InputError):
    pass


class ParseError(InputError):
    def __init__(self, message, line=None):
        self.line = line
        where = f" (line {line})" if line is not None else ""
        super().__init__(f"{message}{where}")


class NegativeMass(InputError):
    pass


class VerificationError(SymcalcError):
    """A mathematical property failed at some sample location."""

    def __init__(self, message, report=None, location=None, residual=None):
        super().__init__(message)
        self.report = report
        self.location = location
        self.residual = residual


class NonHermitianSymbol(VerificationError):
    pass


class NonHermitianResult(VerificationError):
    pass


class DegeneratePrincipalSymbol(VerificationError):
    pass


class SingularMetric(VerificationError):
    pass


class WrongSignature(VerificationError):
    pass


class NearDegenerate(WrongSignature):
    pass


class OrthonormalityViolation(VerificationError):
    pass


class NotSpecialLinear(VerificationError):
    pass


class CovarianceViolation(VerificationError):
    pass


class IllConditionedFrame(VerificationError):
    pass


class AdjugationLawViolation(VerificationError):
    pass


class SingularJacobian(VerificationError):
    pass


class MetricMismatch(VerificationError):
    pass


class NotUnitValue(VerificationError):
    pass


class VanishingT(VerificationError):
    pass


class InconsistentSigns(VerificationError):
    pass


class NotInPositiveClass(VerificationError):
    pass


class WitnessFails(VerificationError):
    pass
