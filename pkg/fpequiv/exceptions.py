"""
Exception hierarchy for fpequiv.
"""
from typing import Optional


class FpEquivError(Exception):
    """Base class for every error raised by fpequiv."""


class FormatError(FpEquivError, ValueError):
    """Bit-vector width does not match the floating-point format."""


class DomainError(FpEquivError, ValueError):
    """Operand outside the normalized domain accepted by the adders."""


class CheckConfigError(FpEquivError, ValueError):
    """Checker configuration cannot be honoured (ceiling, drive mode, corpus)."""


class FaultSiteError(FpEquivError):
    """A fault mutation was invoked from a stage it does not belong to."""


class EvaluationError(FpEquivError):
    """A property referenced a signal that the trace does not carry."""


class PropertyError(FpEquivError):
    """Diagnostic raised while reading property text, annotated with its position."""

    def __init__(self, message: str, line: Optional[int] = None, col: Optional[int] = None):
        self.message = message
        self.line = line
        self.col = col
        # Path of the property file, filled in by callers that read one.
        self.source: Optional[str] = None
        super().__init__(self.__str__())

    def __str__(self) -> str:
        if self.line is None:
            return self.message
        return f"{self.line}:{self.col}: {self.message}"


class PropertyLexError(PropertyError):
    pass


class PropertySyntaxError(PropertyError):
    pass


class UnknownSignalError(PropertyError):
    pass


class DuplicatePropertyError(PropertyError):
    pass


class DanglingDirectiveError(PropertyError):
    pass


class DuplicateDirectiveError(PropertyError):
    pass


class LiteralWidthError(PropertyError):
    pass


class NamespaceError(PropertyError):
    """A property names a namespace that is not elaborated (spec.* in standalone mode)."""
