"""Exception hierarchy.

Every library error derives from :class:`EPRBError`.  Input problems also
derive from :class:`ValueError` so generic callers can catch them the usual
way; :class:`NumericalFailure` marks a decomposition whose reconstruction
residual exceeded its bound, which the CLI maps to exit code 3.
"""


class EPRBError(Exception):
    pass


class InputError(EPRBError, ValueError):
    pass


class NotHermitian(InputError):
    pass


class NotPSD(InputError):
    pass


class NotUnitary(InputError):
    pass


class DimensionMismatch(InputError):
    pass


class DimensionCapExceeded(InputError):
    pass


class NonFinite(InputError):
    pass


class LabelClash(InputError):
    pass


class UnknownLabel(InputError):
    pass


class EmptyKeepSet(InputError):
    pass


class InvalidCut(InputError):
    pass


class NotNormalized(InputError):
    pass


class ParseError(InputError):
    pass


class ValidationError(InputError):
    """A protocol document or object failed validation at ``field``."""

    def __init__(self, field: str, reason: str):
        self.field = field
        self.reason = reason
        super().__init__(f"{field}: {reason}")


class UnknownBuiltin(InputError):
    pass


class BadParams(InputError):
    pass


class NotIdealHiding(InputError):
    pass


class LastRoundActorMismatch(InputError):
    pass


class TruncationUnsound(EPRBError):
    def __init__(self, max_fidelity: float, reason: str = ""):
        self.max_fidelity = float(max_fidelity)
        self.reason = reason
        msg = f"truncation unsound: max pairwise fidelity {self.max_fidelity:.6g}"
        if reason:
            msg += f" ({reason})"
        super().__init__(msg)


class NonLocalOperation(InputError):
    pass


class NonPositiveEpsilon(InputError):
    pass


class NumericalFailure(EPRBError, ArithmeticError):
    pass
