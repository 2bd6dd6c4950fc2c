"""Simulator for two-party quantum protocols built from alternating unitary rounds."""

__version__ = "0.1.0"

from .errors import EPRBError, InputError, NumericalFailure  # noqa: E402

__all__ = ["EPRBError", "InputError", "NumericalFailure", "__version__"]
