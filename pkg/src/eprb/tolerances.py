"""Numerical tolerances shared by every module.

One frozen :class:`Tolerances` value is active at a time.  The default profile
is what the library and tests use; the ``strict`` profile tightens the
validation and reconstruction gates for audits.  Switching profiles is scoped
with :func:`tolerance_profile`, which is backed by a context variable so
concurrent analyses never see each other's setting.
"""

from __future__ import annotations

import contextlib
import contextvars
import os
from dataclasses import asdict, dataclass, replace


@dataclass(frozen=True)
class Tolerances:
    name: str = "default"
    # Hermiticity, unitarity, normalization and trace checks.
    validation: float = 1e-9
    # Relative Frobenius residual of eig/svd reconstructions.
    reconstruction: float = 1e-10
    # Residual of psd_sqrt and polar reconstructions.
    sqrt_reconstruction: float = 1e-9
    # Agreement between independent routes to the same quantity.
    equivalence: float = 1e-6
    # Eigenvalues in [-clamp, 0) are set to zero; below that, reject.
    clamp: float = 1e-10
    # Eigenvalues at or above this count toward a support projector.
    support: float = 1e-9
    # Pairwise fidelity gate for dropping a coin-toss round.
    truncation: float = 1e-6
    # Channel register purity after the commit phase (warning only).
    channel_idle: float = 1e-6
    # Outcomes with smaller probability are omitted from conditioning.
    negligible_probability: float = 1e-12

    def as_dict(self) -> dict:
        return asdict(self)


DEFAULT = Tolerances()
STRICT = replace(
    DEFAULT,
    name="strict",
    validation=1e-11,
    reconstruction=1e-12,
    sqrt_reconstruction=1e-10,
    equivalence=1e-8,
    clamp=1e-12,
)
PROFILES = {"default": DEFAULT, "strict": STRICT}

_active: contextvars.ContextVar[Tolerances] = contextvars.ContextVar(
    "eprb_tolerances", default=DEFAULT
)

DEFAULT_MAX_DIM = 4096


def get() -> Tolerances:
    """Return the tolerance profile in effect for the current context."""
    return _active.get()


@contextlib.contextmanager
def tolerance_profile(profile: str | Tolerances):
    tol = PROFILES[profile] if isinstance(profile, str) else profile
    token = _active.set(tol)
    try:
        yield tol
    finally:
        _active.reset(token)


def max_dim() -> int:
    """Dimension cap for joint state spaces, overridable via ``EPRB_MAX_DIM``."""
    raw = os.environ.get("EPRB_MAX_DIM")
    if raw is None:
        return DEFAULT_MAX_DIM
    try:
        value = int(raw)
    except ValueError as exc:
        raise ValueError(f"EPRB_MAX_DIM must be an integer, got {raw!r}") from exc
    if value < 1:
        raise ValueError("EPRB_MAX_DIM must be positive")
    return value
