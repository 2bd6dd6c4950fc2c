"""Round-count bound for gradual two-party information release.

If neither party may ever be more than ``epsilon`` bits ahead of the other
and both must end up with ``target`` bits, the walk needs at least
``target / epsilon`` rounds.  Information here is an abstract per-round gain
supplied by the caller; nothing is computed from quantum states.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

from .errors import BadParams, NonPositiveEpsilon

LEDGER_SLACK = 1e-12


def _check_epsilon(epsilon: float) -> float:
    epsilon = float(epsilon)
    if not math.isfinite(epsilon) or epsilon <= 0:
        raise NonPositiveEpsilon(f"epsilon must be a positive number of bits, got {epsilon!r}")
    return epsilon


def min_rounds(epsilon: float, target: float = 1.0) -> int:
    """Smallest ``N`` with ``N * epsilon >= target`` (evaluated in floating point).

    Raises:
        NonPositiveEpsilon: for ``epsilon <= 0`` or non-finite input.
    """
    epsilon = _check_epsilon(epsilon)
    target = float(target)
    if not math.isfinite(target) or target <= 0:
        raise BadParams(f"target must be a positive number of bits, got {target!r}")
    n = max(1, math.ceil(target / epsilon))
    while n > 1 and (n - 1) * epsilon >= target:
        n -= 1
    while n * epsilon < target:
        n += 1
    return n


def min_rounds_table(epsilons: Iterable[float], target: float = 1.0) -> list[tuple[float, int]]:
    return [(float(e), min_rounds(e, target)) for e in epsilons]


@dataclass(frozen=True)
class LedgerTrace:
    per_round: tuple[tuple[str, float, float], ...]
    epsilon: float
    target: float
    first_violation: Optional[int]

    @property
    def valid(self) -> bool:
        return self.first_violation is None

    @property
    def final(self) -> tuple[float, float]:
        if not self.per_round:
            return (0.0, 0.0)
        _, a, b = self.per_round[-1]
        return (a, b)

    @property
    def reached(self) -> bool:
        a, b = self.final
        return a >= self.target - LEDGER_SLACK and b >= self.target - LEDGER_SLACK

    @property
    def respects_bound(self) -> bool:
        """A violation-free schedule that completes is at least ``min_rounds`` long."""
        if not (self.valid and self.reached):
            return True
        return len(self.per_round) >= min_rounds(self.epsilon, self.target)

    def as_dict(self) -> dict:
        return {
            "epsilon": self.epsilon,
            "target": self.target,
            "rounds": [{"actor": actor, "info_A": a, "info_B": b} for actor, a, b in self.per_round],
            "valid": self.valid,
            "first_violation": self.first_violation,
            "reached_target": self.reached,
            "min_rounds": min_rounds(self.epsilon, self.target),
            "respects_bound": self.respects_bound,
        }


def ledger_simulate(gains: Sequence[tuple[str, float]], epsilon: float, target: float = 1.0) -> LedgerTrace:
    """Accumulate per-round gains and flag the first round (1-based) where the
    two parties' information differs by more than ``epsilon``.

    Information saturates at ``target``.
    """
    epsilon = _check_epsilon(epsilon)
    info = {"A": 0.0, "B": 0.0}
    rows = []
    violation = None
    for k, (actor, bits) in enumerate(gains, start=1):
        if actor not in info:
            raise BadParams(f"round {k}: actor must be 'A' or 'B', got {actor!r}")
        bits = float(bits)
        if not math.isfinite(bits) or bits < 0:
            raise BadParams(f"round {k}: gain must be a non-negative number of bits, got {bits!r}")
        info[actor] = min(info[actor] + bits, target)
        rows.append((actor, info["A"], info["B"]))
        if violation is None and abs(info["A"] - info["B"]) > epsilon + LEDGER_SLACK:
            violation = k
    return LedgerTrace(tuple(rows), epsilon, float(target), violation)


def alternating_schedule(epsilon: float, target: float = 1.0) -> list[tuple[str, float]]:
    """A, B, A, B, ... each gaining ``epsilon`` until both reach ``target``."""
    n = min_rounds(epsilon, target)
    return [(actor, float(epsilon)) for _ in range(n) for actor in ("A", "B")]


def enumerate_schedules(epsilon: float, length: int):
    """Every schedule of ``length`` rounds over actors {A, B} and gains {0, epsilon}."""
    steps = [(actor, gain) for actor in ("A", "B") for gain in (0.0, float(epsilon))]
    return itertools.product(steps, repeat=length)


def shortest_completing_schedule(epsilon: float, max_length: int, target: float = 1.0) -> Optional[int]:
    """Brute force: the shortest length <= ``max_length`` of a violation-free
    schedule over the {0, epsilon} grid that brings both parties to ``target``,
    or None if there is none."""
    epsilon = _check_epsilon(epsilon)
    for length in range(max_length + 1):
        for schedule in enumerate_schedules(epsilon, length):
            trace = ledger_simulate(schedule, epsilon, target)
            if trace.valid and trace.reached:
                return length
    return None
