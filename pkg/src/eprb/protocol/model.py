"""Protocol values and honest execution.

A protocol lives on a :class:`~eprb.hilbert.SubsystemLayout` whose labels are
owned by Alice (``A``, ``A.*``), Bob (``B``, ``B.*``) or the channel (``C``,
``C.*``).  Each round is a unitary chosen by one party and acting on every
subsystem that party owns together with every channel subsystem, in layout
order.  Honest parties never measure mid-protocol: any randomness is an
explicit dice subsystem in the initial state.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

import numpy as np

from .. import numerics, tolerances
from ..errors import DimensionMismatch, ValidationError
from ..hilbert import (
    StateVector,
    SubsystemLayout,
    apply_matrix,
    apply_on,
    as_layout,
    owner,
    partial_trace,
    tensor,
)

ACTORS = ("A", "B")
OUTCOMES = ("0", "1", "invalid")


class ChannelNotIdleWarning(UserWarning):
    """The channel register is not in a fixed pure state after the commit phase."""


def other(party: str) -> str:
    return "B" if party == "A" else "A"


def party_labels(layout: SubsystemLayout, party: str) -> list[str]:
    return layout.owned_by(party)


def channel_labels(layout: SubsystemLayout) -> list[str]:
    return layout.owned_by("C")


def round_labels(layout: SubsystemLayout, actor: str) -> list[str]:
    """Subsystems a round by ``actor`` acts on: actor-owned plus channel, layout order."""
    chosen = set(layout.owned_by(actor)) | set(channel_labels(layout))
    return [label for label in layout.labels if label in chosen]


def bob_side_labels(layout: SubsystemLayout) -> list[str]:
    """Bob's machine together with the channel, layout order."""
    return round_labels(layout, "B")


@dataclass(frozen=True, eq=False)
class Round:
    actor: str
    matrix: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "matrix", numerics.as_matrix(self.matrix))


@dataclass(frozen=True)
class ExecutionTrace:
    bit: Optional[int]
    after_commit: StateVector
    after_open: StateVector
    snapshots: tuple[StateVector, ...] = ()


def _validate_layout(layout: SubsystemLayout, path: str = "subsystems"):
    for k, label in enumerate(layout.labels):
        if owner(label) is None:
            raise ValidationError(f"{path}[{k}].label", f"label {label!r} must be A, B, C or prefixed 'A.', 'B.', 'C.'")
    for party in ("A", "B", "C"):
        if not layout.owned_by(party):
            raise ValidationError(path, f"no subsystem owned by {party}")


def _validate_state(state: StateVector, expected: SubsystemLayout, path: str):
    if not isinstance(state, StateVector):
        raise ValidationError(path, "not a state vector")
    if state.layout != expected:
        raise ValidationError(path, f"layout {list(state.layout.entries)} != expected {list(expected.entries)}")
    norm = state.norm()
    if abs(norm - 1.0) > tolerances.get().validation:
        raise ValidationError(path, f"norm {norm:.12g} differs from 1")


def _validate_rounds(layout: SubsystemLayout, rounds: Sequence[Round], path: str, previous: Optional[str] = None):
    for k, rnd in enumerate(rounds):
        where = f"{path}[{k}]"
        if rnd.actor not in ACTORS:
            raise ValidationError(f"{where}.actor", f"actor must be 'A' or 'B', got {rnd.actor!r}")
        if previous is not None and rnd.actor == previous:
            raise ValidationError(f"{where}.actor", f"consecutive rounds by {rnd.actor}; rounds must alternate")
        d = layout.dim_of(round_labels(layout, rnd.actor))
        if rnd.matrix.shape != (d, d):
            raise ValidationError(f"{where}.matrix", f"shape {rnd.matrix.shape} but {rnd.actor}+channel dimension is {d}")
        defect = numerics.unitarity_defect(rnd.matrix)
        if defect > tolerances.get().validation:
            raise ValidationError(f"{where}.matrix", f"not unitary (max |U^dagger U - I| = {defect:.3g})")
        previous = rnd.actor
    return previous


def run_rounds(state: StateVector, rounds: Sequence[Round], snapshots: Optional[list] = None) -> StateVector:
    """Apply ``rounds`` in order; rounds are assumed already validated."""
    layout = state.layout
    for rnd in rounds:
        state = apply_on(state, round_labels(layout, rnd.actor), rnd.matrix, check=False)
        if snapshots is not None:
            snapshots.append(state)
    return state


def _check_projector_set(projectors, labels, layout, path):
    d = layout.dim_of(labels)
    tol = tolerances.get().validation
    if len(projectors) != 3:
        raise ValidationError(path, f"need 3 projectors (0, 1, invalid), got {len(projectors)}")
    for k, p in enumerate(projectors):
        if p.shape != (d, d):
            raise ValidationError(f"{path}[{k}]", f"shape {p.shape} but measured subsystems {labels} have dimension {d}")
        if numerics.hermitian_defect(p) > tol:
            raise ValidationError(f"{path}[{k}]", "projector is not Hermitian")
        if float(np.max(np.abs(p @ p - p))) > tol:
            raise ValidationError(f"{path}[{k}]", "matrix is not idempotent")
    for i in range(3):
        for j in range(i + 1, 3):
            if float(np.max(np.abs(projectors[i] @ projectors[j]))) > tol:
                raise ValidationError(path, f"projectors {OUTCOMES[i]} and {OUTCOMES[j]} are not orthogonal")
    if float(np.max(np.abs(sum(projectors) - np.eye(d)))) > tol:
        raise ValidationError(path, "projectors do not sum to the identity")


@dataclass(frozen=True, eq=False)
class CommitmentProtocol:
    """Bit commitment: ``alice0``/``alice1`` on Alice's subsystems, ``bob_init``
    on Bob's subsystems plus the channel, then fixed commit and open rounds.

    ``verification`` optionally maps a claimed bit to ``(labels, projector)``;
    when absent, Bob accepts a claim with the rank-1 projector onto the honest
    final joint state for that bit.
    """

    layout: SubsystemLayout
    alice0: StateVector
    alice1: StateVector
    bob_init: StateVector
    commit_rounds: tuple[Round, ...] = ()
    open_rounds: tuple[Round, ...] = ()
    verification: Optional[Mapping[int, tuple[tuple[str, ...], np.ndarray]]] = None
    name: str = "custom"
    params: Mapping[str, object] = field(default_factory=dict)

    kind = "commitment"

    def __post_init__(self):
        object.__setattr__(self, "layout", as_layout(self.layout))
        object.__setattr__(self, "commit_rounds", tuple(self.commit_rounds))
        object.__setattr__(self, "open_rounds", tuple(self.open_rounds))
        object.__setattr__(self, "params", dict(self.params))
        self.validate()

    @property
    def alice_labels(self) -> list[str]:
        return party_labels(self.layout, "A")

    @property
    def bob_labels(self) -> list[str]:
        return party_labels(self.layout, "B")

    @property
    def rounds(self) -> tuple[Round, ...]:
        return self.commit_rounds + self.open_rounds

    def validate(self):
        layout = self.layout
        _validate_layout(layout)
        _validate_state(self.alice0, layout.subset(self.alice_labels), "states.alice0")
        _validate_state(self.alice1, layout.subset(self.alice_labels), "states.alice1")
        _validate_state(self.bob_init, layout.subset(bob_side_labels(layout)), "states.bob_init")
        overlap = abs(self.alice0.inner(self.alice1))
        if overlap > tolerances.get().validation:
            raise ValidationError("states.alice1", f"alice0 and alice1 are not orthogonal (|overlap| = {overlap:.3g})")
        last = _validate_rounds(layout, self.commit_rounds, "commit_rounds")
        _validate_rounds(layout, self.open_rounds, "open_rounds", previous=last)
        if self.verification is not None:
            tol = tolerances.get().validation
            for bit in (0, 1):
                if bit not in self.verification:
                    raise ValidationError("verification", f"missing projector for bit {bit}")
                labels, proj = self.verification[bit]
                d = layout.dim_of(list(labels))
                if proj.shape != (d, d):
                    raise ValidationError(f"verification.{bit}.matrix", f"shape {proj.shape} but dimension is {d}")
                if float(np.max(np.abs(proj @ proj - proj))) > tol or numerics.hermitian_defect(proj) > tol:
                    raise ValidationError(f"verification.{bit}.matrix", "not an orthogonal projector")

    def initial_state(self, b: int) -> StateVector:
        alice = self.alice0 if b == 0 else self.alice1
        return tensor(alice, self.bob_init).reorder(self.layout.labels)


def run_honest(p: CommitmentProtocol, b: int, snapshots: bool = False) -> ExecutionTrace:
    """Honest commit then open with bit ``b``.

    With ``snapshots`` the trace also holds the initial state and the state
    after every round.
    """
    if b not in (0, 1):
        raise ValueError(f"bit must be 0 or 1, got {b!r}")
    shots = [] if snapshots else None
    state = p.initial_state(b)
    if shots is not None:
        shots.append(state)
    committed = run_rounds(state, p.commit_rounds, shots)
    final = run_rounds(committed, p.open_rounds, shots)
    return ExecutionTrace(b, committed, final, tuple(shots or ()))


def channel_idle_defect(p: CommitmentProtocol, states: Sequence[StateVector]) -> float:
    """How far the channel is from one fixed pure state after the commit phase."""
    chan = channel_labels(p.layout)
    rhos = [partial_trace(s, chan) for s in states]
    defect = max(1.0 - float(r.eigenvalues()[0]) for r in rhos)
    for r in rhos[1:]:
        diff = r.matrix - rhos[0].matrix
        defect = max(defect, 0.5 * float(np.sum(np.abs(np.linalg.eigvalsh(diff)))))
    return defect


def commitment_states(p: CommitmentProtocol) -> tuple[StateVector, StateVector]:
    """Joint states at the end of the commit phase for b = 0 and b = 1.

    Emits :class:`ChannelNotIdleWarning` when the channel is not left in a
    common pure state.
    """
    s0 = run_rounds(p.initial_state(0), p.commit_rounds)
    s1 = run_rounds(p.initial_state(1), p.commit_rounds)
    defect = channel_idle_defect(p, (s0, s1))
    if defect > tolerances.get().channel_idle:
        warnings.warn(
            f"channel is not idle after commit phase (defect {defect:.3g})",
            ChannelNotIdleWarning,
            stacklevel=2,
        )
    return s0, s1


def verify_opening(p: CommitmentProtocol, final_state: StateVector, claimed: int) -> float:
    """Probability that Bob accepts ``claimed`` on ``final_state``."""
    if final_state.layout != p.layout:
        raise DimensionMismatch("final state is not on the protocol layout")
    if claimed not in (0, 1):
        raise ValueError(f"claimed bit must be 0 or 1, got {claimed!r}")
    if p.verification is None:
        honest = run_honest(p, claimed).after_open
        prob = abs(honest.inner(final_state)) ** 2
    else:
        labels, proj = p.verification[claimed]
        out = apply_matrix(final_state.amplitudes, p.layout.dims, p.layout.positions(list(labels)), proj)
        prob = float(np.vdot(out, out).real)
    return float(min(max(prob, 0.0), 1.0))


@dataclass(frozen=True, eq=False)
class CoinTossProtocol:
    """Coin toss: product initial state, alternating rounds, and for each party
    three orthogonal projectors for outcomes ``0``, ``1`` and ``invalid``.

    A party's outcome measurement acts on the subsystems it owns, plus the
    channel if it holds the channel at the end (``channel_holder``): the
    receiver of the last round, or whoever is named for a zero-round protocol.
    """

    layout: SubsystemLayout
    init_a: StateVector
    init_bc: StateVector
    rounds: tuple[Round, ...]
    outcome_a: tuple[np.ndarray, ...]
    outcome_b: tuple[np.ndarray, ...]
    prescribed: tuple[float, float] = (0.5, 0.5)
    channel_holder: Optional[str] = None
    name: str = "custom"
    params: Mapping[str, object] = field(default_factory=dict)

    kind = "cointoss"

    def __post_init__(self):
        object.__setattr__(self, "layout", as_layout(self.layout))
        object.__setattr__(self, "rounds", tuple(self.rounds))
        object.__setattr__(self, "outcome_a", tuple(numerics.as_matrix(m) for m in self.outcome_a))
        object.__setattr__(self, "outcome_b", tuple(numerics.as_matrix(m) for m in self.outcome_b))
        object.__setattr__(self, "prescribed", tuple(float(x) for x in self.prescribed))
        object.__setattr__(self, "params", dict(self.params))
        if self.channel_holder is None:
            holder = other(self.rounds[-1].actor) if self.rounds else "B"
            object.__setattr__(self, "channel_holder", holder)
        self.validate()

    def outcome_labels(self, party: str) -> list[str]:
        if party == self.channel_holder:
            return round_labels(self.layout, party)
        return party_labels(self.layout, party)

    def outcome_projectors(self, party: str) -> tuple[np.ndarray, ...]:
        return self.outcome_a if party == "A" else self.outcome_b

    def validate(self):
        layout = self.layout
        _validate_layout(layout)
        _validate_state(self.init_a, layout.subset(party_labels(layout, "A")), "states.init_a")
        _validate_state(self.init_bc, layout.subset(bob_side_labels(layout)), "states.init_bc")
        _validate_rounds(layout, self.rounds, "rounds")
        if self.channel_holder not in ACTORS:
            raise ValidationError("channel_holder", f"must be 'A' or 'B', got {self.channel_holder!r}")
        if self.rounds and self.channel_holder != other(self.rounds[-1].actor):
            raise ValidationError("channel_holder", "must be the receiver of the last round")
        _check_projector_set(self.outcome_a, self.outcome_labels("A"), layout, "outcome_measurements.A")
        _check_projector_set(self.outcome_b, self.outcome_labels("B"), layout, "outcome_measurements.B")
        p0, p1 = self.prescribed
        if p0 <= 0 or p1 <= 0 or abs(p0 + p1 - 1.0) > tolerances.get().validation:
            raise ValidationError("prescribed", f"need two positive probabilities summing to 1, got {self.prescribed}")

    @property
    def n_rounds(self) -> int:
        return len(self.rounds)

    def initial_state(self) -> StateVector:
        return tensor(self.init_a, self.init_bc).reorder(self.layout.labels)

    def run(self, upto: Optional[int] = None, snapshots: Optional[list] = None) -> StateVector:
        """State after the first ``upto`` rounds (all rounds by default)."""
        rounds = self.rounds if upto is None else self.rounds[:upto]
        return run_rounds(self.initial_state(), rounds, snapshots)


def joint_distribution(p: CoinTossProtocol, state: Optional[StateVector] = None) -> np.ndarray:
    """3x3 array of P(Alice outcome x, Bob outcome y) on the final state."""
    state = p.run() if state is None else state
    layout = p.layout
    pos_a = layout.positions(p.outcome_labels("A"))
    pos_b = layout.positions(p.outcome_labels("B"))
    joint = np.zeros((3, 3))
    for x, pa in enumerate(p.outcome_a):
        phi = apply_matrix(state.amplitudes, layout.dims, pos_a, pa)
        for y, pb in enumerate(p.outcome_b):
            chi = apply_matrix(phi, layout.dims, pos_b, pb)
            joint[x, y] = float(np.vdot(chi, chi).real)
    return joint
