"""Ideal coin tossing: condition checks, last-round conditioning, truncation
and backward induction down to a protocol with no communication at all.

Conventions for a round about to be removed: the *sender* is the actor of the
last round and the *receiver* is the other party.  Just before that round the
sender holds the channel, so the sender's final outcome can be read off the
pre-transmission state by pulling the sender's outcome projectors back
through the last unitary.  If the receiver's own subsystems already determine
that outcome (pairwise fidelities ~ 0), the round carries nothing needed for
the result and can be dropped.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import numerics, tolerances
from .errors import (
    EPRBError,
    DimensionMismatch,
    LastRoundActorMismatch,
    NonLocalOperation,
    TruncationUnsound,
    UnknownLabel,
)
from .fidelity import fidelity_closed
from .hilbert import (
    DensityMatrix,
    StateVector,
    apply_matrix,
    apply_on,
    embed_operator,
    mutual_information,
    partial_trace,
    tensor,
)
from .protocol.model import (
    OUTCOMES,
    CoinTossProtocol,
    joint_distribution,
    other,
    party_labels,
    round_labels,
)


def binary_entropy(probabilities: Sequence[float]) -> float:
    p = np.asarray(probabilities, dtype=float)
    p = p[p > 0]
    return float(-np.sum(p * np.log2(p)))


def classical_mutual_information(joint: np.ndarray) -> float:
    """Mutual information in bits of a joint outcome table."""
    joint = np.asarray(joint, dtype=float)
    joint = np.clip(joint, 0.0, None)
    total = joint.sum()
    if total <= 0:
        return 0.0
    joint = joint / total
    return binary_entropy(joint.sum(axis=1)) + binary_entropy(joint.sum(axis=0)) - binary_entropy(joint.ravel())


# ---------------------------------------------------------------- ideal check


@dataclass(frozen=True, eq=False)
class IdealCheck:
    joint: np.ndarray
    disagreement: float
    outcome_probabilities: tuple[float, float]
    prescribed: tuple[float, float]
    prescribed_deviation: float
    invalid_probability: float
    last_round_fidelity: Optional[float]
    agreement_ok: bool
    prescribed_ok: bool
    no_invalid_ok: bool
    last_round_ok: bool

    @property
    def honest_ok(self) -> bool:
        return self.agreement_ok and self.prescribed_ok and self.no_invalid_ok

    @property
    def ideal(self) -> bool:
        return self.honest_ok and self.last_round_ok

    def as_dict(self) -> dict:
        return {
            "ideal": self.ideal,
            "joint_distribution": self.joint.tolist(),
            "disagreement_probability": self.disagreement,
            "outcome_probabilities": list(self.outcome_probabilities),
            "prescribed": list(self.prescribed),
            "prescribed_deviation": self.prescribed_deviation,
            "invalid_probability": self.invalid_probability,
            "last_round_max_fidelity": self.last_round_fidelity,
            "conditions": {
                "agreement": self.agreement_ok,
                "prescribed_probabilities": self.prescribed_ok,
                "no_invalid": self.no_invalid_ok,
                "last_round_unbiasable": self.last_round_ok,
            },
        }


def check_ideal(p: CoinTossProtocol) -> IdealCheck:
    """Evaluate an honest run against the ideal coin-toss conditions.

    Besides agreement, prescribed probabilities and no ``invalid`` outcome,
    an ideal toss needs the receiver's states conditioned on the last
    sender's outcome to be mutually orthogonal; otherwise the sender can
    steer the result just before the final message.
    """
    tol = tolerances.get()
    joint = joint_distribution(p)
    disagreement = float(joint.sum() - np.trace(joint))
    probs = (float(joint[0, 0]), float(joint[1, 1]))
    deviation = max(abs(probs[0] - p.prescribed[0]), abs(probs[1] - p.prescribed[1]))
    invalid = float(joint[2, :].sum() + joint[:, 2].sum() - joint[2, 2])
    last = None
    if p.rounds:
        last = conditioned_bob_states(p).max_fidelity
    return IdealCheck(
        joint=joint,
        disagreement=disagreement,
        outcome_probabilities=probs,
        prescribed=p.prescribed,
        prescribed_deviation=deviation,
        invalid_probability=invalid,
        last_round_fidelity=last,
        agreement_ok=disagreement <= tol.validation,
        prescribed_ok=deviation <= tol.validation,
        no_invalid_ok=invalid <= tol.validation,
        last_round_ok=last is None or last <= tol.truncation,
    )


# ------------------------------------------------------- last-round conditioning


@dataclass(frozen=True, eq=False)
class ConditionedStates:
    """Receiver marginals conditioned on the sender's (pulled-back) outcome."""

    round_index: int
    sender: str
    receiver: str
    receiver_labels: tuple[str, ...]
    pulled_back: tuple[np.ndarray, ...]
    pre_transmission: StateVector
    outcomes: dict[str, tuple[float, DensityMatrix]]

    @property
    def probabilities(self) -> dict[str, float]:
        return {x: prob for x, (prob, _) in self.outcomes.items()}

    @property
    def fidelities(self) -> dict[str, float]:
        keys = list(self.outcomes)
        out = {}
        for i in range(len(keys)):
            for j in range(i + 1, len(keys)):
                out[f"{keys[i]}|{keys[j]}"] = fidelity_closed(self.outcomes[keys[i]][1], self.outcomes[keys[j]][1])
        return out

    @property
    def max_fidelity(self) -> float:
        return max(self.fidelities.values(), default=0.0)

    def items(self):
        return self.outcomes.items()

    def __getitem__(self, outcome: str) -> tuple[float, DensityMatrix]:
        return self.outcomes[outcome]

    def __contains__(self, outcome: str) -> bool:
        return outcome in self.outcomes


def _pull_back(p: CoinTossProtocol, sender: str) -> tuple[np.ndarray, ...]:
    last = p.rounds[-1]
    space = p.layout.subset(round_labels(p.layout, sender))
    labels = p.outcome_labels(sender)
    u = last.matrix
    return tuple(u.conj().T @ embed_operator(proj, labels, space) @ u for proj in p.outcome_projectors(sender))


def conditioned_bob_states(p: CoinTossProtocol, round: Optional[int] = None, party: Optional[str] = None) -> ConditionedStates:
    """Receiver states just before the last round, conditioned on the sender's outcome.

    ``round`` is a 1-based index and must name the last round; ``party`` is
    the conditioning party and must be that round's actor.  Outcomes with
    probability at or below the negligible threshold are left out.

    Raises:
        LastRoundActorMismatch: if ``round`` is not the last round or
            ``party`` did not send it.
    """
    n = p.n_rounds
    if n == 0:
        raise LastRoundActorMismatch("protocol has no rounds to condition on")
    if round is not None and round != n:
        raise LastRoundActorMismatch(f"can only condition on the last round ({n}), not round {round}")
    sender = p.rounds[-1].actor
    if party is not None and party != sender:
        raise LastRoundActorMismatch(f"round {n} is sent by {sender}, not {party}")
    receiver = other(sender)
    state = p.run(upto=n - 1)
    pulled = _pull_back(p, sender)
    layout = p.layout
    positions = layout.positions(round_labels(layout, sender))
    keep = party_labels(layout, receiver)
    negligible = tolerances.get().negligible_probability
    outcomes = {}
    for name, proj in zip(OUTCOMES, pulled):
        branch = apply_matrix(state.amplitudes, layout.dims, positions, proj)
        prob = float(np.vdot(branch, branch).real)
        if prob <= negligible:
            continue
        rho = partial_trace(StateVector(layout, branch / math.sqrt(prob)), keep)
        outcomes[name] = (prob, rho)
    return ConditionedStates(n, sender, receiver, tuple(keep), pulled, state, outcomes)


def _support_measurement(cond: ConditionedStates, dim: int) -> tuple[np.ndarray, ...]:
    """Receiver projectors: support of each conditioned state, each taken
    orthogonal to the ones before it, with the leftover space going to
    ``invalid``."""
    eye = np.eye(dim, dtype=np.complex128)
    used = np.zeros((dim, dim), dtype=np.complex128)
    found = {}
    for name in OUTCOMES[:2]:
        if name in cond:
            rest = eye - used
            found[name] = numerics.support_projector(rest @ cond[name][1].matrix @ rest)
            used = used + found[name]
    zero = np.zeros((dim, dim), dtype=np.complex128)
    return (found.get("0", zero), found.get("1", zero), eye - used)


def _truncate(p: CoinTossProtocol, cond: ConditionedStates, reference: np.ndarray) -> tuple[CoinTossProtocol, float]:
    sender, receiver = cond.sender, cond.receiver
    layout = p.layout
    receiver_proj = _support_measurement(cond, layout.dim_of(list(cond.receiver_labels)))
    new_outcomes = {sender: cond.pulled_back, receiver: receiver_proj}
    try:
        shorter = CoinTossProtocol(
            layout=layout,
            init_a=p.init_a,
            init_bc=p.init_bc,
            rounds=p.rounds[:-1],
            outcome_a=new_outcomes["A"],
            outcome_b=new_outcomes["B"],
            prescribed=p.prescribed,
            channel_holder=sender,
            name=f"{p.name}/truncated",
            params=p.params,
        )
    except EPRBError as exc:
        raise TruncationUnsound(cond.max_fidelity, f"truncated protocol is invalid: {exc}") from None
    deviation = float(np.max(np.abs(joint_distribution(shorter) - reference)))
    return shorter, deviation


def truncate_last_round(p: CoinTossProtocol) -> CoinTossProtocol:
    """Drop the last round, moving both outcome measurements before it.

    The sender measures the pulled-back projectors on its own subsystems and
    the channel it still holds; the receiver measures the supports of its
    conditioned states.

    Raises:
        TruncationUnsound: if the conditioned receiver states overlap, or
            the honest outcome distribution would change.
    """
    cond = conditioned_bob_states(p)
    tol = tolerances.get()
    if cond.max_fidelity > tol.truncation:
        raise TruncationUnsound(cond.max_fidelity, "conditioned receiver states are not orthogonal")
    shorter, deviation = _truncate(p, cond, joint_distribution(p))
    if deviation > tol.validation:
        raise TruncationUnsound(cond.max_fidelity, f"outcome distribution changed by {deviation:.3g}")
    return shorter


# ------------------------------------------------------------- backward induction


@dataclass(frozen=True, eq=False)
class InductionRecord:
    round_index: int
    sender: str
    receiver: str
    probabilities: dict[str, float]
    states: dict[str, DensityMatrix]
    fidelities: dict[str, float]
    max_fidelity: float
    truncated: bool
    distribution_deviation: Optional[float] = None

    def as_dict(self, include_states: bool = False) -> dict:
        out = {
            "round": self.round_index,
            "conditioning_party": self.sender,
            "receiver": self.receiver,
            "outcome_probabilities": dict(self.probabilities),
            "probability_total": float(sum(self.probabilities.values())),
            "pairwise_fidelities": dict(self.fidelities),
            "max_fidelity": self.max_fidelity,
            "truncated": self.truncated,
            "distribution_deviation": self.distribution_deviation,
        }
        if include_states:
            out["states"] = {
                x: [[[float(z.real), float(z.imag)] for z in row] for row in rho.matrix] for x, rho in self.states.items()
            }
        return out


@dataclass(frozen=True)
class Verdict:
    kind: str
    round_index: Optional[int] = None
    fidelity: Optional[float] = None
    reason: str = ""

    def as_dict(self) -> dict:
        return {"kind": self.kind, "round": self.round_index, "fidelity": self.fidelity, "reason": self.reason}


LEMMA_CONTRADICTION = "LemmaContradiction"
NOT_IDEAL_AT_ROUND = "NotIdealAtRound"
STRUCTURAL_FAILURE = "StructuralFailure"


@dataclass(frozen=True)
class ZeroRoundAnalysis:
    """What a communication-free protocol would have to achieve versus what
    its initial state allows.

    ``initial_cut_information`` is across Alice's machine versus Bob's machine
    with the channel; ``holder_cut_information`` moves the channel to whoever
    holds it at the end.
    """

    prescribed_information: float
    initial_cut_information: float
    holder_cut_information: float
    realized_outcome_information: float
    joint: tuple[tuple[float, ...], ...]
    channel_holder: str

    def as_dict(self) -> dict:
        return {
            "prescribed_information_bits": self.prescribed_information,
            "initial_state_information_bits": self.initial_cut_information,
            "holder_cut_information_bits": self.holder_cut_information,
            "realized_outcome_information_bits": self.realized_outcome_information,
            "joint_distribution": [list(row) for row in self.joint],
            "channel_holder": self.channel_holder,
        }


@dataclass(frozen=True, eq=False)
class InductionReport:
    initial_rounds: int
    records: tuple[InductionRecord, ...]
    verdict: Verdict
    reference_distribution: np.ndarray
    zero_round: Optional[ZeroRoundAnalysis] = None
    final_protocol: Optional[CoinTossProtocol] = None
    distributions: tuple[np.ndarray, ...] = field(default=())

    @property
    def truncations(self) -> int:
        return sum(1 for r in self.records if r.truncated)

    def as_dict(self, include_states: bool = False) -> dict:
        out = {
            "initial_rounds": self.initial_rounds,
            "truncations": self.truncations,
            "verdict": self.verdict.as_dict(),
            "reference_distribution": self.reference_distribution.tolist(),
            "rounds": [r.as_dict(include_states) for r in self.records],
        }
        if self.zero_round is not None:
            out["zero_round"] = self.zero_round.as_dict()
        return out


def _zero_round(p: CoinTossProtocol) -> ZeroRoundAnalysis:
    state = p.initial_state()
    holder_side = round_labels(p.layout, p.channel_holder)
    joint = joint_distribution(p, state)
    return ZeroRoundAnalysis(
        prescribed_information=binary_entropy(p.prescribed),
        initial_cut_information=max(mutual_information(state, party_labels(p.layout, "A")), 0.0),
        holder_cut_information=max(mutual_information(state, holder_side), 0.0),
        realized_outcome_information=classical_mutual_information(joint),
        joint=tuple(tuple(float(v) for v in row) for row in joint),
        channel_holder=p.channel_holder,
    )


def _record(cond: ConditionedStates, truncated: bool, deviation: Optional[float]) -> InductionRecord:
    return InductionRecord(
        round_index=cond.round_index,
        sender=cond.sender,
        receiver=cond.receiver,
        probabilities=cond.probabilities,
        states={x: rho for x, (_, rho) in cond.items()},
        fidelities=cond.fidelities,
        max_fidelity=cond.max_fidelity,
        truncated=truncated,
        distribution_deviation=deviation,
    )


def backward_induction(p: CoinTossProtocol) -> InductionReport:
    """Strip rounds from the end while each is redundant.

    Every truncated protocol is executed and its outcome distribution compared
    with the original's.  Reaching zero rounds with a non-trivial prescribed
    outcome is the contradiction: the initial state shares no information
    between Alice and Bob, yet the outcome must be correlated.
    """
    tol = tolerances.get()
    reference = joint_distribution(p)
    records: list[InductionRecord] = []
    distributions = [reference]
    current = p
    while current.n_rounds > 0:
        try:
            cond = conditioned_bob_states(current)
        except EPRBError as exc:
            verdict = Verdict(STRUCTURAL_FAILURE, current.n_rounds, None, str(exc))
            return InductionReport(p.n_rounds, tuple(records), verdict, reference, None, current, tuple(distributions))
        if cond.max_fidelity > tol.truncation:
            records.append(_record(cond, False, None))
            verdict = Verdict(
                NOT_IDEAL_AT_ROUND,
                cond.round_index,
                cond.max_fidelity,
                f"conditioned states of {cond.receiver} before round {cond.round_index} overlap",
            )
            return InductionReport(p.n_rounds, tuple(records), verdict, reference, None, current, tuple(distributions))
        try:
            shorter, deviation = _truncate(current, cond, reference)
        except TruncationUnsound as exc:
            records.append(_record(cond, False, None))
            verdict = Verdict(STRUCTURAL_FAILURE, cond.round_index, cond.max_fidelity, exc.reason)
            return InductionReport(p.n_rounds, tuple(records), verdict, reference, None, current, tuple(distributions))
        records.append(_record(cond, deviation <= tol.validation, deviation))
        if deviation > tol.validation:
            verdict = Verdict(
                STRUCTURAL_FAILURE,
                cond.round_index,
                cond.max_fidelity,
                f"truncation changed the outcome distribution by {deviation:.3g}",
            )
            return InductionReport(p.n_rounds, tuple(records), verdict, reference, None, current, tuple(distributions))
        distributions.append(joint_distribution(shorter))
        current = shorter

    zero = _zero_round(current)
    verdict = Verdict(
        LEMMA_CONTRADICTION,
        0,
        None,
        f"no communication left, yet the outcome must carry {zero.prescribed_information:.6g} bits "
        f"while the initial state shares {zero.initial_cut_information:.3g}",
    )
    return InductionReport(p.n_rounds, tuple(records), verdict, reference, zero, current, tuple(distributions))


# ------------------------------------------------------------------- lemma check


@dataclass(frozen=True)
class LemmaTrace:
    steps: tuple[str, ...]
    mutual_information: tuple[float, ...]

    @property
    def max_information(self) -> float:
        return max(self.mutual_information, default=0.0)

    def as_dict(self) -> dict:
        return {
            "steps": list(self.steps),
            "mutual_information_bits": list(self.mutual_information),
            "max_information_bits": self.max_information,
        }


def _local_op(op, side: Sequence[str], foreign: Sequence[str], dims: dict[str, int], who: str):
    if isinstance(op, tuple) and len(op) == 2 and not isinstance(op[0], np.ndarray):
        labels, matrix = list(op[0]), op[1]
    else:
        labels, matrix = list(side), op
    for label in labels:
        if label in foreign:
            raise NonLocalOperation(f"operation listed for {who} touches {label!r} on the other side")
        if label not in side:
            raise UnknownLabel(f"{label!r} is not one of {who}'s subsystems")
    matrix = numerics.check_unitary(matrix)
    d = math.prod(dims[label] for label in labels)
    if matrix.shape[0] != d:
        if matrix.shape[0] == math.prod(dims.values()):
            raise NonLocalOperation(f"operation listed for {who} acts on the joint space")
        raise DimensionMismatch(f"operation for {who} has dimension {matrix.shape[0]}, expected {d}")
    return labels, matrix


def lemma_check(
    init_a: StateVector,
    init_b: StateVector,
    ops_a: Sequence,
    ops_b: Sequence,
) -> LemmaTrace:
    """Mutual information across the Alice | Bob cut under local operations only.

    Each operation is a unitary on the whole side or a ``(labels, unitary)``
    pair.  Operations are interleaved A, B, A, B, ...

    Raises:
        NonLocalOperation: if an operation reaches the other side.
    """
    side_a, side_b = list(init_a.labels), list(init_b.labels)
    state = tensor(init_a, init_b)
    dims = dict(zip(state.labels, state.dims))
    checked_a = [_local_op(op, side_a, side_b, dims, "A") for op in ops_a]
    checked_b = [_local_op(op, side_b, side_a, dims, "B") for op in ops_b]
    steps = ["initial"]
    values = [mutual_information(state, side_a)]
    for k in range(max(len(checked_a), len(checked_b))):
        for who, ops in (("A", checked_a), ("B", checked_b)):
            if k < len(ops):
                labels, matrix = ops[k]
                state = apply_on(state, labels, matrix, check=False)
                steps.append(f"{who}{k + 1}")
                values.append(mutual_information(state, side_a))
    return LemmaTrace(tuple(steps), tuple(max(v, 0.0) for v in values))
