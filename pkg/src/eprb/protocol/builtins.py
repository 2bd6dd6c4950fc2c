"""Builtin protocols.

Commitments:

``direct-send``
    Alice sends the basis state |b> to Bob.  Binding but not hiding.
``theta-commit`` (``theta``)
    Bob receives |0> for b = 0 and cos(theta)|0> + sin(theta)|1> for b = 1.
``bb84-commit`` (``n``)
    Alice sends n qubits carrying dice bits, encoded in the computational
    basis for b = 0 and the Hadamard basis for b = 1.  Bob's view is maximally
    mixed either way, so the commitment is perfectly hiding.

Coin tosses:

``coin-from-commit`` (``base`` plus the base's parameters)
    Alice commits a dice bit with the base commitment, Bob announces a dice
    guess, Alice reveals her bit; the coin is the XOR of the two.
``orthogonal-toy`` (``rounds``)
    Bob prepares a Bell pair across his machine and the channel; Alice
    stores the channel half in round 1 and every later round only carries an
    unused channel flip.  Every round is redundant.
``announce-coin``
    Alice flips a dice coin and announces it in a single round.
"""

from __future__ import annotations

from typing import Callable, Mapping

import numpy as np

from ..errors import BadParams, UnknownBuiltin
from ..hilbert import StateVector, SubsystemLayout, tensor
from . import gates
from .model import (
    CoinTossProtocol,
    CommitmentProtocol,
    Round,
    bob_side_labels,
    party_labels,
    round_labels,
)


def _float(params: Mapping, key: str, default: float) -> float:
    try:
        return float(params.get(key, default))
    except (TypeError, ValueError):
        raise BadParams(f"parameter {key!r} must be a number, got {params.get(key)!r}") from None


def _int(params: Mapping, key: str, default: int, lo: int = 1) -> int:
    raw = params.get(key, default)
    try:
        value = int(raw)
        if float(raw) != value:
            raise ValueError
    except (TypeError, ValueError):
        raise BadParams(f"parameter {key!r} must be an integer, got {raw!r}") from None
    if value < lo:
        raise BadParams(f"parameter {key!r} must be >= {lo}, got {value}")
    return value


def _reject_unknown(params: Mapping, allowed: set):
    extra = sorted(set(params) - allowed)
    if extra:
        raise BadParams(f"unknown parameters: {extra}")


def _space(layout: SubsystemLayout, actor: str) -> SubsystemLayout:
    return layout.subset(round_labels(layout, actor))


def _qubit_commitment(name, params, commit_alice: np.ndarray, open_rounds: bool) -> CommitmentProtocol:
    layout = SubsystemLayout.of([("A", 2), ("B", 2), ("C", 2)])
    a_space = _space(layout, "A")
    b_space = _space(layout, "B")
    commit = [
        Round("A", gates.on(a_space, (("A", "C"), commit_alice))),
        Round("B", gates.on(b_space, (("B", "C"), gates.swap(2)))),
    ]
    opening = [Round("A", gates.on(a_space, (("A", "C"), gates.swap(2))))] if open_rounds else []
    return CommitmentProtocol(
        layout=layout,
        alice0=StateVector.basis([("A", 2)], [0]),
        alice1=StateVector.basis([("A", 2)], [1]),
        bob_init=StateVector.basis([("B", 2), ("C", 2)], [0, 0]),
        commit_rounds=commit,
        open_rounds=opening,
        name=name,
        params=dict(params),
    )


def direct_send(params: Mapping | None = None) -> CommitmentProtocol:
    params = dict(params or {})
    _reject_unknown(params, set())
    return _qubit_commitment("direct-send", params, gates.swap(2), open_rounds=False)


def theta_commit(params: Mapping | None = None) -> CommitmentProtocol:
    params = dict(params or {})
    _reject_unknown(params, {"theta"})
    theta = _float(params, "theta", np.pi / 4)
    params["theta"] = theta
    return _qubit_commitment("theta-commit", params, gates.controlled(gates.ry(theta)), open_rounds=True)


def bb84_commit(params: Mapping | None = None) -> CommitmentProtocol:
    params = dict(params or {})
    _reject_unknown(params, {"n"})
    n = _int(params, "n", 1)
    params["n"] = n
    d = 2**n
    layout = SubsystemLayout.of([("A", 2), ("A.dice", d), ("B", d), ("C", d)])
    a_space = _space(layout, "A")
    b_space = _space(layout, "B")
    hn = gates.hadamard_n(d)
    encode = gates.on(
        a_space,
        (("A.dice",), hn),
        (("A.dice", "C"), gates.xor_into(d)),
        (("A", "C"), gates.controlled(hn)),
    )
    alice = [("A", 2), ("A.dice", d)]
    return CommitmentProtocol(
        layout=layout,
        alice0=StateVector.basis(alice, [0, 0]),
        alice1=StateVector.basis(alice, [1, 0]),
        bob_init=StateVector.basis([("B", d), ("C", d)], [0, 0]),
        commit_rounds=[
            Round("A", encode),
            Round("B", gates.on(b_space, (("B", "C"), gates.swap(d)))),
        ],
        open_rounds=[Round("A", gates.on(a_space, (("A.dice", "C"), gates.swap(d))))],
        name="bb84-commit",
        params=params,
    )


COMMITMENTS: dict[str, Callable[[Mapping], CommitmentProtocol]] = {
    "bb84-commit": bb84_commit,
    "direct-send": direct_send,
    "theta-commit": theta_commit,
}


def _plus() -> np.ndarray:
    return np.array([1.0, 1.0], dtype=np.complex128) / np.sqrt(2)


def _xor_outcomes(space: SubsystemLayout, first: str, second: str) -> tuple[np.ndarray, ...]:
    """Projectors for the XOR of two qubit registers, plus an empty ``invalid``."""
    d = space.total_dim
    out = [np.zeros((d, d), dtype=np.complex128) for _ in range(3)]
    for u in (0, 1):
        for v in (0, 1):
            proj = gates.on(space, ((first,), gates.basis_projector(2, u)), ((second,), gates.basis_projector(2, v)))
            out[u ^ v] = out[u ^ v] + proj
    return tuple(out)


def _lift(rnd: Round, base: SubsystemLayout, layout: SubsystemLayout) -> Round:
    labels = round_labels(base, rnd.actor)
    return Round(rnd.actor, gates.on(_space(layout, rnd.actor), (labels, rnd.matrix)))


def coin_from_commit(params: Mapping | None = None) -> CoinTossProtocol:
    """Coin toss built from a commitment: commit a bit, hear a guess, open."""
    params = dict(params or {})
    base_name = str(params.pop("base", "bb84-commit"))
    if base_name not in COMMITMENTS:
        raise BadParams(f"base must be one of {sorted(COMMITMENTS)}, got {base_name!r}")
    base = COMMITMENTS[base_name](params)
    extra = [("A.bit", 2), ("A.guess", 2), ("B.guess", 2), ("C.g", 2)]
    layout = SubsystemLayout(base.layout.entries + tuple(extra))

    a_labels = party_labels(layout, "A")
    branches = []
    for a, alice in enumerate((base.alice0, base.alice1)):
        s = tensor(tensor(StateVector.basis([("A.bit", 2)], [a]), alice), StateVector.basis([("A.guess", 2)], [0]))
        branches.append(s.reorder(a_labels).amplitudes)
    init_a = StateVector(layout.subset(a_labels), (branches[0] + branches[1]) / np.sqrt(2))
    guess = StateVector([("B.guess", 2), ("C.g", 2)], np.kron(_plus(), [1.0, 0.0]))
    init_bc = tensor(base.bob_init, guess).reorder(bob_side_labels(layout))

    a_space = _space(layout, "A")
    b_space = _space(layout, "B")
    send_guess = gates.on(b_space, (("B.guess", "C.g"), gates.xor_into(2)))
    receive_guess = gates.on(a_space, (("C.g", "A.guess"), gates.xor_into(2)), (("A.guess", "C.g"), gates.xor_into(2)))
    reveal = gates.on(a_space, (("A.bit", "C.g"), gates.xor_into(2)))

    rounds = [_lift(r, base.layout, layout) for r in base.commit_rounds]
    if rounds and rounds[-1].actor == "B":
        rounds[-1] = Round("B", send_guess @ rounds[-1].matrix)
    else:
        rounds.append(Round("B", send_guess))
    opening = [_lift(r, base.layout, layout) for r in base.open_rounds]
    if opening and opening[0].actor == "A":
        opening[0] = Round("A", opening[0].matrix @ receive_guess)
    else:
        opening.insert(0, Round("A", receive_guess))
    if opening[-1].actor == "A":
        opening[-1] = Round("A", reveal @ opening[-1].matrix)
    else:
        opening.append(Round("A", reveal))
    rounds += opening

    alice_space = layout.subset(a_labels)
    bob_space = layout.subset(round_labels(layout, "B"))
    meta = {"base": base_name, **base.params}
    return CoinTossProtocol(
        layout=layout,
        init_a=init_a,
        init_bc=init_bc,
        rounds=rounds,
        outcome_a=_xor_outcomes(alice_space, "A.bit", "A.guess"),
        outcome_b=_xor_outcomes(bob_space, "C.g", "B.guess"),
        name="coin-from-commit",
        params=meta,
    )


def orthogonal_toy(params: Mapping | None = None) -> CoinTossProtocol:
    params = dict(params or {})
    _reject_unknown(params, {"rounds"})
    n = _int(params, "rounds", 4)
    params["rounds"] = n
    layout = SubsystemLayout.of([("A", 2), ("B", 2), ("C", 2)])
    a_space = _space(layout, "A")
    b_space = _space(layout, "B")
    rounds = [Round("A", gates.on(a_space, (("A", "C"), gates.swap(2))))]
    for k in range(1, n):
        actor = "B" if k % 2 else "A"
        space = b_space if actor == "B" else a_space
        rounds.append(Round(actor, gates.on(space, (("C",), gates.X))))
    bell = np.array([1, 0, 0, 1], dtype=np.complex128) / np.sqrt(2)
    holder = "B" if rounds[-1].actor == "A" else "A"

    def outcomes(party):
        labels = round_labels(layout, party) if party == holder else [party]
        space = layout.subset(labels)
        zero = np.zeros((space.total_dim,) * 2, dtype=np.complex128)
        return (
            gates.on(space, ((party,), gates.P0)),
            gates.on(space, ((party,), gates.P1)),
            zero,
        )

    return CoinTossProtocol(
        layout=layout,
        init_a=StateVector.basis([("A", 2)], [0]),
        init_bc=StateVector([("B", 2), ("C", 2)], bell),
        rounds=rounds,
        outcome_a=outcomes("A"),
        outcome_b=outcomes("B"),
        name="orthogonal-toy",
        params=params,
    )


def announce_coin(params: Mapping | None = None) -> CoinTossProtocol:
    params = dict(params or {})
    _reject_unknown(params, set())
    layout = SubsystemLayout.of([("A", 2), ("B", 2), ("C", 2)])
    a_space = _space(layout, "A")
    bob_space = _space(layout, "B")
    zero_a = np.zeros((2, 2), dtype=np.complex128)
    zero_b = np.zeros((4, 4), dtype=np.complex128)
    return CoinTossProtocol(
        layout=layout,
        init_a=StateVector([("A", 2)], _plus()),
        init_bc=StateVector.basis([("B", 2), ("C", 2)], [0, 0]),
        rounds=[Round("A", gates.on(a_space, (("A", "C"), gates.xor_into(2))))],
        outcome_a=(gates.P0, gates.P1, zero_a),
        outcome_b=(
            gates.on(bob_space, (("C",), gates.P0)),
            gates.on(bob_space, (("C",), gates.P1)),
            zero_b,
        ),
        name="announce-coin",
        params=params,
    )


COIN_TOSSES: dict[str, Callable[[Mapping], CoinTossProtocol]] = {
    "coin-from-commit": coin_from_commit,
    "orthogonal-toy": orthogonal_toy,
    "announce-coin": announce_coin,
}

BUILTINS = {**COMMITMENTS, **COIN_TOSSES}


def builtin(name: str, params: Mapping | None = None):
    """Construct a builtin protocol by name.

    Raises:
        UnknownBuiltin: for an unrecognized name.
        BadParams: for missing, malformed or unexpected parameters.
    """
    try:
        factory = BUILTINS[name]
    except KeyError:
        raise UnknownBuiltin(f"unknown builtin {name!r}; choose from {sorted(BUILTINS)}") from None
    return factory(dict(params or {}))
