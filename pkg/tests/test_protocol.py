import json
import warnings

import numpy as np
import pytest

from eprb.errors import BadParams, ParseError, UnknownBuiltin, ValidationError
from eprb.hilbert import StateVector, SubsystemLayout, partial_trace
from eprb.protocol import (
    BUILTINS,
    ChannelNotIdleWarning,
    CoinTossProtocol,
    CommitmentProtocol,
    Round,
    builtin,
    commitment_states,
    joint_distribution,
    load_protocol,
    round_labels,
    run_honest,
    serialize,
    to_document,
    verify_opening,
)
from eprb.protocol import gates
from eprb.protocol.io import format_float

COMMITMENT_CASES = [
    ("direct-send", {}),
    ("theta-commit", {"theta": 0.3}),
    ("bb84-commit", {"n": 1}),
    ("bb84-commit", {"n": 2}),
]
COIN_CASES = [
    ("orthogonal-toy", {"rounds": 4}),
    ("orthogonal-toy", {"rounds": 1}),
    ("coin-from-commit", {}),
    ("coin-from-commit", {"base": "theta-commit", "theta": 0.5}),
    ("announce-coin", {}),
]


def qubit_layout():
    return SubsystemLayout.of([("A", 2), ("B", 2), ("C", 2)])


def simple_commitment(**overrides):
    layout = qubit_layout()
    a_space = layout.subset(round_labels(layout, "A"))
    kwargs = dict(
        layout=layout,
        alice0=StateVector.basis([("A", 2)], [0]),
        alice1=StateVector.basis([("A", 2)], [1]),
        bob_init=StateVector.basis([("B", 2), ("C", 2)], [0, 0]),
        commit_rounds=[Round("A", gates.on(a_space, (("A", "C"), gates.swap(2))))],
    )
    kwargs.update(overrides)
    return CommitmentProtocol(**kwargs)


def test_round_labels_follow_layout_order():
    layout = SubsystemLayout.of([("C", 2), ("A", 2), ("B.x", 3), ("A.dice", 2), ("B", 2)])
    assert round_labels(layout, "A") == ["C", "A", "A.dice"]
    assert round_labels(layout, "B") == ["C", "B.x", "B"]


@pytest.mark.parametrize("name,params", COMMITMENT_CASES)
def test_honest_commitment_is_accepted(name, params):
    p = builtin(name, params)
    for b in (0, 1):
        trace = run_honest(p, b, snapshots=True)
        assert verify_opening(p, trace.after_open, b) == pytest.approx(1, abs=1e-12)
        assert len(trace.snapshots) == 1 + len(p.rounds)
        for s in trace.snapshots:
            assert s.norm() == pytest.approx(1, abs=1e-12)


def test_direct_send_reveals_the_bit_to_bob():
    p = builtin("direct-send")
    s0, s1 = commitment_states(p)
    np.testing.assert_allclose(partial_trace(s0, ["B"]).matrix, np.diag([1, 0]), atol=1e-12)
    np.testing.assert_allclose(partial_trace(s1, ["B"]).matrix, np.diag([0, 1]), atol=1e-12)
    assert verify_opening(p, run_honest(p, 0).after_open, 1) == pytest.approx(0)


def test_bb84_receiver_view_is_maximally_mixed():
    p = builtin("bb84-commit", {"n": 2})
    for s in commitment_states(p):
        np.testing.assert_allclose(partial_trace(s, ["B"]).matrix, np.eye(4) / 4, atol=1e-12)


@pytest.mark.parametrize("name,params", COIN_CASES)
def test_coin_tosses_are_fair_and_agree(name, params):
    p = builtin(name, params)
    joint = joint_distribution(p)
    np.testing.assert_allclose(joint, np.diag([0.5, 0.5, 0.0]), atol=1e-12)


def test_coin_from_commit_structure():
    p = builtin("coin-from-commit")
    assert [r.actor for r in p.rounds] == ["A", "B", "A"]
    assert p.layout.total_dim == 256
    assert p.channel_holder == "B"


@pytest.mark.parametrize("name,params", COMMITMENT_CASES + COIN_CASES)
def test_documents_round_trip_bit_exact(name, params):
    p = builtin(name, params)
    text = serialize(p)
    again = load_protocol(text)
    assert serialize(again) == text
    assert type(again) is type(p)


def test_float_format_round_trips():
    for x in (0.1, 1 / 3, np.pi, -2.5e-300, 0.0):
        assert float(format_float(x)) == x


def test_unknown_builtin_and_params():
    with pytest.raises(UnknownBuiltin):
        builtin("nope")
    with pytest.raises(BadParams):
        builtin("bb84-commit", {"n": 0})
    with pytest.raises(BadParams):
        builtin("theta-commit", {"phi": 1})
    assert set(BUILTINS) >= {"bb84-commit", "theta-commit", "direct-send", "orthogonal-toy", "coin-from-commit"}


def test_validation_non_orthogonal_encodings():
    with pytest.raises(ValidationError) as err:
        simple_commitment(alice1=StateVector([("A", 2)], [1, 1], normalize=True))
    assert err.value.field == "states.alice1"


def test_validation_non_unitary_round():
    with pytest.raises(ValidationError) as err:
        simple_commitment(commit_rounds=[Round("A", np.eye(4) * 2)])
    assert err.value.field == "commit_rounds[0].matrix"
    assert "unitary" in str(err.value)


def test_validation_rounds_must_alternate_across_phases():
    layout = qubit_layout()
    swap = gates.on(layout.subset(round_labels(layout, "A")), (("A", "C"), gates.swap(2)))
    with pytest.raises(ValidationError) as err:
        simple_commitment(open_rounds=[Round("A", swap)])
    assert err.value.field == "open_rounds[0].actor"


def test_validation_wrong_round_shape():
    with pytest.raises(ValidationError) as err:
        simple_commitment(commit_rounds=[Round("A", np.eye(2))])
    assert err.value.field == "commit_rounds[0].matrix"


def test_validation_unowned_label():
    with pytest.raises(ValidationError) as err:
        simple_commitment(layout=SubsystemLayout.of([("A", 2), ("X", 2), ("C", 2)]))
    assert err.value.field.startswith("subsystems")


def test_verification_projector_route():
    p0 = builtin("theta-commit", {"theta": 0.4})
    final = run_honest(p0, 1).after_open
    honest1 = final.amplitudes
    proj = np.outer(honest1, honest1.conj())
    honest0 = run_honest(p0, 0).after_open.amplitudes
    labels = tuple(p0.layout.labels)
    p = CommitmentProtocol(
        layout=p0.layout,
        alice0=p0.alice0,
        alice1=p0.alice1,
        bob_init=p0.bob_init,
        commit_rounds=p0.commit_rounds,
        open_rounds=p0.open_rounds,
        verification={0: (labels, np.outer(honest0, honest0.conj())), 1: (labels, proj)},
    )
    assert verify_opening(p, final, 1) == pytest.approx(1)
    assert verify_opening(p, run_honest(p, 0).after_open, 1) == pytest.approx(verify_opening(p0, run_honest(p0, 0).after_open, 1))
    assert serialize(load_protocol(serialize(p))) == serialize(p)


def test_channel_not_idle_warns():
    layout = qubit_layout()
    a_space = layout.subset(round_labels(layout, "A"))
    # Alice leaves her bit in the channel and nobody picks it up
    p = simple_commitment(commit_rounds=[Round("A", gates.on(a_space, (("A", "C"), gates.xor_into(2))))])
    with pytest.warns(ChannelNotIdleWarning):
        commitment_states(p)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        commitment_states(builtin("bb84-commit"))


def test_load_rejects_bad_json():
    with pytest.raises(ParseError):
        load_protocol("{not json")


def mutate(doc_text, fn):
    doc = json.loads(doc_text)
    fn(doc)
    return json.dumps(doc)


@pytest.mark.parametrize(
    "edit,field",
    [
        (lambda d: d.pop("kind"), "kind"),
        (lambda d: d.update(format_version=7), "format_version"),
        (lambda d: d["subsystems"][0].update(dim=0), "subsystems[0].dim"),
        (lambda d: d["states"]["alice0"].pop(), "states.alice0"),
        (lambda d: d["commit_rounds"][0]["matrix"][0][0].__setitem__(0, "x"), "commit_rounds[0].matrix[0][0]"),
        (lambda d: d["commit_rounds"][1].pop("actor"), "commit_rounds[1].actor"),
        (lambda d: d["commit_rounds"][0]["matrix"][0][0].__setitem__(0, 3.0), "commit_rounds[0].matrix"),
    ],
)
def test_load_reports_field_path(edit, field):
    text = mutate(serialize(builtin("theta-commit")), edit)
    with pytest.raises(ValidationError) as err:
        load_protocol(text)
    assert err.value.field == field


def test_coin_document_field_paths():
    text = serialize(builtin("orthogonal-toy"))
    with pytest.raises(ValidationError) as err:
        load_protocol(mutate(text, lambda d: d["outcome_measurements"]["A"].pop()))
    assert err.value.field == "outcome_measurements.A"
    with pytest.raises(ValidationError) as err:
        load_protocol(mutate(text, lambda d: d.update(channel_holder="B")))
    assert err.value.field == "channel_holder"
    with pytest.raises(ValidationError) as err:
        load_protocol(mutate(text, lambda d: d.update(prescribed=[0.7, 0.7])))
    assert err.value.field == "prescribed"


def test_document_shape():
    doc = to_document(builtin("bb84-commit"))
    assert doc["kind"] == "commitment"
    assert [s["label"] for s in doc["subsystems"]] == ["A", "A.dice", "B", "C"]
    assert doc["params"] == {"n": 1}


def test_coin_toss_zero_rounds_default_holder():
    layout = qubit_layout()
    bob_space = layout.subset(round_labels(layout, "B"))
    zero2 = np.zeros((2, 2))
    zero4 = np.zeros((4, 4))
    p = CoinTossProtocol(
        layout=layout,
        init_a=StateVector([("A", 2)], [1, 1], normalize=True),
        init_bc=StateVector.basis([("B", 2), ("C", 2)], [0, 0]),
        rounds=[],
        outcome_a=(gates.P0, gates.P1, zero2),
        outcome_b=(gates.on(bob_space, (("B",), gates.P0)), gates.on(bob_space, (("B",), gates.P1)), zero4),
    )
    assert p.channel_holder == "B"
    np.testing.assert_allclose(joint_distribution(p), [[0.5, 0, 0], [0.5, 0, 0], [0, 0, 0]], atol=1e-12)
