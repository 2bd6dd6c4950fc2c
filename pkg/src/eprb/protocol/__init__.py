"""Two-party protocol model: values, honest execution, builtins and documents."""

from .builtins import BUILTINS, builtin
from .io import from_document, load_protocol, serialize, to_document
from .model import (
    OUTCOMES,
    ChannelNotIdleWarning,
    CoinTossProtocol,
    CommitmentProtocol,
    ExecutionTrace,
    Round,
    bob_side_labels,
    channel_labels,
    commitment_states,
    joint_distribution,
    other,
    party_labels,
    round_labels,
    run_honest,
    run_rounds,
    verify_opening,
)

__all__ = [
    "BUILTINS",
    "OUTCOMES",
    "ChannelNotIdleWarning",
    "CoinTossProtocol",
    "CommitmentProtocol",
    "ExecutionTrace",
    "Round",
    "bob_side_labels",
    "builtin",
    "channel_labels",
    "commitment_states",
    "from_document",
    "joint_distribution",
    "load_protocol",
    "other",
    "party_labels",
    "round_labels",
    "run_honest",
    "run_rounds",
    "serialize",
    "to_document",
    "verify_opening",
]
