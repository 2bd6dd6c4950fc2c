"""Alice's EPR-type cheating attack on a bit commitment.

Alice commits to b = 0 honestly, keeps everything coherent, and at the start
of the opening phase rotates every subsystem outside Bob's machine (her own
registers and the idle channel) so the joint state lines up as closely as
possible with the honest b = 1 commitment state.  The rotation is the polar
unitary of ``M1 M0†``, where ``M_b`` is the commitment state reshaped as an
(Alice side) x (Bob side) amplitude matrix.  Its overlap with the honest b = 1
state equals the fidelity of Bob's two reduced states, which is the best any
Alice-side unitary can achieve.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import numerics, tolerances
from .errors import NotIdealHiding
from .fidelity import fidelity_closed, trace_distance
from .hilbert import DensityMatrix, StateVector, apply_on, partial_trace
from .protocol.model import (
    CommitmentProtocol,
    commitment_states,
    run_honest,
    run_rounds,
    verify_opening,
)


@dataclass(frozen=True)
class HidingReport:
    """How much Bob can learn about b at the end of the commit phase."""

    fidelity: float
    fidelity_squared: float
    trace_distance: float
    bob_guess_probability: float
    rho0: DensityMatrix
    rho1: DensityMatrix

    @property
    def delta(self) -> float:
        return 1.0 - self.fidelity

    def as_dict(self) -> dict:
        return {
            "fidelity": self.fidelity,
            "fidelity_squared": self.fidelity_squared,
            "trace_distance": self.trace_distance,
            "bob_guess_probability": self.bob_guess_probability,
            "delta": self.delta,
        }


@dataclass(frozen=True, eq=False)
class AttackReport:
    cheat_unitary: np.ndarray
    cheat_labels: tuple[str, ...]
    achieved_overlap: float
    bob_acceptance: float
    hiding: HidingReport
    honest_acceptance: float | None = None
    bob_marginal_shift: float | None = None

    @property
    def delta(self) -> float:
        return self.hiding.delta

    def as_dict(self, include_unitary: bool = False) -> dict:
        out = {
            "cheat_labels": list(self.cheat_labels),
            "cheat_unitary_dim": int(self.cheat_unitary.shape[0]),
            "cheat_unitary_defect": numerics.unitarity_defect(self.cheat_unitary),
            "achieved_overlap": self.achieved_overlap,
            "achieved_overlap_squared": self.achieved_overlap**2,
            "bob_acceptance": self.bob_acceptance,
            "delta": self.delta,
            "hiding": self.hiding.as_dict(),
        }
        if self.honest_acceptance is not None:
            out["honest_acceptance"] = self.honest_acceptance
        if self.bob_marginal_shift is not None:
            out["bob_marginal_shift"] = self.bob_marginal_shift
        if include_unitary:
            out["cheat_unitary"] = [[[float(z.real), float(z.imag)] for z in row] for row in self.cheat_unitary]
        return out


def cheat_labels(p: CommitmentProtocol) -> list[str]:
    """Everything outside Bob's machine at the cheat instant, layout order."""
    bob = set(p.bob_labels)
    return [label for label in p.layout.labels if label not in bob]


def _hiding_from_states(p: CommitmentProtocol, s0: StateVector, s1: StateVector) -> HidingReport:
    rho0 = partial_trace(s0, p.bob_labels)
    rho1 = partial_trace(s1, p.bob_labels)
    f = fidelity_closed(rho0, rho1)
    d = trace_distance(rho0, rho1)
    return HidingReport(f, f * f, d, 0.5 + 0.5 * d, rho0, rho1)


def hiding_report(p: CommitmentProtocol) -> HidingReport:
    """Fidelity, trace distance and Bob's best guess probability for b."""
    s0, s1 = commitment_states(p)
    return _hiding_from_states(p, s0, s1)


def _amplitude_matrix(state: StateVector, side: Sequence[str]) -> np.ndarray:
    rest = state.layout.complement(side)
    moved = state.reorder(list(side) + rest)
    return moved.amplitudes.reshape(state.layout.dim_of(side), -1)


def aligning_unitary(s0: StateVector, s1: StateVector, side: Sequence[str]) -> np.ndarray:
    """Unitary on ``side`` maximizing ``|<s1|(U ⊗ I)|s0>|``.

    The maximum equals the fidelity of the two reduced states on the
    complement of ``side``; the overlap comes out real and non-negative.
    """
    m0 = _amplitude_matrix(s0, side)
    m1 = _amplitude_matrix(s1, side)
    w, _ = numerics.polar(m1 @ m0.conj().T)
    return w


def ideal_cheat_unitary(s0: StateVector, s1: StateVector, cut: Sequence[str]) -> np.ndarray:
    """Unitary on ``cut`` alone taking ``s0`` to ``s1`` exactly.

    Only valid when the reduced states on the rest agree (perfect hiding).

    Raises:
        NotIdealHiding: if the two reduced states differ beyond the
            equivalence tolerance.
    """
    cut = list(cut)
    rest = s0.layout.complement(cut)
    r0 = partial_trace(s0, rest).matrix
    r1 = partial_trace(s1, rest).matrix
    gap = float(np.linalg.norm(r0 - r1))
    if gap > tolerances.get().equivalence:
        raise NotIdealHiding(f"reduced states outside the cut differ (Frobenius gap {gap:.3g})")
    return aligning_unitary(s0, s1, cut)


def optimal_cheat(p: CommitmentProtocol) -> AttackReport:
    """Best cheating rotation for a possibly imperfectly hiding commitment.

    ``bob_acceptance`` here is the squared overlap of the rotated state with
    the honest b = 1 commitment state; :func:`simulate_attack` checks it by
    running the opening phase.
    """
    s0, s1 = commitment_states(p)
    labels = cheat_labels(p)
    u = aligning_unitary(s0, s1, labels)
    rotated = apply_on(s0, labels, u)
    overlap = min(abs(s1.inner(rotated)), 1.0)
    return AttackReport(
        cheat_unitary=u,
        cheat_labels=tuple(labels),
        achieved_overlap=overlap,
        bob_acceptance=overlap**2,
        hiding=_hiding_from_states(p, s0, s1),
    )


def simulate_attack(p: CommitmentProtocol) -> AttackReport:
    """Commit to 0, rotate, open honestly claiming 1, and let Bob verify."""
    plan = optimal_cheat(p)
    committed = run_honest(p, 0).after_commit
    labels = list(plan.cheat_labels)
    rotated = apply_on(committed, labels, plan.cheat_unitary)
    final = run_rounds(rotated, p.open_rounds)
    accepted = verify_opening(p, final, 1)
    honest = verify_opening(p, run_honest(p, 0).after_open, 0)
    shift = float(np.linalg.norm(partial_trace(rotated, p.bob_labels).matrix - plan.hiding.rho0.matrix))
    return AttackReport(
        cheat_unitary=plan.cheat_unitary,
        cheat_labels=plan.cheat_labels,
        achieved_overlap=plan.achieved_overlap,
        bob_acceptance=accepted,
        hiding=plan.hiding,
        honest_acceptance=honest,
        bob_marginal_shift=shift,
    )


def theta_sweep(thetas: Sequence[float]) -> list[dict]:
    """Hiding/binding tradeoff table over the theta-commit family."""
    from .protocol.builtins import theta_commit

    rows = []
    for theta in thetas:
        report = simulate_attack(theta_commit({"theta": float(theta)}))
        rows.append({"theta": float(theta), **report.as_dict()})
    return rows


def audit_random_unitaries(p: CommitmentProtocol, samples: int, rng) -> dict:
    """Overlaps reached by Haar-random rotations of the cheat region.

    None of them should beat the aligned rotation.
    """
    from .sampling import random_unitary

    s0, s1 = commitment_states(p)
    labels = cheat_labels(p)
    d = p.layout.dim_of(labels)
    best = 0.0
    for _ in range(samples):
        rotated = apply_on(s0, labels, random_unitary(d, rng), check=False)
        best = max(best, abs(s1.inner(rotated)))
    optimum = optimal_cheat(p).achieved_overlap
    return {"samples": int(samples), "best_random_overlap": best, "aligned_overlap": optimum, "excess": best - optimum}
