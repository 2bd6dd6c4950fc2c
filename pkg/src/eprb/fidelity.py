"""Fidelity between density matrices, computed three independent ways.

* :func:`fidelity_closed` evaluates ``Tr sqrt(sqrt(r1) r0 sqrt(r1))`` directly.
* :func:`fidelity_purification` builds a maximally parallel pair of
  purifications and reports their overlap.
* :func:`fidelity_povm` builds the projective measurement that minimizes the
  Bhattacharyya sum and reports the attained value.

Fidelity here is the amplitude quantity F (not F squared).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import numerics, tolerances
from .errors import DimensionMismatch, NotPSD
from .hilbert import DensityMatrix, StateVector, partial_trace


def _matrix(rho) -> np.ndarray:
    return rho.matrix if isinstance(rho, DensityMatrix) else numerics.as_matrix(rho)


def _pair(rho0, rho1) -> tuple[np.ndarray, np.ndarray]:
    a, b = _matrix(rho0), _matrix(rho1)
    if a.shape != b.shape or a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"density matrices have shapes {a.shape} and {b.shape}")
    return a, b


def _clip_unit(x: float) -> float:
    return float(min(max(x, 0.0), 1.0))


def fidelity_closed(rho0, rho1) -> float:
    """Closed-form fidelity, clipped into [0, 1]."""
    a, b = _pair(rho0, rho1)
    root1 = numerics.psd_sqrt(b)
    inner = root1 @ a @ root1
    w = numerics.clamp_spectrum(numerics.eig_hermitian(0.5 * (inner + inner.conj().T)).eigenvalues)
    return _clip_unit(float(np.sum(np.sqrt(w))))


def trace_distance(rho0, rho1) -> float:
    """``0.5 * Tr|rho0 - rho1|``; Bob's best one-shot guess is ``0.5 + D/2``."""
    a, b = _pair(rho0, rho1)
    diff = a - b
    w = np.linalg.eigvalsh(0.5 * (diff + diff.conj().T))
    return _clip_unit(0.5 * float(np.sum(np.abs(w))))


def canonical_purification_matrix(rho) -> np.ndarray:
    """Amplitude matrix (system x ancilla) of ``sum_k sqrt(l_k) |v_k> ⊗ |k>``."""
    eig = numerics.eig_hermitian(_matrix(rho))
    w = numerics.clamp_spectrum(eig.eigenvalues)
    return eig.eigenvectors * np.sqrt(w)


@dataclass(frozen=True, eq=False)
class PurificationPair:
    psi0: StateVector
    psi1: StateVector
    overlap: float
    system_labels: tuple[str, ...]
    ancilla_label: str


def _system_layout(rho, d: int) -> list[tuple[str, int]]:
    if isinstance(rho, DensityMatrix):
        return list(rho.layout.entries)
    return [("S", d)]


def fidelity_purification(rho0, rho1, ancilla_label: str = "E") -> PurificationPair:
    """Maximally parallel purifications of ``rho0`` and ``rho1``.

    Both start from canonical purifications with an ancilla as large as the
    system.  The ancilla of the first is then rotated by the inverse of the
    polar unitary of the cross-Gram operator ``A1† A0``, which makes the
    overlap real, non-negative and equal to the trace norm of ``A1† A0``.
    """
    a, b = _pair(rho0, rho1)
    d = a.shape[0]
    amp0 = canonical_purification_matrix(a)
    amp1 = canonical_purification_matrix(b)
    w, _ = numerics.polar(amp1.conj().T @ amp0)
    amp0 = amp0 @ w.conj().T

    system = _system_layout(rho0, d)
    labels = tuple(label for label, _ in system)
    layout = system + [(ancilla_label, d)]
    psi0 = StateVector(layout, amp0.reshape(-1), normalize=True)
    psi1 = StateVector(layout, amp1.reshape(-1), normalize=True)
    return PurificationPair(psi0, psi1, abs(psi1.inner(psi0)), labels, ancilla_label)


def purification_overlap(pair: PurificationPair) -> float:
    return abs(pair.psi0.inner(pair.psi1))


def reduced_system(pair: PurificationPair) -> tuple[DensityMatrix, DensityMatrix]:
    keep = list(pair.system_labels)
    return partial_trace(pair.psi0, keep), partial_trace(pair.psi1, keep)


def povm_sum(rho0, rho1, povm: Sequence[np.ndarray]) -> float:
    """``sum_b sqrt(Tr rho0 E_b) * sqrt(Tr rho1 E_b)`` for the given POVM."""
    a, b = _pair(rho0, rho1)
    total = 0.0
    for e in povm:
        p0 = max(float(np.real(np.trace(a @ e))), 0.0)
        p1 = max(float(np.real(np.trace(b @ e))), 0.0)
        total += np.sqrt(p0 * p1)
    return float(total)


def check_povm(povm: Sequence[np.ndarray], tol: float | None = None) -> None:
    tol = tolerances.get().validation if tol is None else tol
    d = povm[0].shape[0]
    for k, e in enumerate(povm):
        if numerics.hermitian_defect(e) > tol:
            raise NotPSD(f"POVM element {k} is not Hermitian")
        if float(np.linalg.eigvalsh(0.5 * (e + e.conj().T)).min()) < -tol:
            raise NotPSD(f"POVM element {k} is not positive")
    defect = float(np.max(np.abs(sum(povm) - np.eye(d))))
    if defect > tol:
        raise NotPSD(f"POVM elements sum to identity only within {defect:.3g}")


def fidelity_povm(rho0, rho1) -> tuple[float, list[np.ndarray]]:
    """Fidelity as the minimum Bhattacharyya sum, with the minimizing POVM.

    The witness measures in the eigenbasis of
    ``M = r1^{-1/2} sqrt(r1^{1/2} r0 r1^{1/2}) r1^{-1/2}`` restricted to the
    support of ``rho1`` (pseudo-inverse there); the kernel of ``rho1`` becomes
    one extra element, which never contributes because ``rho1`` has no weight
    on it.  Zero elements are dropped.
    """
    a, b = _pair(rho0, rho1)
    d = a.shape[0]
    tol = tolerances.get()
    eig1 = numerics.eig_hermitian(b)
    w1 = numerics.clamp_spectrum(eig1.eigenvalues)
    supp = w1 > tol.clamp * max(1.0, float(w1.max()))
    q = eig1.eigenvectors[:, supp]
    root = (q * np.sqrt(w1[supp])) @ q.conj().T
    inv_root = (q / np.sqrt(w1[supp])) @ q.conj().T
    g = numerics.psd_sqrt(0.5 * (root @ a @ root + (root @ a @ root).conj().T))
    m = inv_root @ g @ inv_root
    small = q.conj().T @ m @ q
    basis = q @ numerics.eig_hermitian(0.5 * (small + small.conj().T)).eigenvectors

    povm = [np.outer(basis[:, k], basis[:, k].conj()) for k in range(basis.shape[1])]
    kernel = np.eye(d) - numerics.projector_onto(q)
    if q.shape[1] < d:
        povm.append(0.5 * (kernel + kernel.conj().T))
    return povm_sum(a, b, povm), povm


@dataclass(frozen=True)
class FidelityComparison:
    closed: float
    purification: float
    povm: float
    trace_distance: float

    @property
    def max_discrepancy(self) -> float:
        vals = (self.closed, self.purification, self.povm)
        return float(max(vals) - min(vals))


def compare(rho0, rho1) -> FidelityComparison:
    """All three fidelity routes plus the trace distance."""
    value, _ = fidelity_povm(rho0, rho1)
    return FidelityComparison(
        closed=fidelity_closed(rho0, rho1),
        purification=fidelity_purification(rho0, rho1).overlap,
        povm=value,
        trace_distance=trace_distance(rho0, rho1),
    )
