"""Labeled multi-subsystem state algebra.

Amplitudes are stored with the first layout label as the most significant
index, so a state on ``[("A", 2), ("B", 3)]`` has amplitude index
``a * 3 + b``.  Labels name either a party machine (``A``, ``B``), the channel
(``C``), or an ancilla attached to one of them using a dotted prefix such as
``A.dice``; :func:`owner` recovers which of the three the label belongs to.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence, Union

import numpy as np

from . import numerics, tolerances
from .errors import (
    DimensionCapExceeded,
    DimensionMismatch,
    EmptyKeepSet,
    InvalidCut,
    LabelClash,
    NotHermitian,
    NotNormalized,
    NotPSD,
    UnknownLabel,
)

PARTIES = ("A", "B", "C")


def owner(label: str) -> str | None:
    """Party owning ``label``: ``"A"``, ``"B"``, ``"C"`` or ``None``."""
    head = label.split(".", 1)[0]
    return head if head in PARTIES else None


@dataclass(frozen=True)
class SubsystemLayout:
    entries: tuple[tuple[str, int], ...]

    def __post_init__(self):
        entries = tuple((str(label), int(dim)) for label, dim in self.entries)
        object.__setattr__(self, "entries", entries)
        labels = [label for label, _ in entries]
        if len(set(labels)) != len(labels):
            dup = sorted({x for x in labels if labels.count(x) > 1})
            raise LabelClash(f"duplicate subsystem labels: {dup}")
        for label, dim in entries:
            if dim < 1:
                raise DimensionMismatch(f"subsystem {label!r} has dimension {dim}")
        cap = tolerances.max_dim()
        if self.total_dim > cap:
            raise DimensionCapExceeded(
                f"total dimension {self.total_dim} exceeds cap {cap} (set EPRB_MAX_DIM)"
            )

    @classmethod
    def of(cls, entries: Iterable[tuple[str, int]]) -> "SubsystemLayout":
        return cls(tuple(entries))

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(label for label, _ in self.entries)

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(dim for _, dim in self.entries)

    @property
    def total_dim(self) -> int:
        return int(np.prod(self.dims, dtype=np.int64)) if self.entries else 1

    def __len__(self):
        return len(self.entries)

    def __contains__(self, label):
        return label in self.labels

    def position(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise UnknownLabel(f"label {label!r} not in layout {list(self.labels)}") from None

    def positions(self, labels: Sequence[str]) -> list[int]:
        return [self.position(label) for label in labels]

    def dim_of(self, labels: Sequence[str]) -> int:
        dims = self.dims
        return int(np.prod([dims[p] for p in self.positions(labels)], dtype=np.int64))

    def subset(self, labels: Sequence[str]) -> "SubsystemLayout":
        dims = self.dims
        return SubsystemLayout(tuple((label, dims[self.position(label)]) for label in labels))

    def complement(self, labels: Sequence[str]) -> list[str]:
        chosen = set(labels)
        return [label for label in self.labels if label not in chosen]

    def owned_by(self, party: str) -> list[str]:
        return [label for label in self.labels if owner(label) == party]

    def concat(self, other: "SubsystemLayout") -> "SubsystemLayout":
        clash = set(self.labels) & set(other.labels)
        if clash:
            raise LabelClash(f"labels present on both sides: {sorted(clash)}")
        return SubsystemLayout(self.entries + other.entries)


LayoutLike = Union[SubsystemLayout, Iterable[tuple[str, int]]]


def as_layout(layout: LayoutLike) -> SubsystemLayout:
    return layout if isinstance(layout, SubsystemLayout) else SubsystemLayout.of(layout)


def _check_distinct(labels: Sequence[str]):
    if len(set(labels)) != len(labels):
        raise LabelClash(f"repeated labels in {list(labels)}")


def apply_matrix(amps: np.ndarray, dims: Sequence[int], positions: Sequence[int], m: np.ndarray) -> np.ndarray:
    """Apply ``m`` to the tensor factors at ``positions`` of ``amps``.

    ``amps`` has shape ``(D,)`` or ``(D, k)``; trailing columns are treated as a
    batch.  ``m`` acts on the factors in the order given by ``positions``.
    No unitarity or normalization is assumed.
    """
    dims = tuple(dims)
    batch = amps.shape[1:]
    t = amps.reshape(dims + batch)
    n = len(positions)
    t = np.moveaxis(t, list(positions), list(range(n)))
    moved = t.shape
    d_sel = int(np.prod(moved[:n], dtype=np.int64))
    t = (m @ t.reshape(d_sel, -1)).reshape(moved)
    t = np.moveaxis(t, list(range(n)), list(positions))
    return t.reshape(amps.shape)


def embed_operator(op: np.ndarray, op_labels: Sequence[str], space: SubsystemLayout) -> np.ndarray:
    """Matrix of ``op ⊗ I`` on ``space``, with ``op`` acting on ``op_labels``."""
    d = space.total_dim
    return apply_matrix(np.eye(d, dtype=np.complex128), space.dims, space.positions(op_labels), op)


class StateVector:
    """Normalized pure state on a labeled layout. Immutable."""

    __slots__ = ("layout", "amplitudes")

    def __init__(self, layout: LayoutLike, amplitudes, *, normalize: bool = False):
        layout = as_layout(layout)
        amps = np.array(amplitudes, dtype=np.complex128).reshape(-1)
        if amps.shape[0] != layout.total_dim:
            raise DimensionMismatch(
                f"{amps.shape[0]} amplitudes for layout of dimension {layout.total_dim}"
            )
        if not np.all(np.isfinite(amps)):
            raise NotNormalized("state has non-finite amplitudes")
        norm = float(np.linalg.norm(amps))
        if normalize:
            if norm == 0:
                raise NotNormalized("cannot normalize the zero vector")
            amps = amps / norm
        elif abs(norm - 1.0) > tolerances.get().validation:
            raise NotNormalized(f"state norm {norm:.12g} differs from 1")
        amps.setflags(write=False)
        object.__setattr__(self, "layout", layout)
        object.__setattr__(self, "amplitudes", amps)

    def __setattr__(self, name, value):
        raise AttributeError("StateVector is immutable")

    @classmethod
    def basis(cls, layout: LayoutLike, indices: Sequence[int]) -> "StateVector":
        """Computational basis state with per-subsystem ``indices``."""
        layout = as_layout(layout)
        amps = np.zeros(layout.total_dim, dtype=np.complex128)
        amps[np.ravel_multi_index(tuple(indices), layout.dims)] = 1.0
        return cls(layout, amps)

    @property
    def dims(self) -> tuple[int, ...]:
        return self.layout.dims

    @property
    def labels(self) -> tuple[str, ...]:
        return self.layout.labels

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def inner(self, other: "StateVector") -> complex:
        """``<self|other>``; layouts must match exactly."""
        if self.layout != other.layout:
            raise DimensionMismatch("inner product of states on different layouts")
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def reorder(self, labels: Sequence[str]) -> "StateVector":
        """Same state with its subsystems permuted into ``labels`` order."""
        labels = list(labels)
        if sorted(labels) != sorted(self.labels):
            raise UnknownLabel(f"reorder needs a permutation of {list(self.labels)}")
        if tuple(labels) == self.labels:
            return self
        t = self.amplitudes.reshape(self.dims)
        t = np.transpose(t, self.layout.positions(labels))
        return StateVector(self.layout.subset(labels), t.reshape(-1))

    def density(self) -> "DensityMatrix":
        a = self.amplitudes
        return DensityMatrix(self.layout, np.outer(a, a.conj()))

    def __repr__(self):
        return f"StateVector({list(self.layout.entries)}, dim={self.layout.total_dim})"


class DensityMatrix:
    """Unit-trace positive semidefinite operator on a labeled layout."""

    __slots__ = ("layout", "matrix")

    def __init__(self, layout: LayoutLike, matrix, *, validate: bool = True):
        layout = as_layout(layout)
        m = numerics.as_matrix(matrix)
        d = layout.total_dim
        if m.shape != (d, d):
            raise DimensionMismatch(f"matrix shape {m.shape} does not match layout dimension {d}")
        if validate:
            tol = tolerances.get().validation
            if numerics.hermitian_defect(m) > tol:
                raise NotHermitian("density matrix is not Hermitian")
            tr = complex(np.trace(m))
            if abs(tr - 1.0) > tol:
                raise NotNormalized(f"density matrix trace {tr:.12g} differs from 1")
            lo = float(np.linalg.eigvalsh(0.5 * (m + m.conj().T)).min())
            if lo < -tol:
                raise NotPSD(f"density matrix has eigenvalue {lo:.3g}")
        m = 0.5 * (m + m.conj().T)
        m.setflags(write=False)
        object.__setattr__(self, "layout", layout)
        object.__setattr__(self, "matrix", m)

    def __setattr__(self, name, value):
        raise AttributeError("DensityMatrix is immutable")

    @classmethod
    def from_matrix(cls, matrix, label: str = "S") -> "DensityMatrix":
        """Wrap a bare matrix as a single-subsystem density matrix."""
        m = numerics.as_matrix(matrix)
        return cls([(label, m.shape[0])], m)

    @property
    def dim(self) -> int:
        return self.layout.total_dim

    def eigenvalues(self) -> np.ndarray:
        """Spectrum, descending, with roundoff negatives clamped to zero."""
        w = np.linalg.eigvalsh(self.matrix)[::-1]
        return numerics.clamp_spectrum(w)

    def purity(self) -> float:
        return float(np.real(np.trace(self.matrix @ self.matrix)))

    def __repr__(self):
        return f"DensityMatrix({list(self.layout.entries)})"


State = Union[StateVector, DensityMatrix]


def tensor(a: StateVector, b: StateVector) -> StateVector:
    """Kronecker product with concatenated layout.

    Raises:
        LabelClash: if the two states share a label.
    """
    layout = a.layout.concat(b.layout)
    return StateVector(layout, np.kron(a.amplitudes, b.amplitudes), normalize=True)


def apply_on(state: StateVector, labels: Sequence[str], u, *, check: bool = True) -> StateVector:
    """Apply unitary ``u`` to the subsystems ``labels`` (in that order).

    Raises:
        NotUnitary: if ``u`` fails the unitarity check.
        DimensionMismatch: if ``u`` does not match the selected dimensions.
    """
    labels = list(labels)
    _check_distinct(labels)
    positions = state.layout.positions(labels)
    d_sel = state.layout.dim_of(labels)
    u = numerics.as_matrix(u)
    if u.shape != (d_sel, d_sel):
        raise DimensionMismatch(f"operator shape {u.shape} does not match subsystems {labels} (dim {d_sel})")
    if check:
        numerics.check_unitary(u)
    amps = apply_matrix(state.amplitudes, state.dims, positions, u)
    return StateVector(state.layout, amps, normalize=True)


def _reduced_matrix(state: State, keep: Sequence[str]) -> np.ndarray:
    layout = state.layout
    keep_pos = layout.positions(keep)
    rest_pos = [p for p in range(len(layout)) if p not in keep_pos]
    dims = layout.dims
    d_keep = int(np.prod([dims[p] for p in keep_pos], dtype=np.int64))
    if isinstance(state, StateVector):
        t = state.amplitudes.reshape(dims)
        t = np.transpose(t, keep_pos + rest_pos).reshape(d_keep, -1)
        return t @ t.conj().T
    n = len(dims)
    t = state.matrix.reshape(dims + dims)
    perm = keep_pos + rest_pos + [n + p for p in keep_pos] + [n + p for p in rest_pos]
    d_rest = layout.total_dim // d_keep
    t = np.transpose(t, perm).reshape(d_keep, d_rest, d_keep, d_rest)
    return np.einsum("ajbj->ab", t)


def partial_trace(state: State, keep: Sequence[str]) -> DensityMatrix:
    """Reduced state on ``keep``, ordered as given.

    Raises:
        EmptyKeepSet: if ``keep`` is empty.
    """
    keep = list(keep)
    if not keep:
        raise EmptyKeepSet("partial_trace needs at least one subsystem to keep")
    _check_distinct(keep)
    return DensityMatrix(state.layout.subset(keep), _reduced_matrix(state, keep))


def _split(layout: SubsystemLayout, cut: Sequence[str]) -> tuple[list[str], list[str]]:
    side_a = list(cut)
    _check_distinct(side_a)
    layout.positions(side_a)
    side_b = layout.complement(side_a)
    if not side_a or not side_b:
        raise InvalidCut(f"cut {side_a} does not split {list(layout.labels)} into two non-empty parts")
    return side_a, side_b


@dataclass(frozen=True, eq=False)
class SchmidtForm:
    """``state = sum_k coefficients[k] * basis_a[:, k] ⊗ basis_b[:, k]``.

    ``coefficients`` are the square roots of the Schmidt weights; the tensor
    order is ``side_a`` followed by ``side_b``.
    """

    coefficients: np.ndarray
    basis_a: np.ndarray
    basis_b: np.ndarray
    side_a: tuple[str, ...]
    side_b: tuple[str, ...]
    layout: SubsystemLayout

    @property
    def weights(self) -> np.ndarray:
        return self.coefficients**2

    @property
    def rank(self) -> int:
        return int(np.sum(self.coefficients > tolerances.get().validation))

    def reconstruct(self) -> StateVector:
        m = (self.basis_a * self.coefficients) @ self.basis_b.T
        split = self.layout.subset(list(self.side_a) + list(self.side_b))
        return StateVector(split, m.reshape(-1), normalize=True).reorder(self.layout.labels)


def schmidt(state: StateVector, cut: Sequence[str]) -> SchmidtForm:
    """Schmidt decomposition across ``cut`` | rest, via SVD of the amplitude matrix."""
    side_a, side_b = _split(state.layout, cut)
    moved = state.reorder(side_a + side_b)
    d_a = state.layout.dim_of(side_a)
    m = moved.amplitudes.reshape(d_a, -1)
    u, s, v = numerics.svd(m)
    r = len(s)
    return SchmidtForm(
        coefficients=s,
        basis_a=u[:, :r],
        basis_b=v[:, :r].conj(),
        side_a=tuple(side_a),
        side_b=tuple(side_b),
        layout=state.layout,
    )


def entropy_of_spectrum(w: np.ndarray) -> float:
    w = w[w > 0]
    return float(-np.sum(w * np.log2(w)))


def von_neumann_entropy(rho: DensityMatrix) -> float:
    """Entropy in bits, clipped into ``[0, log2 dim]``."""
    s = entropy_of_spectrum(rho.eigenvalues())
    return float(min(max(s, 0.0), np.log2(rho.dim)))


def mutual_information(state: State, cut: Sequence[str]) -> float:
    """``S(X) + S(Y) - S(XY)`` in bits for ``X = cut`` and ``Y`` the rest."""
    side_a, side_b = _split(state.layout, cut)
    s_a = von_neumann_entropy(partial_trace(state, side_a))
    s_b = von_neumann_entropy(partial_trace(state, side_b))
    s_ab = 0.0 if isinstance(state, StateVector) else von_neumann_entropy(state)
    return s_a + s_b - s_ab
