"""Seeded random objects for audits and tests.

Nothing in honest protocol execution draws from these; they exist so the
fidelity and attack witnesses can be compared against random competitors.
"""

from __future__ import annotations

import numpy as np
from scipy.stats import unitary_group

from .hilbert import DensityMatrix, StateVector, as_layout


def rng_from(seed) -> np.random.Generator:
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def random_unitary(dim: int, rng) -> np.ndarray:
    if dim == 1:
        return np.exp(2j * np.pi * rng_from(rng).random()) * np.ones((1, 1))
    return unitary_group.rvs(dim, random_state=rng_from(rng))


def random_state(layout, rng) -> StateVector:
    layout = as_layout(layout)
    g = rng_from(rng)
    amps = g.normal(size=layout.total_dim) + 1j * g.normal(size=layout.total_dim)
    return StateVector(layout, amps, normalize=True)


def random_density_matrix(dim: int, rng, rank: int | None = None, label: str = "S") -> DensityMatrix:
    """Ginibre-ensemble density matrix of the given rank (full rank by default)."""
    g = rng_from(rng)
    rank = dim if rank is None else rank
    x = g.normal(size=(dim, rank)) + 1j * g.normal(size=(dim, rank))
    rho = x @ x.conj().T
    return DensityMatrix([(label, dim)], rho / np.trace(rho).real)


def random_povm(dim: int, n_outcomes: int, rng) -> list[np.ndarray]:
    """Random POVM: Ginibre positives renormalized to sum to the identity."""
    g = rng_from(rng)
    raw = []
    for _ in range(n_outcomes):
        x = g.normal(size=(dim, dim)) + 1j * g.normal(size=(dim, dim))
        raw.append(x @ x.conj().T)
    total = sum(raw)
    w, v = np.linalg.eigh(total)
    inv_root = (v / np.sqrt(w)) @ v.conj().T
    return [inv_root @ e @ inv_root for e in raw]
