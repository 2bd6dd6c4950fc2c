"""Small matrix library for assembling builtin protocol rounds."""

from __future__ import annotations

from functools import reduce
from typing import Sequence

import numpy as np

from ..hilbert import SubsystemLayout, embed_operator

X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
H = np.array([[1, 1], [1, -1]], dtype=np.complex128) / np.sqrt(2)
P0 = np.diag([1.0, 0.0]).astype(np.complex128)
P1 = np.diag([0.0, 1.0]).astype(np.complex128)


def ry(theta: float) -> np.ndarray:
    """Real rotation taking |0> to cos(theta)|0> + sin(theta)|1>."""
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -s], [s, c]], dtype=np.complex128)


def hadamard_n(dim: int) -> np.ndarray:
    """Bitwise Hadamard on a register of dimension 2**n."""
    n = int(round(np.log2(dim)))
    if 2**n != dim:
        raise ValueError(f"register dimension {dim} is not a power of two")
    return reduce(np.kron, [H] * n, np.ones((1, 1), dtype=np.complex128))


def swap(dim: int) -> np.ndarray:
    """|i, j> -> |j, i> on two registers of equal dimension."""
    m = np.zeros((dim * dim, dim * dim), dtype=np.complex128)
    for i in range(dim):
        for j in range(dim):
            m[j * dim + i, i * dim + j] = 1.0
    return m


def xor_into(dim: int) -> np.ndarray:
    """|i, j> -> |i, i XOR j> (bitwise CNOT from the first register to the second)."""
    m = np.zeros((dim * dim, dim * dim), dtype=np.complex128)
    for i in range(dim):
        for j in range(dim):
            m[i * dim + (i ^ j), i * dim + j] = 1.0
    return m


def controlled(u: np.ndarray) -> np.ndarray:
    """Qubit-controlled ``u``: identity on |0>, ``u`` on |1>."""
    d = u.shape[0]
    return np.kron(P0, np.eye(d)) + np.kron(P1, u)


def on(space: SubsystemLayout, *ops: tuple[Sequence[str], np.ndarray]) -> np.ndarray:
    """Embed ``(labels, matrix)`` factors into ``space`` and multiply them.

    Factors are applied in the order given, so the first factor acts first.
    """
    total = np.eye(space.total_dim, dtype=np.complex128)
    for labels, m in ops:
        total = embed_operator(m, list(labels), space) @ total
    return total


def basis_projector(dim: int, k: int) -> np.ndarray:
    m = np.zeros((dim, dim), dtype=np.complex128)
    m[k, k] = 1.0
    return m
