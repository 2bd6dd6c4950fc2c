"""Dense complex linear algebra used throughout the package.

All decompositions return results in a deterministic order (descending
spectra, canonical phases) so that attacks and Schmidt bases are reproducible
run to run, and every decomposition verifies its own reconstruction residual.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import tolerances
from .errors import NonFinite, NotHermitian, NotPSD, NotUnitary, NumericalFailure

_PHASE_CUTOFF = 1e-8
_KEY_DECIMALS = 12


def as_matrix(m) -> np.ndarray:
    """Coerce ``m`` to a finite 2-D complex128 array."""
    arr = np.asarray(m, dtype=np.complex128)
    if arr.ndim != 2 or arr.size == 0:
        raise NonFinite(f"expected a non-empty 2-D matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise NonFinite("matrix has non-finite entries")
    return arr


def hermitian_defect(h: np.ndarray) -> float:
    """Relative Frobenius norm of ``h - h†``."""
    scale = max(1.0, float(np.linalg.norm(h)))
    return float(np.linalg.norm(h - h.conj().T)) / scale


def check_hermitian(h, tol: float | None = None) -> np.ndarray:
    h = as_matrix(h)
    if h.shape[0] != h.shape[1]:
        raise NotHermitian(f"matrix is not square: {h.shape}")
    tol = tolerances.get().validation if tol is None else tol
    defect = hermitian_defect(h)
    if defect > tol:
        raise NotHermitian(f"||h - h^dagger|| = {defect:.3g} exceeds {tol:.1g}")
    return h


def unitarity_defect(u: np.ndarray) -> float:
    """Max-abs entry of ``u†u - I``."""
    return float(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[1]))))


def check_unitary(u, tol: float | None = None) -> np.ndarray:
    u = as_matrix(u)
    if u.shape[0] != u.shape[1]:
        raise NotUnitary(f"matrix is not square: {u.shape}")
    tol = tolerances.get().validation if tol is None else tol
    defect = unitarity_defect(u)
    if defect > tol:
        raise NotUnitary(f"max |u^dagger u - I| = {defect:.3g} exceeds {tol:.1g}")
    return u


def _first_significant(col: np.ndarray) -> int:
    mags = np.abs(col)
    cutoff = _PHASE_CUTOFF * max(float(mags.max()), 1e-300)
    return int(np.argmax(mags > cutoff))


def _phase_of(col: np.ndarray) -> complex:
    x = col[_first_significant(col)]
    return x / abs(x) if abs(x) > 0 else 1.0


def canonical_phases(vectors: np.ndarray) -> np.ndarray:
    """Rotate each column so its first significant amplitude is real positive."""
    out = vectors.copy()
    for k in range(out.shape[1]):
        out[:, k] /= _phase_of(out[:, k])
    return out


def _lex_key(col: np.ndarray) -> tuple:
    # Descending lexicographic order on (re, im) of successive components.
    re = np.round(col.real, _KEY_DECIMALS) + 0.0
    im = np.round(col.imag, _KEY_DECIMALS) + 0.0
    return tuple(v for pair in zip(-re, -im) for v in pair)


@dataclass(frozen=True)
class HermitianEigen:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


def _relative_residual(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.linalg.norm(a - b)) / max(1.0, float(np.linalg.norm(a)))


def eig_hermitian(h) -> HermitianEigen:
    """Eigendecomposition of a Hermitian matrix, eigenvalues descending.

    Degenerate eigenvalues (within the clamp tolerance) keep their eigenvectors
    in descending lexicographic order of the phase-normalized amplitudes.

    Raises:
        NotHermitian: if ``h`` is not Hermitian within the validation tolerance.
        NumericalFailure: if the reconstruction residual exceeds its bound.
    """
    tol = tolerances.get()
    h = check_hermitian(h)
    hs = 0.5 * (h + h.conj().T)
    w, v = np.linalg.eigh(hs)
    w = w[::-1].copy()
    v = canonical_phases(v[:, ::-1])

    scale = max(1.0, float(np.max(np.abs(w))))
    order: list[int] = []
    i = 0
    n = len(w)
    while i < n:
        j = i + 1
        while j < n and abs(w[j] - w[i]) <= tol.clamp * scale:
            j += 1
        block = sorted(range(i, j), key=lambda k: _lex_key(v[:, k]))
        order.extend(block)
        i = j
    w = w[order]
    v = v[:, order]

    result = HermitianEigen(w, v)
    residual = _relative_residual(hs, result.reconstruct())
    if residual > tol.reconstruction:
        raise NumericalFailure(f"eigendecomposition residual {residual:.3g}")
    return result


def svd(m) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Full singular value decomposition ``m = U diag(s) V†``.

    Returns the left unitary ``U`` (rows x rows), singular values ``s``
    (descending, length min(rows, cols)) and the right unitary ``V``
    (cols x cols), with phases fixed so each right singular vector starts with
    a real positive amplitude.
    """
    m = as_matrix(m)
    u, s, vh = np.linalg.svd(m, full_matrices=True)
    v = vh.conj().T
    k = len(s)
    for j in range(v.shape[1]):
        ph = _phase_of(v[:, j])
        v[:, j] /= ph
        if j < k:
            u[:, j] /= ph
    for j in range(k, u.shape[1]):
        u[:, j] /= _phase_of(u[:, j])

    recon = (u[:, :k] * s) @ v[:, :k].conj().T
    residual = _relative_residual(m, recon)
    if residual > tolerances.get().reconstruction:
        raise NumericalFailure(f"svd residual {residual:.3g}")
    return u, s, v


def clamp_spectrum(w: np.ndarray) -> np.ndarray:
    """Zero tiny negative eigenvalues; reject genuinely negative ones.

    Positive eigenvalues at roundoff level (``len(w) * eps * max|w|``) are
    zeroed too, so that square roots of rank-deficient inputs do not pick up
    spurious ``sqrt(eps)`` contributions.
    """
    tol = tolerances.get().clamp
    scale = max(1.0, float(np.max(np.abs(w)))) if len(w) else 1.0
    if len(w) and float(w.min()) < -tol * scale:
        raise NotPSD(f"eigenvalue {float(w.min()):.3g} below -{tol:.1g}")
    noise = len(w) * np.finfo(float).eps * (float(np.max(np.abs(w))) if len(w) else 0.0)
    return np.where(w <= noise, 0.0, w)


def psd_sqrt(rho) -> np.ndarray:
    """Principal square root of a positive semidefinite matrix.

    Raises:
        NotPSD: if an eigenvalue lies below the clamp tolerance.
    """
    eig = eig_hermitian(rho)
    w = clamp_spectrum(eig.eigenvalues)
    v = eig.eigenvectors
    root = (v * np.sqrt(w)) @ v.conj().T
    root = 0.5 * (root + root.conj().T)
    rho = as_matrix(rho)
    residual = _relative_residual(rho, root @ root)
    if residual > tolerances.get().sqrt_reconstruction:
        raise NumericalFailure(f"psd_sqrt residual {residual:.3g}")
    return root


def polar(m, square: bool = True) -> tuple[np.ndarray, np.ndarray]:
    """Right polar decomposition ``m = W P`` with ``P = sqrt(m† m)``.

    For square input ``W`` is a full unitary even when ``m`` is rank
    deficient: the SVD pairs the k-th left null direction with the k-th right
    null direction, in the deterministic order produced by :func:`svd`.  For a
    tall matrix ``W`` is an isometry (W†W = I); for a wide one, a co-isometry.
    """
    m = as_matrix(m)
    rows, cols = m.shape
    if square and rows != cols:
        raise NotUnitary(f"unitary completion needs a square matrix, got {m.shape}")
    u, s, v = svd(m)
    k = len(s)
    if rows == cols:
        w = u @ v.conj().T
    elif rows > cols:
        w = u[:, :cols] @ v.conj().T
    else:
        w = u @ v[:, :rows].conj().T
    p = (v[:, :k] * s) @ v[:, :k].conj().T
    p = 0.5 * (p + p.conj().T)
    residual = _relative_residual(m, w @ p)
    if residual > tolerances.get().sqrt_reconstruction:
        raise NumericalFailure(f"polar residual {residual:.3g}")
    return w, p


def projector_onto(vectors: np.ndarray) -> np.ndarray:
    """Orthogonal projector onto the span of orthonormal columns."""
    return vectors @ vectors.conj().T


def support_projector(rho, cutoff: float | None = None) -> np.ndarray:
    """Projector onto eigenvectors of ``rho`` with eigenvalue >= ``cutoff``."""
    cutoff = tolerances.get().support if cutoff is None else cutoff
    eig = eig_hermitian(rho)
    keep = eig.eigenvalues >= cutoff
    return projector_onto(eig.eigenvectors[:, keep])
