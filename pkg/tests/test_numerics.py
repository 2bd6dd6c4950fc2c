import numpy as np
import pytest
from hypothesis import given, strategies as st

from eprb import numerics, tolerances
from eprb.errors import NonFinite, NotHermitian, NotPSD, NotUnitary
from eprb.sampling import random_density_matrix, random_unitary

seeds = st.integers(0, 2**32 - 1)
dims = st.integers(1, 7)


def random_hermitian(d, rng):
    x = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return x + x.conj().T


@given(seeds, dims)
def test_eig_reconstructs_and_sorts_descending(seed, d):
    h = random_hermitian(d, np.random.default_rng(seed))
    eig = numerics.eig_hermitian(h)
    assert np.all(np.diff(eig.eigenvalues) <= 1e-12)
    assert np.linalg.norm(eig.reconstruct() - h) <= 1e-10 * max(1, np.linalg.norm(h))
    assert numerics.unitarity_defect(eig.eigenvectors) < 1e-12


def test_eig_degenerate_order_is_deterministic(rng):
    u = random_unitary(4, rng)
    h = u @ np.diag([2.0, 1.0, 1.0, 0.0]) @ u.conj().T
    first = numerics.eig_hermitian(h)
    again = numerics.eig_hermitian(h.copy())
    np.testing.assert_array_equal(first.eigenvectors, again.eigenvectors)
    np.testing.assert_allclose(first.eigenvalues, [2, 1, 1, 0], atol=1e-12)


def test_eig_identity_gives_standard_basis():
    eig = numerics.eig_hermitian(np.eye(3))
    # descending lexicographic order of phase-normalized columns
    np.testing.assert_allclose(np.abs(eig.eigenvectors), np.eye(3), atol=1e-12)


def test_eig_rejects_non_hermitian():
    with pytest.raises(NotHermitian):
        numerics.eig_hermitian([[0, 1], [0, 0]])


def test_non_finite_rejected():
    with pytest.raises(NonFinite):
        numerics.as_matrix([[np.nan, 0], [0, 1]])


@given(seeds, st.integers(1, 5), st.integers(1, 5))
def test_svd_reconstructs_rectangular(seed, rows, cols):
    g = np.random.default_rng(seed)
    m = g.normal(size=(rows, cols)) + 1j * g.normal(size=(rows, cols))
    u, s, v = numerics.svd(m)
    k = len(s)
    assert u.shape == (rows, rows) and v.shape == (cols, cols)
    assert numerics.unitarity_defect(u) < 1e-12 and numerics.unitarity_defect(v) < 1e-12
    np.testing.assert_allclose((u[:, :k] * s) @ v[:, :k].conj().T, m, atol=1e-12)
    assert np.all(np.diff(s) <= 1e-12)


@given(seeds, st.integers(2, 6), st.integers(0, 5))
def test_polar_is_unitary_even_when_rank_deficient(seed, d, rank):
    g = np.random.default_rng(seed)
    rank = min(rank, d)
    left = g.normal(size=(d, rank)) + 1j * g.normal(size=(d, rank))
    right = g.normal(size=(rank, d)) + 1j * g.normal(size=(rank, d))
    m = left @ right if rank else np.zeros((d, d), dtype=complex)
    w, p = numerics.polar(m)
    assert numerics.unitarity_defect(w) < 1e-10
    np.testing.assert_allclose(w @ p, m, atol=1e-10)
    assert np.linalg.eigvalsh(p).min() > -1e-10


def test_polar_of_zero_matrix_is_deterministic():
    w1, _ = numerics.polar(np.zeros((3, 3)))
    w2, _ = numerics.polar(np.zeros((3, 3)))
    np.testing.assert_array_equal(w1, w2)
    assert numerics.unitarity_defect(w1) < 1e-12


@given(seeds, st.integers(1, 6))
def test_psd_sqrt_squares_back(seed, d):
    rho = random_density_matrix(d, np.random.default_rng(seed)).matrix
    root = numerics.psd_sqrt(rho)
    np.testing.assert_allclose(root @ root, rho, atol=1e-9)
    assert numerics.hermitian_defect(root) < 1e-12


def test_psd_sqrt_rejects_negative_spectrum():
    with pytest.raises(NotPSD):
        numerics.psd_sqrt(np.diag([1.0, -0.1]))


def test_clamp_zeroes_roundoff_only():
    w = numerics.clamp_spectrum(np.array([1.0, 1e-3, -1e-13]))
    np.testing.assert_array_equal(w, [1.0, 1e-3, 0.0])
    with pytest.raises(NotPSD):
        numerics.clamp_spectrum(np.array([1.0, -1e-6]))


def test_support_projector_rank(rng):
    rho = random_density_matrix(5, rng, rank=2).matrix
    proj = numerics.support_projector(rho)
    assert round(np.trace(proj).real) == 2
    np.testing.assert_allclose(proj @ rho, rho, atol=1e-10)
    np.testing.assert_allclose(proj @ proj, proj, atol=1e-12)


def test_check_unitary(rng):
    numerics.check_unitary(random_unitary(4, rng))
    with pytest.raises(NotUnitary):
        numerics.check_unitary(np.diag([1.0, 2.0]))
    with pytest.raises(NotUnitary):
        numerics.check_unitary(np.ones((2, 3)))


def test_strict_profile_is_tighter():
    assert tolerances.get().name == "default"
    with tolerances.tolerance_profile("strict") as tol:
        assert tolerances.get() is tol
        assert tol.validation < tolerances.DEFAULT.validation
    assert tolerances.get().name == "default"


def test_max_dim_env_override(monkeypatch):
    monkeypatch.setenv("EPRB_MAX_DIM", "16")
    assert tolerances.max_dim() == 16
    monkeypatch.delenv("EPRB_MAX_DIM")
    assert tolerances.max_dim() == 4096
