import itertools

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, strategies as st

from eprb.errors import DimensionMismatch, NotPSD
from eprb.fidelity import (
    check_povm,
    compare,
    fidelity_closed,
    fidelity_povm,
    fidelity_purification,
    povm_sum,
    purification_overlap,
    reduced_system,
    trace_distance,
)
from eprb.hilbert import DensityMatrix
from eprb.sampling import random_density_matrix, random_povm, random_state

seeds = st.integers(0, 2**32 - 1)
dims = st.integers(2, 6)


def scipy_fidelity(a, b):
    # independent route: scipy's Schur-based matrix square root
    root = scipy.linalg.sqrtm(b)
    return float(np.real(np.trace(scipy.linalg.sqrtm(root @ a @ root))))


def pair(seed, d, rank=None):
    g = np.random.default_rng(seed)
    return random_density_matrix(d, g, rank=rank), random_density_matrix(d, g, rank=rank)


def test_qubit_pure_versus_mixed():
    zero = np.diag([1.0, 0.0])
    mixed = np.eye(2) / 2
    c = compare(zero, mixed)
    for value in (c.closed, c.purification, c.povm):
        assert value == pytest.approx(1 / np.sqrt(2), abs=1e-12)
    assert c.trace_distance == pytest.approx(0.5)


@given(seeds, dims)
def test_closed_form_matches_scipy_oracle(seed, d):
    r0, r1 = pair(seed, d)
    assert fidelity_closed(r0, r1) == pytest.approx(scipy_fidelity(r0.matrix, r1.matrix), abs=1e-8)


@given(seeds, dims)
def test_pure_states_give_overlap_modulus(seed, d):
    g = np.random.default_rng(seed)
    a = random_state([("S", d)], g)
    b = random_state([("S", d)], g)
    expected = abs(a.inner(b))
    c = compare(a.density(), b.density())
    for value in (c.closed, c.purification, c.povm):
        assert value == pytest.approx(expected, abs=1e-6)
    assert c.trace_distance == pytest.approx(np.sqrt(1 - expected**2), abs=1e-6)


@given(seeds, dims)
def test_commuting_states_give_bhattacharyya(seed, d):
    g = np.random.default_rng(seed)
    p = g.dirichlet(np.ones(d))
    q = g.dirichlet(np.ones(d))
    assert fidelity_closed(np.diag(p), np.diag(q)) == pytest.approx(np.sum(np.sqrt(p * q)), abs=1e-12)
    assert trace_distance(np.diag(p), np.diag(q)) == pytest.approx(0.5 * np.abs(p - q).sum(), abs=1e-12)


@given(seeds, dims, st.sampled_from([None, 1, 2]))
def test_three_routes_agree(seed, d, rank):
    c = compare(*pair(seed, d, rank))
    assert c.max_discrepancy <= 1e-6


@given(seeds, dims)
def test_symmetry_and_identity(seed, d):
    r0, r1 = pair(seed, d)
    assert fidelity_closed(r0, r1) == pytest.approx(fidelity_closed(r1, r0), abs=1e-10)
    assert fidelity_closed(r0, r0) == pytest.approx(1, abs=1e-10)
    assert trace_distance(r0, r0) == pytest.approx(0, abs=1e-12)


@given(seeds, dims)
def test_trace_distance_brackets_fidelity(seed, d):
    r0, r1 = pair(seed, d)
    f, dist = fidelity_closed(r0, r1), trace_distance(r0, r1)
    assert 1 - f <= dist + 1e-10
    assert dist <= np.sqrt(max(1 - f * f, 0)) + 1e-10


def test_orthogonal_supports_give_zero():
    assert fidelity_closed(np.diag([1, 0, 0]), np.diag([0, 0.5, 0.5])) == 0
    assert trace_distance(np.diag([1, 0, 0]), np.diag([0, 0.5, 0.5])) == pytest.approx(1)


@given(seeds, dims)
def test_purifications_reduce_to_inputs(seed, d):
    r0, r1 = pair(seed, d)
    pp = fidelity_purification(r0, r1)
    back0, back1 = reduced_system(pp)
    np.testing.assert_allclose(back0.matrix, r0.matrix, atol=1e-10)
    np.testing.assert_allclose(back1.matrix, r1.matrix, atol=1e-10)
    assert purification_overlap(pp) == pytest.approx(pp.overlap, abs=1e-12)
    # overlap comes out real and non-negative after alignment
    inner = pp.psi0.inner(pp.psi1)
    assert abs(inner.imag) < 1e-10 and inner.real >= -1e-12


def _qubit_unitaries(steps):
    # Euler-angle grid over SU(2) up to global phase
    angles = np.linspace(0, 2 * np.pi, steps, endpoint=False)
    halves = np.linspace(0, np.pi, steps // 2 + 1)
    for a, b, c in itertools.product(angles, halves, angles):
        rz1 = np.diag([np.exp(-0.5j * a), np.exp(0.5j * a)])
        ry = np.array([[np.cos(b / 2), -np.sin(b / 2)], [np.sin(b / 2), np.cos(b / 2)]])
        rz2 = np.diag([np.exp(-0.5j * c), np.exp(0.5j * c)])
        yield rz1 @ ry @ rz2


@pytest.mark.parametrize("seed", range(5))
def test_purification_overlap_beats_brute_force_grid(seed):
    r0, r1 = pair(seed, 2)
    pp = fidelity_purification(r0, r1)
    a0 = pp.psi0.amplitudes.reshape(2, 2)
    a1 = pp.psi1.amplitudes.reshape(2, 2)
    # all purifications of r0 on a qubit ancilla: rotate its ancilla factor
    best = max(abs(np.vdot(a0 @ u.T, a1)) for u in _qubit_unitaries(24))
    assert pp.overlap >= best - 1e-9
    assert pp.overlap == pytest.approx(best, abs=5e-3)


@given(seeds, dims)
def test_povm_witness_is_a_povm(seed, d):
    r0, r1 = pair(seed, d)
    value, povm = fidelity_povm(r0, r1)
    check_povm(povm)
    assert povm_sum(r0, r1, povm) == pytest.approx(value, abs=1e-14)


@pytest.mark.parametrize("d", [2, 3, 4])
def test_random_povms_never_beat_witness(d, rng):
    r0, r1 = random_density_matrix(d, rng), random_density_matrix(d, rng)
    value, _ = fidelity_povm(r0, r1)
    for _ in range(200):
        povm = random_povm(d, int(rng.integers(2, 2 * d + 1)), rng)
        assert povm_sum(r0, r1, povm) >= value - 1e-9


def test_random_povm_is_valid(rng):
    check_povm(random_povm(3, 5, rng))
    with pytest.raises(NotPSD):
        check_povm([np.diag([1.0, 0.0]), np.diag([0.0, 0.5])])


def test_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        fidelity_closed(np.eye(2) / 2, np.eye(3) / 3)


def test_accepts_density_matrix_objects():
    a = DensityMatrix([("X", 2)], np.diag([1.0, 0.0]))
    assert fidelity_closed(a, np.diag([0.0, 1.0])) == 0
