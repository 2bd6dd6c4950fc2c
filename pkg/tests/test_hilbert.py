import numpy as np
import pytest
from hypothesis import given, strategies as st

from eprb.errors import (
    DimensionCapExceeded,
    DimensionMismatch,
    EmptyKeepSet,
    InvalidCut,
    LabelClash,
    NotNormalized,
    NotPSD,
    UnknownLabel,
)
from eprb.hilbert import (
    DensityMatrix,
    StateVector,
    SubsystemLayout,
    apply_on,
    mutual_information,
    owner,
    partial_trace,
    schmidt,
    tensor,
    von_neumann_entropy,
)
from eprb.sampling import random_state, random_unitary

seeds = st.integers(0, 2**32 - 1)
layouts = st.lists(st.integers(1, 4), min_size=2, max_size=4).map(
    lambda ds: [(f"S{k}", d) for k, d in enumerate(ds)]
)


def bell():
    return StateVector([("A", 2), ("B", 2)], np.array([1, 0, 0, 1]) / np.sqrt(2))


def test_owner_prefixes():
    assert owner("A") == "A"
    assert owner("B.guess") == "B"
    assert owner("C.g") == "C"
    assert owner("Alice") is None


def test_layout_rejects_duplicates_and_cap(monkeypatch):
    with pytest.raises(LabelClash):
        SubsystemLayout.of([("A", 2), ("A", 2)])
    monkeypatch.setenv("EPRB_MAX_DIM", "8")
    with pytest.raises(DimensionCapExceeded):
        SubsystemLayout.of([("A", 4), ("B", 4)])


def test_first_label_is_most_significant():
    s = StateVector.basis([("A", 2), ("B", 3)], [1, 2])
    assert np.argmax(np.abs(s.amplitudes)) == 1 * 3 + 2


def test_state_must_be_normalized():
    with pytest.raises(NotNormalized):
        StateVector([("A", 2)], [1, 1])
    assert StateVector([("A", 2)], [1, 1], normalize=True).norm() == pytest.approx(1)
    with pytest.raises(DimensionMismatch):
        StateVector([("A", 2)], [1, 0, 0])


def test_states_are_immutable():
    s = StateVector.basis([("A", 2)], [0])
    with pytest.raises(AttributeError):
        s.amplitudes = None
    with pytest.raises(ValueError):
        s.amplitudes[0] = 2


def test_density_matrix_validation():
    with pytest.raises(NotPSD):
        DensityMatrix([("A", 2)], np.diag([1.5, -0.5]))
    with pytest.raises(NotNormalized):
        DensityMatrix([("A", 2)], np.diag([0.5, 0.4]))


@given(seeds, layouts)
def test_partial_trace_is_unit_trace_psd(seed, entries):
    s = random_state(entries, np.random.default_rng(seed))
    keep = [entries[-1][0], entries[0][0]]
    rho = partial_trace(s, keep)
    assert rho.layout.labels == tuple(keep)
    assert np.trace(rho.matrix).real == pytest.approx(1, abs=1e-12)
    assert rho.eigenvalues().min() >= 0


@given(seeds, layouts)
def test_partial_trace_of_density_matches_state(seed, entries):
    s = random_state(entries, np.random.default_rng(seed))
    keep = [entries[1][0]]
    np.testing.assert_allclose(partial_trace(s.density(), keep).matrix, partial_trace(s, keep).matrix, atol=1e-12)


def test_partial_trace_product_state(rng):
    a = random_state([("A", 3)], rng)
    b = random_state([("B", 2)], rng)
    rho = partial_trace(tensor(a, b), ["A"])
    np.testing.assert_allclose(rho.matrix, np.outer(a.amplitudes, a.amplitudes.conj()), atol=1e-12)
    with pytest.raises(EmptyKeepSet):
        partial_trace(tensor(a, b), [])
    with pytest.raises(UnknownLabel):
        partial_trace(tensor(a, b), ["Z"])


def test_tensor_label_clash():
    with pytest.raises(LabelClash):
        tensor(StateVector.basis([("A", 2)], [0]), StateVector.basis([("A", 2)], [1]))


@given(seeds, layouts)
def test_apply_on_preserves_norm_and_commutes_on_disjoint(seed, entries):
    g = np.random.default_rng(seed)
    s = random_state(entries, g)
    (la, da), (lb, db) = entries[0], entries[1]
    ua, ub = random_unitary(da, g), random_unitary(db, g)
    one = apply_on(apply_on(s, [la], ua), [lb], ub)
    two = apply_on(apply_on(s, [lb], ub), [la], ua)
    assert one.norm() == pytest.approx(1, abs=1e-12)
    np.testing.assert_allclose(one.amplitudes, two.amplitudes, atol=1e-12)


def test_apply_on_label_order_matters():
    s = StateVector.basis([("A", 2), ("B", 2)], [1, 0])
    cnot = np.eye(4)[[0, 1, 3, 2]]
    np.testing.assert_allclose(apply_on(s, ["A", "B"], cnot).amplitudes, StateVector.basis(s.layout, [1, 1]).amplitudes)
    np.testing.assert_allclose(apply_on(s, ["B", "A"], cnot).amplitudes, s.amplitudes)


@given(seeds, layouts)
def test_schmidt_reconstructs(seed, entries):
    s = random_state(entries, np.random.default_rng(seed))
    form = schmidt(s, [entries[0][0]])
    np.testing.assert_allclose(form.reconstruct().amplitudes, s.amplitudes, atol=1e-12)
    assert form.weights.sum() == pytest.approx(1, abs=1e-12)
    rho = partial_trace(s, [entries[0][0]])
    np.testing.assert_allclose(np.sort(form.weights)[::-1][: rho.dim], rho.eigenvalues()[: len(form.weights)], atol=1e-12)


def test_schmidt_rejects_trivial_cut():
    with pytest.raises(InvalidCut):
        schmidt(bell(), ["A", "B"])


def test_bell_state_entropies():
    s = bell()
    assert schmidt(s, ["A"]).rank == 2
    assert von_neumann_entropy(partial_trace(s, ["A"])) == pytest.approx(1)
    assert mutual_information(s, ["A"]) == pytest.approx(2)
    assert mutual_information(s.density(), ["A"]) == pytest.approx(2)


@given(seeds)
def test_product_states_have_zero_mutual_information(seed):
    g = np.random.default_rng(seed)
    s = tensor(random_state([("A", 3)], g), random_state([("B", 2), ("B.x", 2)], g))
    assert abs(mutual_information(s, ["A"])) < 1e-9


def test_reorder_round_trip(rng):
    s = random_state([("A", 2), ("B", 3), ("C", 2)], rng)
    back = s.reorder(["C", "A", "B"]).reorder(["A", "B", "C"])
    np.testing.assert_array_equal(back.amplitudes, s.amplitudes)
