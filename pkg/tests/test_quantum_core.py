import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from qdmphoton.quantum_core import (
    DensityMatrix,
    DimensionError,
    IntegrationError,
    Propagator,
    StateVector,
    TimeDependentHamiltonian,
    partial_trace,
    propagate,
    state_fidelity,
    tensor_product,
)

X = np.array([[0, 1], [1, 0]], dtype=complex)


def random_density(rng, n):
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    rho = a @ a.conj().T
    return rho / np.trace(rho).real


def test_tensor_product_ordering():
    zero, one = StateVector.basis(0, (2,)), StateVector.basis(1, (2,))
    out = tensor_product(zero, one)
    assert out.dims == (2, 2)
    np.testing.assert_array_equal(out.amplitudes, [0, 1, 0, 0])
    plus = StateVector.normalized([1, 1])
    np.testing.assert_allclose(tensor_product(plus, zero).amplitudes, np.array([1, 0, 1, 0]) / math.sqrt(2))
    mixed = DensityMatrix(np.eye(2) / 2, (2,))
    both = tensor_product(mixed, mixed)
    np.testing.assert_allclose(both.matrix, np.eye(4) / 4)
    assert both.trace() == pytest.approx(1.0)


def test_tensor_product_rejects_mixed_kinds():
    with pytest.raises(TypeError):
        tensor_product(StateVector.basis(0, (2,)), DensityMatrix(np.eye(2) / 2, (2,)))


def test_partial_trace_cases():
    bell = StateVector.normalized([1, 0, 0, 1], (2, 2))
    np.testing.assert_allclose(partial_trace(bell, [0]).matrix, np.eye(2) / 2, atol=1e-15)
    rng = np.random.default_rng(1)
    a, b = random_density(rng, 2), random_density(rng, 3)
    prod = DensityMatrix(np.kron(a, b), (2, 3))
    np.testing.assert_allclose(partial_trace(prod, [0]).matrix, a, atol=1e-14)
    np.testing.assert_allclose(partial_trace(prod, [1]).matrix, b, atol=1e-14)
    np.testing.assert_allclose(partial_trace(prod, [0, 1]).matrix, prod.matrix)
    with pytest.raises(ValueError):
        partial_trace(prod, [])


@given(st.integers(0, 10_000), st.integers(2, 3), st.integers(2, 3))
def test_tensor_then_trace_recovers_factor(seed, na, nb):
    rng = np.random.default_rng(seed)
    a = DensityMatrix(random_density(rng, na), (na,))
    b = DensityMatrix(random_density(rng, nb), (nb,))
    back = partial_trace(tensor_product(a, b), [0])
    np.testing.assert_allclose(back.matrix, a.matrix, atol=1e-12)


def test_state_vector_invariants():
    with pytest.raises(DimensionError):
        StateVector(np.ones(3), (2, 2))
    v = StateVector.normalized([3, 4j])
    assert v.norm() == pytest.approx(1.0, abs=1e-12)


def test_density_matrix_physicality():
    assert DensityMatrix(np.eye(2) / 2, (2,)).is_physical()
    assert not DensityMatrix(np.diag([1.2, -0.2]), (2,)).is_physical()


def test_propagate_identity_and_decay():
    rho = DensityMatrix(np.diag([0.3, 0.7]).astype(complex), (2,))
    out = propagate(np.zeros((2, 2)), [], rho, 0.0, 5.0)
    np.testing.assert_allclose(out.matrix, rho.matrix, atol=1e-12)

    gamma, t = 0.37, 4.0
    lower = np.array([[0, 1], [0, 0]], dtype=complex)
    out = propagate(np.zeros((2, 2)), [(lower, gamma)], DensityMatrix(np.diag([0, 1]).astype(complex), (2,)),
                    0.0, t, tol=1e-11)
    assert out.matrix[1, 1].real == pytest.approx(math.exp(-gamma * t), abs=1e-8)
    assert out.trace() == pytest.approx(1.0, abs=1e-8)


def test_rabi_inversion():
    omega = 0.8
    # H = (omega/2) X inverts in time pi/omega
    h = 0.5 * omega * X
    out = propagate(h, [], DensityMatrix(np.diag([1, 0]).astype(complex), (2,)), 0.0, math.pi / omega, tol=1e-11)
    assert out.matrix[1, 1].real == pytest.approx(1.0, abs=1e-8)


def sech_drive():
    return TimeDependentHamiltonian(np.diag([0.0, -0.05]), [(0.5 * X, lambda t: 1 / math.cosh(0.1 * (t - 30)))])


def test_unitary_propagation_keeps_purity():
    rho = DensityMatrix(np.array([[0.5, 0.5], [0.5, 0.5]], dtype=complex), (2,))
    out = propagate(sech_drive(), [], rho, 0.0, 60.0)
    assert out.purity() == pytest.approx(1.0, abs=1e-8)


def test_window_splitting():
    tol = 1e-10
    lower = np.array([[0, 1], [0, 0]], dtype=complex)
    rho = DensityMatrix(np.diag([0.2, 0.8]).astype(complex), (2,))
    whole = propagate(sech_drive(), [(lower, 0.01)], rho, 0.0, 60.0, tol)
    half = propagate(sech_drive(), [(lower, 0.01)], rho, 0.0, 25.0, tol)
    split = propagate(sech_drive(), [(lower, 0.01)], half, 25.0, 60.0, tol)
    assert np.abs(whole.matrix - split.matrix).max() <= 2 * tol * 10


def test_propagate_rejects_reversed_window_and_reports_failure():
    rho = DensityMatrix(np.eye(2) / 2, (2,))
    with pytest.raises(ValueError):
        propagate(np.zeros((2, 2)), [], rho, 1.0, 1.0)
    broken = TimeDependentHamiltonian(np.zeros((2, 2)), [(X, lambda t: math.nan if t > 1.0 else 1.0)])
    with pytest.raises(IntegrationError) as info:
        propagate(broken, [], rho, 0.0, 2.0)
    assert 1.0 < info.value.time < 2.0


def test_state_fidelity_cases():
    zero, one = StateVector.basis(0, (2,)), StateVector.basis(1, (2,))
    plus = StateVector.normalized([1, 1])
    assert state_fidelity(plus, plus) == pytest.approx(1.0)
    assert state_fidelity(zero, one) == pytest.approx(0.0)
    assert state_fidelity(plus, DensityMatrix(np.eye(2) / 2, (2,))) == pytest.approx(0.5)
    with pytest.raises(DimensionError):
        state_fidelity(plus, StateVector.basis(0, (4,)))


@given(st.integers(0, 10_000))
def test_uhlmann_matches_pure_formula(seed):
    rng = np.random.default_rng(seed)
    psi = StateVector.normalized(rng.normal(size=3) + 1j * rng.normal(size=3))
    rho = DensityMatrix(random_density(rng, 3), (3,))
    assert state_fidelity(psi.to_density(), rho) == pytest.approx(state_fidelity(psi, rho), abs=1e-9)


def test_propagator_kinds():
    u = Propagator(X, "unitary")
    out = u.apply(StateVector.basis(0, (2,)))
    np.testing.assert_allclose(out.amplitudes, [0, 1])
    sup = Propagator(np.kron(X, X.conj()), "superoperator")
    np.testing.assert_allclose(sup.apply(DensityMatrix(np.diag([1, 0]).astype(complex), (2,))).matrix,
                               np.diag([0, 1]))
    with pytest.raises(ValueError):
        Propagator(X, "other")
