import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from qdmphoton.quantum_core import DensityMatrix, DimensionError, StateVector, state_fidelity
from qdmphoton.verification import (
    PauliString,
    StabilizerGroup,
    canonical_group,
    canonical_state,
    certify,
    cluster_stabilizers,
    expectation,
    fidelity_to_canonical,
    ghz_stabilizers,
    ghz_state,
    linear_cluster_state,
    pauli_fix,
    write_certification_csv,
)


def letters(group):
    return [g.letters for g in group]


def test_generators():
    assert letters(ghz_stabilizers(2)) == ["XX", "ZZ"]
    assert letters(ghz_stabilizers(3)) == ["XXX", "ZZI", "IZZ"]
    assert letters(cluster_stabilizers(2)) == ["XZ", "ZX"]
    assert letters(cluster_stabilizers(3)) == ["XZI", "ZXZ", "IZX"]
    for n in range(2, 7):
        assert len(ghz_stabilizers(n)) == n == len(cluster_stabilizers(n))
    for bad in (ghz_stabilizers, cluster_stabilizers):
        with pytest.raises(ValueError):
            bad(1)


def test_anticommuting_generators_rejected():
    with pytest.raises(ValueError):
        StabilizerGroup((PauliString("X"), PauliString("Z")))


def test_simple_expectations():
    zero = StateVector.basis(0, (2,))
    plus = StateVector.normalized([1, 1])
    assert expectation(zero, PauliString("Z")) == pytest.approx(1.0)
    assert expectation(plus, PauliString("X")) == pytest.approx(1.0)
    assert expectation(plus, PauliString("X", -1)) == pytest.approx(-1.0)
    with pytest.raises(DimensionError):
        expectation(plus, PauliString("XX"))


def test_density_and_vector_agree():
    psi = linear_cluster_state(4)
    for g in cluster_stabilizers(4):
        assert expectation(psi.to_density(), g) == pytest.approx(expectation(psi, g), abs=1e-14)


@pytest.mark.parametrize("target", ["ghz", "linear_cluster"])
@pytest.mark.parametrize("n", [2, 3, 5, 8])
def test_canonical_states_certify(target, n):
    rep = certify(canonical_state(target, n), canonical_group(target, n))
    assert rep.min_expectation == pytest.approx(1.0, abs=1e-12)
    assert rep.fidelity_lower_bound == pytest.approx(1.0, abs=1e-12)


def test_fully_mixed_bound():
    for n in (2, 3, 4):
        rho = DensityMatrix(np.eye(2 ** n) / 2 ** n, (2,) * n)
        rep = certify(rho, cluster_stabilizers(n))
        np.testing.assert_allclose(rep.expectations, 0.0, atol=1e-15)
        assert rep.fidelity_lower_bound == pytest.approx(max(0.0, 1 - n / 2))


def test_ghz_is_not_a_cluster():
    for n in range(3, 7):
        rep = certify(ghz_state(n), cluster_stabilizers(n))
        assert rep.min_expectation <= 1 - 1e-3


def random_density(rng, n, rank):
    a = rng.normal(size=(2 ** n, rank)) + 1j * rng.normal(size=(2 ** n, rank))
    rho = a @ a.conj().T
    return DensityMatrix(rho / np.trace(rho).real, (2,) * n)


@given(st.integers(0, 100_000), st.integers(2, 4), st.sampled_from(["ghz", "linear_cluster"]),
       st.floats(0.0, 1.0))
def test_witness_sound(seed, n, target, mix):
    rng = np.random.default_rng(seed)
    ideal = canonical_state(target, n).to_density().matrix
    noise = random_density(rng, n, rng.integers(1, 2 ** n + 1)).matrix
    rho = DensityMatrix((1 - mix) * ideal + mix * noise, (2,) * n)
    bound = certify(rho, canonical_group(target, n)).fidelity_lower_bound
    assert bound <= fidelity_to_canonical(rho, target) + 1e-9


@given(st.integers(2, 6), st.sampled_from(["ghz", "linear_cluster"]), st.data())
def test_pauli_fix_restores_signs(n, target, data):
    group = canonical_group(target, n)
    frame = PauliString("".join(data.draw(st.lists(st.sampled_from("IXYZ"), min_size=n, max_size=n))))
    psi = canonical_state(target, n)
    moved = StateVector(frame.apply(psi.amplitudes, psi.dims), psi.dims)
    signs = [round(expectation(moved, g)) for g in group]
    fix = pauli_fix(group, signs)
    back = StateVector(fix.apply(moved.amplitudes, psi.dims), psi.dims)
    assert state_fidelity(back, psi) == pytest.approx(1.0, abs=1e-12)
    # the fix maps the moved group onto the canonical one
    assert all(round(expectation(back, g)) == 1 for g in group)


def test_cluster_amplitudes_match_cz_construction():
    n = 3
    plus = np.ones(2 ** n) / 2 ** (n / 2)
    cz = np.ones(2 ** n)
    for idx in range(2 ** n):
        b = [(idx >> (n - 1 - i)) & 1 for i in range(n)]
        cz[idx] = (-1) ** (b[0] * b[1] + b[1] * b[2])
    np.testing.assert_allclose(linear_cluster_state(n).amplitudes, cz * plus)


def test_certification_csv(tmp_path):
    rep = certify(ghz_state(3), ghz_stabilizers(3))
    path = tmp_path / "c.csv"
    write_certification_csv(rep, path)
    lines = path.read_text().splitlines()
    assert lines[0] == "generator,expectation"
    assert lines[1] == "+XXX,1"
    assert "fidelity_lower_bound=1" in rep.summary()
