"""Stabilizer certification of GHZ and linear-cluster states.

Expectations are exact contractions, never sampled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .quantum_core import DensityMatrix, DimensionError, StateVector, apply_local, state_fidelity

__all__ = [
    "PAULI",
    "PauliString",
    "StabilizerGroup",
    "CertificationReport",
    "ghz_stabilizers",
    "cluster_stabilizers",
    "canonical_group",
    "ghz_state",
    "linear_cluster_state",
    "canonical_state",
    "expectation",
    "certify",
    "pauli_fix",
    "write_certification_csv",
]

PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


@dataclass(frozen=True)
class PauliString:
    letters: str
    sign: int = 1

    def __post_init__(self):
        letters = self.letters.upper()
        if set(letters) - set("IXYZ"):
            raise ValueError(f"bad Pauli letters {self.letters!r}")
        if self.sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")
        object.__setattr__(self, "letters", letters)

    def __len__(self) -> int:
        return len(self.letters)

    def __str__(self) -> str:
        return ("+" if self.sign > 0 else "-") + self.letters

    @classmethod
    def single(cls, n: int, index: int, letter: str) -> "PauliString":
        s = ["I"] * n
        s[index] = letter
        return cls("".join(s))

    @property
    def weight(self) -> int:
        return sum(c != "I" for c in self.letters)

    def bits(self) -> tuple[np.ndarray, np.ndarray]:
        x = np.array([c in "XY" for c in self.letters], dtype=np.uint8)
        z = np.array([c in "ZY" for c in self.letters], dtype=np.uint8)
        return x, z

    def commutes_with(self, other: "PauliString") -> bool:
        x1, z1 = self.bits()
        x2, z2 = other.bits()
        return int(np.sum(x1 & z2) + np.sum(z1 & x2)) % 2 == 0

    def matrix(self) -> np.ndarray:
        m = np.array([[self.sign]], dtype=complex)
        for c in self.letters:
            m = np.kron(m, PAULI[c])
        return m

    def apply(self, data: np.ndarray, dims: Sequence[int]) -> np.ndarray:
        """P|psi> for kets, P rho P for density matrices (sign drops out there)."""
        out = data
        for i, c in enumerate(self.letters):
            if c != "I":
                out = apply_local(out, PAULI[c], i, dims)
        return self.sign * out if data.ndim == 1 else out


@dataclass(frozen=True)
class StabilizerGroup:
    generators: tuple[PauliString, ...]

    def __post_init__(self):
        gens = tuple(self.generators)
        n = {len(g) for g in gens}
        if len(n) != 1:
            raise ValueError("generators must act on the same number of qubits")
        for i, a in enumerate(gens):
            for b in gens[i + 1:]:
                if not a.commutes_with(b):
                    raise ValueError(f"generators {a} and {b} anticommute")
        object.__setattr__(self, "generators", gens)

    @property
    def n_qubits(self) -> int:
        return len(self.generators[0])

    def __len__(self) -> int:
        return len(self.generators)

    def __iter__(self):
        return iter(self.generators)


def ghz_stabilizers(n: int) -> StabilizerGroup:
    if n < 2:
        raise ValueError(f"GHZ stabilizers need n >= 2, got {n}")
    gens = [PauliString("X" * n)]
    gens += [PauliString("I" * i + "ZZ" + "I" * (n - i - 2)) for i in range(n - 1)]
    return StabilizerGroup(tuple(gens))


def cluster_stabilizers(n: int) -> StabilizerGroup:
    if n < 2:
        raise ValueError(f"cluster stabilizers need n >= 2, got {n}")
    gens = []
    for i in range(n):
        s = ["I"] * n
        s[i] = "X"
        if i > 0:
            s[i - 1] = "Z"
        if i < n - 1:
            s[i + 1] = "Z"
        gens.append(PauliString("".join(s)))
    return StabilizerGroup(tuple(gens))


def canonical_group(target: str, n: int) -> StabilizerGroup:
    """Generators of the canonical target; a single qubit is |+> for both."""
    if n == 1:
        return StabilizerGroup((PauliString("X"),))
    if target == "ghz":
        return ghz_stabilizers(n)
    if target == "linear_cluster":
        return cluster_stabilizers(n)
    raise ValueError(f"unknown target {target!r}")


def ghz_state(n: int) -> StateVector:
    v = np.zeros(2 ** n, dtype=complex)
    v[0] = v[-1] = 1 / math.sqrt(2)
    return StateVector(v, (2,) * n)


def linear_cluster_state(n: int) -> StateVector:
    """prod_i CZ_{i,i+1} |+>^n built amplitude by amplitude."""
    idx = np.arange(2 ** n)
    bits = (idx[:, None] >> np.arange(n - 1, -1, -1)) & 1
    parity = np.sum(bits[:, :-1] & bits[:, 1:], axis=1) % 2
    return StateVector((1 - 2 * parity) / 2 ** (n / 2), (2,) * n)


def canonical_state(target: str, n: int) -> StateVector:
    if n == 1:
        return StateVector(np.array([1, 1]) / math.sqrt(2), (2,))
    return ghz_state(n) if target == "ghz" else linear_cluster_state(n)


def _data_dims(state) -> tuple[np.ndarray, tuple[int, ...]]:
    if isinstance(state, StateVector):
        return state.amplitudes, state.dims
    if isinstance(state, DensityMatrix):
        return state.matrix, state.dims
    return state.data, state.dims


def _left_multiply(rho: np.ndarray, op: np.ndarray, axis: int, dims: tuple[int, ...]) -> np.ndarray:
    t = rho.reshape(dims + (rho.shape[0],))
    t = np.moveaxis(np.tensordot(op, t, axes=([1], [axis])), 0, axis)
    return t.reshape(rho.shape)


def expectation(state, p: PauliString) -> float:
    """<P> normalized by the state's norm/trace (flagged losses excluded)."""
    data, dims = _data_dims(state)
    if len(p) != len(dims) or any(d != 2 for d in dims):
        raise DimensionError(f"Pauli string of length {len(p)} on dims {dims}")
    if data.ndim == 1:
        norm = np.vdot(data, data).real
        val = np.vdot(data, p.apply(data, dims)).real / norm
    else:
        out = data
        for i, c in enumerate(p.letters):
            if c != "I":
                out = _left_multiply(out, PAULI[c], i, dims)
        val = p.sign * np.trace(out).real / np.trace(data).real
    return float(min(max(val, -1.0), 1.0))


@dataclass(frozen=True)
class CertificationReport:
    generators: tuple[PauliString, ...]
    expectations: tuple[float, ...]

    @property
    def min_expectation(self) -> float:
        return min(self.expectations)

    @property
    def fidelity_lower_bound(self) -> float:
        b = 1.0 - sum((1.0 - e) / 2 for e in self.expectations)
        return float(min(max(b, 0.0), 1.0))

    def summary(self) -> str:
        return (f"generators={len(self.generators)} min_expectation={self.min_expectation:.12g} "
                f"fidelity_lower_bound={self.fidelity_lower_bound:.12g}")


def certify(state, group: StabilizerGroup) -> CertificationReport:
    return CertificationReport(group.generators, tuple(expectation(state, g) for g in group))


def fidelity_to_canonical(state, target: str) -> float:
    data, dims = _data_dims(state)
    ref = canonical_state(target, len(dims))
    if data.ndim == 1:
        return state_fidelity(ref, StateVector(data / np.linalg.norm(data), dims))
    return state_fidelity(ref, DensityMatrix(data / np.trace(data).real, dims))


def _gf2_solve(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    a = a.copy() % 2
    b = b.copy() % 2
    rows, cols = a.shape
    pivots = []
    r = 0
    for c in range(cols):
        hit = np.nonzero(a[r:, c])[0]
        if hit.size == 0:
            continue
        k = r + hit[0]
        a[[r, k]] = a[[k, r]]
        b[[r, k]] = b[[k, r]]
        for i in range(rows):
            if i != r and a[i, c]:
                a[i] ^= a[r]
                b[i] ^= b[r]
        pivots.append(c)
        r += 1
        if r == rows:
            break
    if np.any(b[r:]):
        raise ValueError("sign pattern is not reachable by a Pauli frame")
    x = np.zeros(cols, dtype=np.uint8)
    for i, c in enumerate(pivots):
        x[c] = b[i]
    return x


def pauli_fix(group: StabilizerGroup, signs: Sequence[int]) -> PauliString:
    """Pauli P with P K_i P = signs[i] * K_i for every generator."""
    n = group.n_qubits
    a = np.zeros((len(group), 2 * n), dtype=np.uint8)
    for i, g in enumerate(group):
        x, z = g.bits()
        a[i, :n] = z  # pairs with P's x bits
        a[i, n:] = x  # pairs with P's z bits
    b = np.array([0 if s > 0 else 1 for s in signs], dtype=np.uint8)
    u = _gf2_solve(a, b)
    letters = "".join("IXZY"[int(xb) + 2 * int(zb)] for xb, zb in zip(u[:n], u[n:]))
    return PauliString(letters)


def write_certification_csv(report: CertificationReport, path) -> None:
    with open(path, "w", newline="") as fh:
        fh.write("generator,expectation\n")
        for g, e in zip(report.generators, report.expectations):
            fh.write(f"{g},{e:.17g}\n")
