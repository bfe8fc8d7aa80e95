"""Dense linear algebra and open-system propagation (hbar = 1).

States are small (tens to a few thousand dimensions), so everything is
held as dense complex arrays. Density matrices are vectorized row-major:
``vec(A @ X @ B) = kron(A, B.T) @ vec(X)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import solve_ivp

__all__ = [
    "DimensionError",
    "IntegrationError",
    "StateVector",
    "DensityMatrix",
    "Propagator",
    "TimeDependentHamiltonian",
    "tensor_product",
    "partial_trace",
    "apply_local",
    "liouvillian",
    "propagate",
    "evolve_operators",
    "evolve_kets",
    "state_fidelity",
]


class DimensionError(ValueError):
    pass


class IntegrationError(RuntimeError):
    """The adaptive integrator could not reach the end of the window."""

    def __init__(self, message: str, time: float):
        super().__init__(f"{message} (failed at t = {time:.6g})")
        self.time = time


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex, copy=True)
    a.setflags(write=False)
    return a


def _check_dims(dims: Sequence[int], size: int) -> tuple[int, ...]:
    dims = tuple(int(d) for d in dims)
    if any(d < 1 for d in dims) or math.prod(dims) != size:
        raise DimensionError(f"dims {dims} do not match dimension {size}")
    return dims


@dataclass(frozen=True)
class StateVector:
    amplitudes: np.ndarray
    dims: tuple[int, ...] = field(default=None)

    def __post_init__(self):
        amps = np.asarray(self.amplitudes).reshape(-1)
        dims = self.dims if self.dims is not None else (amps.size,)
        object.__setattr__(self, "dims", _check_dims(dims, amps.size))
        object.__setattr__(self, "amplitudes", _frozen(amps))

    @classmethod
    def basis(cls, index: int, dims: Sequence[int]) -> "StateVector":
        v = np.zeros(math.prod(dims), dtype=complex)
        v[index] = 1.0
        return cls(v, tuple(dims))

    @classmethod
    def normalized(cls, amplitudes, dims=None) -> "StateVector":
        amps = np.asarray(amplitudes, dtype=complex).reshape(-1)
        return cls(amps / np.linalg.norm(amps), dims)

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def to_density(self) -> "DensityMatrix":
        return DensityMatrix(np.outer(self.amplitudes, self.amplitudes.conj()), self.dims)


@dataclass(frozen=True)
class DensityMatrix:
    matrix: np.ndarray
    dims: tuple[int, ...] = field(default=None)

    def __post_init__(self):
        m = np.asarray(self.matrix)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DimensionError(f"density matrix must be square, got {m.shape}")
        dims = self.dims if self.dims is not None else (m.shape[0],)
        object.__setattr__(self, "dims", _check_dims(dims, m.shape[0]))
        object.__setattr__(self, "matrix", _frozen(m))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def trace(self) -> float:
        return float(np.trace(self.matrix).real)

    def purity(self) -> float:
        return float(np.real(np.vdot(self.matrix, self.matrix)))

    def is_physical(self, tol: float = 1e-10) -> bool:
        m = self.matrix
        if np.max(np.abs(m - m.conj().T), initial=0.0) > 1e-12:
            return False
        t = self.trace()
        if t < -tol or t > 1 + tol:
            return False
        return bool(np.linalg.eigvalsh(0.5 * (m + m.conj().T)).min() >= -tol)


@dataclass(frozen=True)
class Propagator:
    """Either a unitary on kets or a superoperator on row-major vec(rho)."""

    map: np.ndarray
    kind: str

    def __post_init__(self):
        if self.kind not in ("unitary", "superoperator"):
            raise ValueError(f"unknown propagator kind {self.kind!r}")
        object.__setattr__(self, "map", _frozen(self.map))

    def apply(self, state):
        if self.kind == "unitary":
            if isinstance(state, StateVector):
                return StateVector(self.map @ state.amplitudes, state.dims)
            u = self.map
            return DensityMatrix(u @ state.matrix @ u.conj().T, state.dims)
        if isinstance(state, StateVector):
            state = state.to_density()
        n = state.dim
        out = (self.map @ state.matrix.reshape(-1)).reshape(n, n)
        return DensityMatrix(out, state.dims)


class TimeDependentHamiltonian:
    """H(t) = static + sum_k f_k(t) * drive_k.

    Callable like a plain ``H(t)`` function; :func:`propagate` recognises the
    decomposition and assembles the Liouvillian from precomputed pieces.
    """

    def __init__(self, static, drives: Sequence[tuple[np.ndarray, Callable[[float], float]]] = ()):
        self.static = np.asarray(static, dtype=complex)
        self.drives = [(np.asarray(m, dtype=complex), f) for m, f in drives]

    @property
    def dim(self) -> int:
        return self.static.shape[0]

    def __call__(self, t: float) -> np.ndarray:
        h = self.static.copy()
        for m, f in self.drives:
            h += f(t) * m
        return h


def tensor_product(a, b):
    if isinstance(a, StateVector) and isinstance(b, StateVector):
        return StateVector(np.kron(a.amplitudes, b.amplitudes), a.dims + b.dims)
    if isinstance(a, DensityMatrix) and isinstance(b, DensityMatrix):
        return DensityMatrix(np.kron(a.matrix, b.matrix), a.dims + b.dims)
    raise TypeError("tensor_product needs two StateVectors or two DensityMatrices")


def partial_trace(rho, keep: Sequence[int]) -> DensityMatrix:
    if isinstance(rho, StateVector):
        rho = rho.to_density()
    keep = sorted(set(int(k) for k in keep))
    if not keep:
        raise ValueError("keep must name at least one subsystem")
    n = len(rho.dims)
    if keep[0] < 0 or keep[-1] >= n:
        raise DimensionError(f"subsystem indices {keep} out of range for {n} subsystems")
    drop = [i for i in range(n) if i not in keep]
    t = rho.matrix.reshape(rho.dims + rho.dims)
    # trace out from the highest index so axis numbers stay valid
    for i in reversed(drop):
        m = t.ndim // 2
        t = np.trace(t, axis1=i, axis2=i + m)
    kd = tuple(rho.dims[i] for i in keep)
    d = math.prod(kd)
    return DensityMatrix(t.reshape(d, d), kd)


def apply_local(data: np.ndarray, op: np.ndarray, axis: int, dims: Sequence[int]) -> np.ndarray:
    """Apply a single-subsystem operator to a ket (1-D) or as op.rho.op^dag (2-D)."""
    dims = tuple(dims)
    op = np.asarray(op)
    if data.ndim == 1:
        t = data.reshape(dims)
        t = np.moveaxis(np.tensordot(op, t, axes=([1], [axis])), 0, axis)
        return t.reshape(-1)
    n = len(dims)
    t = data.reshape(dims + dims)
    t = np.moveaxis(np.tensordot(op, t, axes=([1], [axis])), 0, axis)
    t = np.moveaxis(np.tensordot(op.conj(), t, axes=([1], [n + axis])), 0, n + axis)
    d = math.prod(dims)
    return t.reshape(d, d)


def _dissipator(collapse: Sequence[tuple[np.ndarray, float]], n: int) -> np.ndarray:
    eye = np.eye(n)
    d = np.zeros((n * n, n * n), dtype=complex)
    for op, rate in collapse:
        if rate == 0:
            continue
        op = np.asarray(op, dtype=complex)
        ld = op.conj().T @ op
        d += rate * (np.kron(op, op.conj()) - 0.5 * np.kron(ld, eye) - 0.5 * np.kron(eye, ld.T))
    return d


def _commutator_super(h: np.ndarray) -> np.ndarray:
    eye = np.eye(h.shape[0])
    return -1j * (np.kron(h, eye) - np.kron(eye, h.T))


def liouvillian(h: np.ndarray, collapse: Sequence[tuple[np.ndarray, float]] = ()) -> np.ndarray:
    h = np.asarray(h, dtype=complex)
    return _commutator_super(h) + _dissipator(collapse, h.shape[0])


def _generator(hamiltonian, collapse, n: int) -> Callable[[float], np.ndarray]:
    diss = _dissipator(collapse, n)
    if isinstance(hamiltonian, TimeDependentHamiltonian):
        l0 = _commutator_super(hamiltonian.static) + diss
        pieces = [(_commutator_super(m), f) for m, f in hamiltonian.drives]

        def gen(t):
            out = l0.copy()
            for m, f in pieces:
                out += f(t) * m
            return out

        return gen
    if callable(hamiltonian):
        return lambda t: _commutator_super(np.asarray(hamiltonian(t), dtype=complex)) + diss
    static = liouvillian(hamiltonian, collapse)
    return lambda t: static


def _solve(rhs, y0: np.ndarray, t0: float, t1: float, tol: float, max_step: float) -> np.ndarray:
    if not t1 > t0:
        raise ValueError(f"need t1 > t0, got t0={t0}, t1={t1}")

    def checked(t, y):
        dy = rhs(t, y)
        if not np.all(np.isfinite(dy)):
            # the RK error estimate turns NaN and the step controller never recovers
            raise IntegrationError("non-finite generator", float(t))
        return dy

    sol = solve_ivp(checked, (t0, t1), y0, method="DOP853", rtol=tol, atol=tol, max_step=max_step)
    if sol.status != 0:
        raise IntegrationError(sol.message, float(sol.t[-1]))
    return sol.y[:, -1]


def evolve_operators(hamiltonian, collapse, operators: np.ndarray, t0: float, t1: float,
                     tol: float = 1e-9, max_step: float = np.inf) -> np.ndarray:
    """Evolve a stack of operators (k, n, n) under the Lindblad generator.

    The master equation is linear, so non-Hermitian inputs such as |i><j|
    are fine; this is how process maps are tomographed.
    """
    ops = np.asarray(operators, dtype=complex)
    k, n, _ = ops.shape
    gen = _generator(hamiltonian, collapse, n)
    y0 = ops.reshape(k, n * n).T.reshape(-1)

    def rhs(t, y):
        return (gen(t) @ y.reshape(n * n, k)).reshape(-1)

    y = _solve(rhs, y0, t0, t1, tol, max_step)
    return y.reshape(n * n, k).T.reshape(k, n, n)


def evolve_kets(hamiltonian, kets: np.ndarray, t0: float, t1: float,
                tol: float = 1e-9, max_step: float = np.inf) -> np.ndarray:
    """Schroedinger evolution of the columns of ``kets`` (n, k)."""
    kets = np.asarray(kets, dtype=complex)
    if kets.ndim == 1:
        return evolve_kets(hamiltonian, kets[:, None], t0, t1, tol, max_step)[:, 0]
    n, k = kets.shape
    h = hamiltonian if callable(hamiltonian) else (lambda t, _h=np.asarray(hamiltonian): _h)

    def rhs(t, y):
        return (-1j * (h(t) @ y.reshape(n, k))).reshape(-1)

    return _solve(rhs, kets.reshape(-1), t0, t1, tol, max_step).reshape(n, k)


def propagate(hamiltonian, collapse, state, t0: float, t1: float,
              tol: float = 1e-9, max_step: float = np.inf) -> DensityMatrix:
    """Lindblad evolution of a density matrix from t0 to t1.

    ``collapse`` is a list of ``(L, rate)``; the dissipator is
    ``rate * (L rho L^dag - {L^dag L, rho}/2)``.
    """
    if isinstance(state, StateVector):
        state = state.to_density()
    out = evolve_operators(hamiltonian, collapse, state.matrix[None], t0, t1, tol, max_step)[0]
    return DensityMatrix(0.5 * (out + out.conj().T), state.dims)


def _psd_sqrt(m: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(0.5 * (m + m.conj().T))
    # round-off eigenvalues of a rank-deficient input would contribute sqrt(1e-16)
    w = np.where(w > 1e-13 * max(w.max(), 1.0), w, 0.0)
    return (v * np.sqrt(w)) @ v.conj().T


def state_fidelity(a, b) -> float:
    """Squared (Uhlmann) fidelity; pure inputs take the cheap paths."""
    da = a.dim if hasattr(a, "dim") else None
    db = b.dim if hasattr(b, "dim") else None
    if da != db:
        raise DimensionError(f"dimension mismatch: {da} vs {db}")
    if isinstance(a, StateVector) and isinstance(b, StateVector):
        f = abs(np.vdot(a.amplitudes, b.amplitudes)) ** 2
    elif isinstance(a, StateVector):
        f = np.real(a.amplitudes.conj() @ b.matrix @ a.amplitudes)
    elif isinstance(b, StateVector):
        f = np.real(b.amplitudes.conj() @ a.matrix @ b.amplitudes)
    else:
        # trace norm of sqrt(a) sqrt(b); no square root of round-off eigenvalues
        s = np.linalg.svd(_psd_sqrt(a.matrix) @ _psd_sqrt(b.matrix), compute_uv=False)
        f = np.sum(s) ** 2
    return float(min(max(f, 0.0), 1.0))
