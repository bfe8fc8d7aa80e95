"""CPT Y-rotation gates: detunings, full four-level simulation, channel metrics."""

from __future__ import annotations

import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from . import conventions as cv
from .qdm_model import (
    QdmParams,
    balanced_drives,
    bright_state,
    collapse_operators,
    dark_state,
    lambda_hamiltonian,
)
from .quantum_core import IntegrationError, evolve_kets, evolve_operators

__all__ = [
    "DiscriminantError",
    "RotationRequest",
    "QubitChannel",
    "GateReport",
    "SweepPoint",
    "DeltaSweep",
    "ideal_rotation",
    "two_level_detuning",
    "modified_detuning",
    "target_detuning",
    "default_detuning",
    "simulate_gate",
    "cpt_relative_phase",
    "sweep_eta",
    "sweep_delta",
    "write_sweep_csv",
]

PATHOLOGICAL_LEAKAGE = 0.5


class DiscriminantError(ValueError):
    """The corrected-detuning closed form has no real solution here."""


def ideal_rotation(phi: float) -> np.ndarray:
    """exp(-i phi Y / 2) on (|up>, |down>)."""
    c, s = math.cos(phi / 2), math.sin(phi / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def two_level_detuning(phi: float, sigma: float) -> float:
    """Detuning giving a relative phase phi with no unwanted level."""
    if not 0 < phi < 2 * math.pi:
        raise ValueError(f"phi must lie in (0, 2pi), got {phi}")
    half = phi / 2
    # cot(pi/2) is exactly zero; avoid the 6e-17 from cos
    return 0.0 if math.isclose(half, math.pi / 2) else sigma / math.tan(half)


def modified_detuning(phi: float, epsilon: float, sigma: float) -> float:
    """(eps + sqrt(eps^2 + 4 eps sigma cot(phi/2) - 4 sigma^2)) / 2."""
    cot = two_level_detuning(phi, 1.0)
    disc = epsilon ** 2 + 4 * epsilon * sigma * cot - 4 * sigma ** 2
    if disc < 0:
        raise DiscriminantError(
            f"negative discriminant {disc:.6g} for phi={phi:.6g}, epsilon={epsilon}, sigma={sigma}")
    return 0.5 * (epsilon + math.sqrt(disc))


def target_detuning(delta: float, params: QdmParams, reference: str) -> float:
    """Convert a laser detuning quoted from ``reference`` into one from |t>."""
    if reference == "target":
        return delta
    if reference == "unwanted":
        # delta_t = omega_L - omega_t = (omega_L - omega_u) + (omega_u - omega_t)
        return delta + params.unwanted_offset
    raise ValueError(f"reference must be 'target' or 'unwanted', got {reference!r}")


def default_detuning(phi: float, params: QdmParams, sigma: float) -> tuple[float, str]:
    """Detuning and its reference level for a requested rotation.

    With the unwanted level decoupled the two-level value applies from |t>;
    otherwise the corrected closed form under the frozen reference.
    """
    if params.decouple_unwanted:
        return two_level_detuning(phi, sigma), "target"
    return modified_detuning(phi, params.epsilon, sigma), cv.FROZEN_DETUNING_REFERENCE


@dataclass(frozen=True)
class RotationRequest:
    phi: float
    params: QdmParams = field(default_factory=QdmParams)
    sigma: float = cv.DEFAULT_SIGMA_MEV
    with_decay: bool = True
    t_gate: float = cv.DEFAULT_T_GATE_PS
    delta: float | None = None
    reference: str | None = None
    omega_eff: float | None = None
    tol: float = 1e-9

    def __post_init__(self):
        if not 0 < self.phi < 2 * math.pi:
            raise ValueError(f"phi must lie in (0, 2pi), got {self.phi}")
        if not self.sigma > 0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")
        if not self.t_gate > 0:
            raise ValueError(f"t_gate must be positive, got {self.t_gate}")

    def resolved_detuning(self) -> tuple[float, str]:
        if self.delta is None:
            delta, ref = default_detuning(self.phi, self.params, self.sigma)
            return delta, self.reference or ref
        return self.delta, self.reference or "target"


@dataclass(frozen=True)
class QubitChannel:
    """Operator-sum map on the qubit subspace; may be trace-decreasing."""

    kraus_ops: tuple[np.ndarray, ...]
    leakage: float = 0.0

    def __post_init__(self):
        ops = tuple(np.array(k, dtype=complex) for k in self.kraus_ops)
        for k in ops:
            k.setflags(write=False)
        object.__setattr__(self, "kraus_ops", ops)

    @classmethod
    def unitary(cls, u: np.ndarray) -> "QubitChannel":
        return cls((np.asarray(u, dtype=complex),), 0.0)

    @classmethod
    def from_choi(cls, choi: np.ndarray, cutoff: float = 1e-13) -> "QubitChannel":
        """Choi convention J = sum_ij |i><j| (x) E(|i><j|)."""
        w, v = np.linalg.eigh(0.5 * (choi + choi.conj().T))
        ops = [math.sqrt(lam) * v[:, k].reshape(2, 2).T for k, lam in enumerate(w) if lam > cutoff]
        ops.sort(key=lambda k: -np.linalg.norm(k))
        ch = cls(tuple(ops))
        return replace(ch, leakage=ch.average_leakage())

    def effect(self) -> np.ndarray:
        """sum K^dag K."""
        return sum(k.conj().T @ k for k in self.kraus_ops)

    def apply(self, rho: np.ndarray) -> np.ndarray:
        return sum(k @ rho @ k.conj().T for k in self.kraus_ops)

    def then(self, other: "QubitChannel") -> "QubitChannel":
        """Apply self first, then other."""
        ops = tuple(b @ a for b in other.kraus_ops for a in self.kraus_ops)
        ch = QubitChannel(ops)
        return replace(ch, leakage=ch.average_leakage())

    def leakage_for(self, rho: np.ndarray) -> float:
        return float(np.real(np.trace(rho)) - np.real(np.trace(self.effect() @ rho)))

    def average_leakage(self) -> float:
        return float(1.0 - np.real(np.trace(self.effect())) / 2)

    def is_physical(self, tol: float = 1e-9) -> bool:
        return bool(np.linalg.eigvalsh(np.eye(2) - self.effect()).min() >= -tol)

    def process_fidelity(self, u: np.ndarray) -> float:
        return float(sum(abs(np.trace(u.conj().T @ k)) ** 2 for k in self.kraus_ops) / 4)

    def average_fidelity(self, u: np.ndarray) -> float:
        """(d F_pro + p)/(d + 1) with p the mean trace retention."""
        p = 1.0 - self.average_leakage()
        return (2 * self.process_fidelity(u) + p) / 3


@dataclass(frozen=True)
class GateReport:
    phi: float
    delta_used: float
    reference: str
    delta_target: float
    error: float
    leakage: float
    runtime_s: float
    pathological: bool = False

    @property
    def fidelity(self) -> float:
        return 1.0 - self.error


def _choi_from_outputs(outs: dict[tuple[int, int], np.ndarray]) -> np.ndarray:
    choi = np.zeros((4, 4), dtype=complex)
    for (i, j), block in outs.items():
        e = np.zeros((2, 2))
        e[i, j] = 1.0
        choi += np.kron(e, block)
    return choi


def simulate_gate(req: RotationRequest) -> tuple[QubitChannel, GateReport]:
    started = time.perf_counter()
    params = req.params
    if not req.with_decay:
        params = params.with_(gamma=0.0, dephasing=0.0)
    delta, ref = req.resolved_detuning()
    delta_t = target_detuning(delta, params, ref)
    omega = req.sigma if req.omega_eff is None else req.omega_eff
    d0, d1 = balanced_drives(omega, req.sigma, delta_t, req.t_gate)
    ham = lambda_hamiltonian(params, d0, d1)
    collapse = collapse_operators(params)
    # never step across more than a fraction of the pulse width
    max_step = d0.width_ps / 4

    if collapse:
        inputs = [(0, 0), (0, 1), (1, 0), (1, 1)]
        stack = np.zeros((4, 4, 4), dtype=complex)
        for k, (i, j) in enumerate(inputs):
            stack[k, i, j] = 1.0
        out = evolve_operators(ham, collapse, stack, 0.0, req.t_gate, req.tol, max_step)
        channel = QubitChannel.from_choi(_choi_from_outputs({ij: out[k, :2, :2] for k, ij in enumerate(inputs)}))
    else:
        kets = evolve_kets(ham, np.eye(4, dtype=complex)[:, :2], 0.0, req.t_gate, req.tol, max_step)
        m = kets[:2, :2]
        channel = QubitChannel((m,), float(1.0 - np.real(np.trace(m.conj().T @ m)) / 2))

    target = ideal_rotation(req.phi)
    error = float(min(max(1.0 - channel.average_fidelity(target), 0.0), 1.0))
    report = GateReport(
        phi=req.phi,
        delta_used=delta,
        reference=ref,
        delta_target=delta_t,
        error=error,
        leakage=channel.leakage,
        runtime_s=time.perf_counter() - started,
        pathological=channel.leakage > PATHOLOGICAL_LEAKAGE,
    )
    return channel, report


def cpt_relative_phase(m: np.ndarray) -> float:
    """arg<D|M|D> - arg<B|M|B>, wrapped to (-pi, pi]; equals phi for R_Y(phi)."""
    d, b = dark_state(), bright_state()
    ph = np.angle(np.vdot(d, m @ d)) - np.angle(np.vdot(b, m @ b))
    return float(np.angle(np.exp(1j * ph)))


@dataclass(frozen=True)
class SweepPoint:
    param: float
    error: float
    leakage: float
    delta_meV: float
    failure: str | None = None


@dataclass(frozen=True)
class DeltaSweep:
    points: tuple[SweepPoint, ...]
    reference: str
    u_above_t: bool

    @property
    def argmin(self) -> SweepPoint:
        ok = [p for p in self.points if p.failure is None]
        return min(ok, key=lambda p: p.error)

    @property
    def step(self) -> float:
        xs = [p.param for p in self.points]
        return float(np.min(np.abs(np.diff(xs)))) if len(xs) > 1 else float("nan")

    @property
    def degenerate(self) -> bool:
        return len(self.points) < 2


def _run_point(args) -> SweepPoint:
    x, req = args
    try:
        _, rep = simulate_gate(req)
        return SweepPoint(x, rep.error, rep.leakage, rep.delta_used)
    except (IntegrationError, DiscriminantError, ValueError) as exc:
        nan = float("nan")
        return SweepPoint(x, nan, nan, nan, failure=str(exc))


def _map_points(jobs, workers: int) -> list[SweepPoint]:
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_run_point, jobs))
    return [_run_point(j) for j in jobs]


def sweep_eta(phi: float, grid: Sequence[float], base: RotationRequest | None = None,
              workers: int = 1) -> list[SweepPoint]:
    """Full-dynamics gate error at each mixing angle; grid order is kept."""
    base = base or RotationRequest(phi)
    jobs = []
    for eta in grid:
        if not 0 < eta < math.pi / 2:
            raise ValueError(f"eta grid point {eta} outside (0, pi/2)")
        jobs.append((float(eta), replace(base, phi=phi, params=base.params.with_(eta=float(eta)))))
    return _map_points(jobs, workers)


def sweep_delta(phi: float, grid: Sequence[float], base: RotationRequest | None = None,
                reference: str = "target", workers: int = 1) -> DeltaSweep:
    """Gate error versus detuning quoted from ``reference``."""
    if len(grid) == 0:
        raise ValueError("detuning grid is empty")
    base = base or RotationRequest(phi)
    jobs = [(float(d), replace(base, phi=phi, delta=float(d), reference=reference)) for d in grid]
    return DeltaSweep(tuple(_map_points(jobs, workers)), reference, base.params.u_above_t)


def write_sweep_csv(points: Sequence[SweepPoint], path) -> None:
    with open(path, "w", newline="") as fh:
        fh.write("param,error,leakage,delta_meV\n")
        for p in points:
            fh.write(f"{p.param:.17g},{p.error:.17g},{p.leakage:.17g},{p.delta_meV:.17g}\n")
