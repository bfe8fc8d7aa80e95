"""Four-level hole-spin molecule: levels, couplings, sech drives, CPT basis.

Level order is (|up>, |down>, |t>, |u>). Energies are in meV and times in
ps; :func:`lambda_hamiltonian` divides by hbar to hand the integrator a
generator in rad/ps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from . import conventions as cv
from .quantum_core import TimeDependentHamiltonian

__all__ = [
    "QdmParams",
    "LevelBasis",
    "PulseSpec",
    "CyclingTransition",
    "CYCLING_TRANSITIONS",
    "sech_envelope",
    "balanced_drives",
    "build_lambda_hamiltonian",
    "lambda_hamiltonian",
    "collapse_operators",
    "cpt_basis_transform",
    "dark_state",
    "bright_state",
]

UP, DOWN, T, U = cv.LEVEL_UP, cv.LEVEL_DOWN, cv.LEVEL_TARGET, cv.LEVEL_UNWANTED


@dataclass(frozen=True)
class QdmParams:
    """Physical parameters of one molecule.

    ``gamma`` and ``dephasing`` are in 1/ns. ``decouple_unwanted`` zeroes the
    optical couplings to |u>, leaving an exact bright/target two-level
    problem.
    """

    eta: float = cv.DEFAULT_ETA
    epsilon: float = cv.DEFAULT_EPSILON_MEV
    gamma: float = cv.DEFAULT_GAMMA_PER_NS
    dephasing: float = 0.0
    u_above_t: bool = cv.FROZEN_U_ABOVE_T
    decouple_unwanted: bool = False

    def __post_init__(self):
        if not 0 < self.eta < math.pi / 2:
            raise ValueError(f"eta must lie in (0, pi/2), got {self.eta}")
        if not self.epsilon > 0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")
        if self.gamma < 0:
            raise ValueError(f"gamma must be non-negative, got {self.gamma}")
        if self.dephasing < 0:
            raise ValueError(f"dephasing must be non-negative, got {self.dephasing}")

    def with_(self, **changes) -> "QdmParams":
        return replace(self, **changes)

    @property
    def basis(self) -> "LevelBasis":
        return LevelBasis.from_eta(self.eta)

    @property
    def unwanted_offset(self) -> float:
        """Energy of |u> minus energy of |t>, in meV."""
        return self.epsilon if self.u_above_t else -self.epsilon


@dataclass(frozen=True)
class LevelBasis:
    levels: tuple[str, ...]
    lambda0: float
    lambda1: float

    @classmethod
    def from_eta(cls, eta: float) -> "LevelBasis":
        return cls(cv.LEVEL_NAMES, -math.tan(eta), 1.0 / math.tan(eta))


@dataclass(frozen=True)
class PulseSpec:
    """One sech drive. ``omega_eff``, ``sigma`` and ``delta`` in meV.

    ``delta`` is the laser detuning from |t>; it enters the rotating-frame
    diagonal as ``-delta`` (coupling to |t> carries exp(-i delta t)).
    """

    omega_eff: float
    sigma: float
    delta: float = 0.0
    phase: float = 0.0
    t_center: float = cv.DEFAULT_T_GATE_PS / 2
    t_gate: float = cv.DEFAULT_T_GATE_PS

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")
        if not self.t_gate > 0:
            raise ValueError(f"t_gate must be positive, got {self.t_gate}")

    @property
    def rate(self) -> float:
        """Bandwidth in 1/ps."""
        return self.sigma / cv.HBAR_MEV_PS

    @property
    def width_ps(self) -> float:
        return 1.0 / self.rate


@dataclass(frozen=True)
class CyclingTransition:
    polarization: str
    coupled_spin: int
    photon_energy_label: str


CYCLING_TRANSITIONS = (
    CyclingTransition("sigma+", cv.TIME_BIN_EMITTER, "omega+"),
    CyclingTransition("sigma-", 1 - cv.TIME_BIN_EMITTER, "omega-"),
)


def _sech(x):
    # 1/cosh overflows quietly to 0 for large |x|, which is what we want
    with np.errstate(over="ignore"):
        return 1.0 / np.cosh(x)


def sech_envelope(t, spec: PulseSpec):
    return spec.omega_eff * _sech(spec.rate * (np.asarray(t, dtype=float) - spec.t_center))


def balanced_drives(omega_eff: float, sigma: float, delta: float,
                    t_gate: float = cv.DEFAULT_T_GATE_PS, t_center: float | None = None):
    """Two equal sech drives with the CPT relative phase; Omega_0^2 + Omega_1^2 = omega_eff^2."""
    tc = t_gate / 2 if t_center is None else t_center
    amp = omega_eff / math.sqrt(2)
    d0 = PulseSpec(amp, sigma, delta, 0.0, tc, t_gate)
    d1 = PulseSpec(amp, sigma, delta, cv.DRIVE_RELATIVE_PHASE, tc, t_gate)
    return d0, d1


def _check_drives(drive0: PulseSpec, drive1: PulseSpec):
    if not math.isclose(drive0.sigma, drive1.sigma, rel_tol=1e-12):
        raise ValueError(f"drive bandwidths differ: {drive0.sigma} vs {drive1.sigma}")
    if not (math.isclose(drive0.t_center, drive1.t_center) and math.isclose(drive0.delta, drive1.delta)):
        raise ValueError("drives must share centre time and detuning")


def _pieces(params: QdmParams, drive0: PulseSpec, drive1: PulseSpec):
    """Static diagonal and unit-envelope coupling matrix, both in meV."""
    _check_drives(drive0, drive1)
    lam = (0.0, 0.0) if params.decouple_unwanted else (params.basis.lambda0, params.basis.lambda1)
    static = np.diag([0.0, 0.0, -drive0.delta, -drive0.delta + params.unwanted_offset]).astype(complex)
    coupling = np.zeros((4, 4), dtype=complex)
    for q, drive, l in ((UP, drive0, lam[0]), (DOWN, drive1, lam[1])):
        c = drive.omega_eff * np.exp(1j * drive.phase)
        coupling[T, q] = c
        coupling[U, q] = l * c
    coupling = coupling + coupling.conj().T
    return static, coupling


def build_lambda_hamiltonian(params: QdmParams, drive0: PulseSpec, drive1: PulseSpec, t: float) -> np.ndarray:
    """Rotating-frame Hamiltonian at time t, in meV.

    The bright-state/target matrix element equals the peak rate times the
    sech envelope, so ``omega_eff == sigma`` is the transitionless pulse.
    """
    static, coupling = _pieces(params, drive0, drive1)
    env = float(_sech(drive0.rate * (t - drive0.t_center)))
    return static + env * coupling


def lambda_hamiltonian(params: QdmParams, drive0: PulseSpec, drive1: PulseSpec) -> TimeDependentHamiltonian:
    """H(t)/hbar in rad/ps, split into static and driven parts."""
    static, coupling = _pieces(params, drive0, drive1)
    rate, tc = drive0.rate, drive0.t_center
    return TimeDependentHamiltonian(
        static / cv.HBAR_MEV_PS,
        [(coupling / cv.HBAR_MEV_PS, lambda t: _sech(rate * (t - tc)))],
    )


def collapse_operators(params: QdmParams) -> list[tuple[np.ndarray, float]]:
    """Radiative decay of |t>, |u> and optional qubit dephasing; rates in 1/ps.

    Branching follows the squared dipole overlaps: |t> decays to |up> with
    weight cos^2(eta) and to |down> with sin^2(eta); |u> the other way round.
    Dephasing uses L = Z_qubit / sqrt2 so coherences decay at the given rate.
    """
    ops = []
    c2, s2 = math.cos(params.eta) ** 2, math.sin(params.eta) ** 2
    gamma = params.gamma * 1e-3
    if gamma > 0:
        for excited, weights in ((T, (c2, s2)), (U, (s2, c2))):
            for ground, w in zip((UP, DOWN), weights):
                op = np.zeros((4, 4), dtype=complex)
                op[ground, excited] = 1.0
                ops.append((op, gamma * w))
    if params.dephasing > 0:
        z = np.diag([1.0, -1.0, 0.0, 0.0]).astype(complex) / math.sqrt(2)
        ops.append((z, params.dephasing * 1e-3))
    return ops


def branching_weights(params: QdmParams) -> dict[str, tuple[float, float]]:
    c2, s2 = math.cos(params.eta) ** 2, math.sin(params.eta) ** 2
    return {"t": (c2, s2), "u": (s2, c2)}


def dark_state() -> np.ndarray:
    return np.array([1.0, -1j]) / math.sqrt(2)


def bright_state() -> np.ndarray:
    return np.array([1.0, 1j]) / math.sqrt(2)


def cpt_basis_transform() -> np.ndarray:
    """4x4 unitary taking (up, down, t, u) amplitudes to (D, B, t, u)."""
    u = np.eye(4, dtype=complex)
    u[:2, :2] = np.vstack([dark_state().conj(), bright_state().conj()])
    return u
