"""Pump/rotate photon-generation protocol on a growing spin (x) photons state.

Time-bin mode keeps one two-level subsystem per round. While a round is
open (after its early-bin pump) the last subsystem is the occupation of
the early bin; the late-bin pump then projects that round onto the two
legal patterns |0_m 1_{m+1}> and |1_m 0_{m+1}> and the subsystem becomes
the dual-rail pair. The spin is always subsystem 0. Weight that leaves
the retained state (cyclicity failures, lost photons, illegal bin
patterns) is carried as classical flags.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Mapping

import numpy as np

from . import conventions as cv
from .gate_synthesis import QubitChannel, RotationRequest, ideal_rotation, simulate_gate
from .qdm_model import QdmParams
from .quantum_core import DensityMatrix, StateVector, apply_local
from .verification import (
    PAULI,
    PauliString,
    canonical_group,
    certify,
    expectation,
    fidelity_to_canonical,
    pauli_fix,
)

__all__ = [
    "ProtocolCapError",
    "NoiseModel",
    "ProtocolConfig",
    "PendingBin",
    "TimeBinPair",
    "LogicalPhoton",
    "PolarizationPhoton",
    "HybridState",
    "ProtocolRecord",
    "MeasurementResult",
    "initialize",
    "pump_time_bin",
    "apply_spin_rotation",
    "run_protocol",
    "replay",
    "encode_time_bins",
    "to_bin_occupation",
    "measure_spin",
    "readout_basis",
    "correction_for",
    "feed_forward_branches",
    "photonic_fidelity",
    "photonic_certification",
    "run_lr_polarization",
    "lr_canonical_view",
    "simulated_gate_channels",
    "dump_state",
    "load_state",
]

MAX_QUBITS_VECTOR = 16
MAX_QUBITS_DENSITY = 10
HALF_PI = math.pi / 2


class ProtocolCapError(ValueError):
    pass


@dataclass(frozen=True)
class NoiseModel:
    """``gate_channels`` maps rotation angle to a simulated channel; missing
    angles (or ``None``) use the ideal rotation."""

    gate_channels: Mapping[float, QubitChannel] | None = None
    cyclicity: float = 1.0
    photon_loss: float = 0.0
    spin_dephasing_per_step: float = 0.0

    def __post_init__(self):
        for name in ("cyclicity", "photon_loss", "spin_dephasing_per_step"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {v}")

    @property
    def is_ideal(self) -> bool:
        return (not self.gate_channels and self.cyclicity == 1.0 and self.photon_loss == 0.0
                and self.spin_dephasing_per_step == 0.0)

    @property
    def needs_density(self) -> bool:
        multi = any(len(ch.kraus_ops) > 1 for ch in (self.gate_channels or {}).values())
        return multi or self.spin_dephasing_per_step > 0

    def channel(self, phi: float) -> QubitChannel | None:
        for angle, ch in (self.gate_channels or {}).items():
            if math.isclose(angle, phi, abs_tol=1e-9):
                return ch
        return None


@dataclass(frozen=True)
class ProtocolConfig:
    target: str = "ghz"
    encoding: str = "time_bin"
    n_photons: int = 1
    noise: NoiseModel = field(default_factory=NoiseModel)
    representation: str = "auto"

    def __post_init__(self):
        if self.target not in ("ghz", "linear_cluster"):
            raise ValueError(f"target must be 'ghz' or 'linear_cluster', got {self.target!r}")
        if self.encoding not in ("time_bin", "polarization_energy"):
            raise ValueError(f"encoding must be 'time_bin' or 'polarization_energy', got {self.encoding!r}")
        if self.n_photons < 1:
            raise ValueError(f"n_photons must be >= 1, got {self.n_photons}")
        if self.representation not in ("auto", "vector", "density"):
            raise ValueError(f"unknown representation {self.representation!r}")

    @property
    def use_density(self) -> bool:
        if self.representation == "auto":
            return self.noise.needs_density
        return self.representation == "density"

    def check_cap(self) -> None:
        # one transient subsystem beyond spin + photons while a round is open
        if self.use_density and self.n_photons > MAX_QUBITS_DENSITY:
            raise ProtocolCapError(
                f"n_photons={self.n_photons} exceeds the density-matrix cap of {MAX_QUBITS_DENSITY}")
        if self.n_photons > MAX_QUBITS_VECTOR:
            raise ProtocolCapError(
                f"n_photons={self.n_photons} exceeds the state-vector cap of {MAX_QUBITS_VECTOR}")


@dataclass(frozen=True)
class PendingBin:
    round: int

    @property
    def bin(self) -> int:
        return 2 * self.round - 1


@dataclass(frozen=True)
class TimeBinPair:
    round: int

    @property
    def bins(self) -> tuple[int, int]:
        return (2 * self.round - 1, 2 * self.round)


@dataclass(frozen=True)
class LogicalPhoton:
    round: int
    bins: tuple[int, int]


@dataclass(frozen=True)
class PolarizationPhoton:
    index: int

    @property
    def basis_labels(self) -> tuple[tuple[str, str], tuple[str, str]]:
        return (cv.LR_PHOTON_LABELS[cv.SPIN_UP], cv.LR_PHOTON_LABELS[cv.SPIN_DOWN])


@dataclass(frozen=True)
class HybridState:
    """Spin (x) photonic qubits; ``data`` is a ket (1-D) or density matrix (2-D)."""

    data: np.ndarray
    labels: tuple = ()
    encoding: str = "time_bin"
    failure_weight: float = 0.0
    loss_weight: float = 0.0
    illegal_weight: float = 0.0

    def __post_init__(self):
        d = np.array(self.data, dtype=complex, copy=True)
        d.setflags(write=False)
        object.__setattr__(self, "data", d)
        object.__setattr__(self, "labels", tuple(self.labels))
        n = 2 ** (1 + len(self.labels))
        if d.shape not in ((n,), (n, n)):
            raise ValueError(f"data shape {d.shape} does not match {1 + len(self.labels)} qubits")

    @property
    def dims(self) -> tuple[int, ...]:
        return (2,) * (1 + len(self.labels))

    @property
    def dim(self) -> int:
        return 2 ** (1 + len(self.labels))

    @property
    def is_density(self) -> bool:
        return self.data.ndim == 2

    @property
    def n_photons(self) -> int:
        return len(self.labels)

    @property
    def has_open_round(self) -> bool:
        return bool(self.labels) and isinstance(self.labels[-1], PendingBin)

    @property
    def retained_weight(self) -> float:
        if self.is_density:
            return float(np.trace(self.data).real)
        return float(np.vdot(self.data, self.data).real)

    @property
    def success_probability(self) -> float:
        """Probability that no emission failed and no photon was lost."""
        return 1.0 - self.failure_weight - self.loss_weight

    def to_density(self) -> "HybridState":
        if self.is_density:
            return self
        return replace(self, data=np.outer(self.data, self.data.conj()))

    def as_quantum(self):
        if self.is_density:
            return DensityMatrix(self.data, self.dims)
        return StateVector(self.data, self.dims)

    def spin_weight(self, s: int) -> float:
        if self.is_density:
            t = self.data.reshape(2, self.dim // 2, 2, self.dim // 2)
            return float(np.trace(t[s, :, s, :]).real)
        t = self.data.reshape(2, -1)
        return float(np.vdot(t[s], t[s]).real)


@dataclass
class ProtocolRecord:
    steps: list = field(default_factory=list)
    outcome: str | None = None
    correction: PauliString | None = None

    def log_lines(self) -> list[str]:
        lines = [f"{i:03d} " + " ".join(str(x) for x in step) for i, step in enumerate(self.steps)]
        if self.outcome is not None:
            lines.append(f"measure spin outcome={self.outcome} correction={self.correction}")
        return lines


def _dephase(state: HybridState, p: float) -> HybridState:
    if p <= 0:
        return state
    rho = state.to_density().data
    flipped = apply_local(rho, PAULI["Z"], 0, state.dims)
    return replace(state, data=(1 - p) * rho + p * flipped)


def _fresh_spin(config: ProtocolConfig) -> HybridState:
    v = np.array([1.0, 0.0], dtype=complex)
    data = np.outer(v, v) if config.use_density else v
    return HybridState(data, (), config.encoding)


def apply_spin_rotation(state: HybridState, phi: float, noise: NoiseModel = NoiseModel()) -> HybridState:
    if phi == 0:
        return state
    ch = noise.channel(phi)
    if ch is None:
        data = apply_local(state.data, ideal_rotation(phi), 0, state.dims)
    elif len(ch.kraus_ops) == 1 and not state.is_density:
        data = apply_local(state.data, ch.kraus_ops[0], 0, state.dims)
    else:
        rho = state.to_density().data
        data = sum(apply_local(rho, k, 0, state.dims) for k in ch.kraus_ops)
    return _dephase(replace(state, data=data), noise.spin_dephasing_per_step)


def initialize(config: ProtocolConfig) -> HybridState:
    """|up> followed by the pi/2 rotation (ideal or the configured channel)."""
    return apply_spin_rotation(_fresh_spin(config), HALF_PI, config.noise)


def _append_emission(state: HybridState, photon: np.ndarray, label) -> HybridState:
    """Append a subsystem whose state is photon[s] when the spin is s.

    ``photon`` is (2 spin values, 2 photon levels); rows may be
    sub-normalized to represent discarded branches.
    """
    n = state.dim // 2
    if state.is_density:
        r = state.data.reshape(2, n, 2, n)
        out = np.einsum("arbs,ap,bq->arpbsq", r, photon, photon.conj())
        data = out.reshape(2 * state.dim, 2 * state.dim)
    else:
        out = np.einsum("ar,ap->arp", state.data.reshape(2, n), photon)
        data = out.reshape(-1)
    return replace(state, data=data, labels=state.labels + (label,))


def _emission_factor(noise: NoiseModel) -> float:
    return noise.cyclicity * (1.0 - noise.photon_loss)


def _book_emission(state: HybridState, emitting_weight: float, noise: NoiseModel) -> HybridState:
    return replace(
        state,
        failure_weight=state.failure_weight + (1 - noise.cyclicity) * emitting_weight,
        loss_weight=state.loss_weight + noise.cyclicity * noise.photon_loss * emitting_weight,
    )


def pump_time_bin(state: HybridState, round: int, bin: str = "early",
                  noise: NoiseModel = NoiseModel()) -> HybridState:
    """Drive the sigma+ cycling transition once (early or late bin of ``round``)."""
    if state.encoding != "time_bin":
        raise ValueError("pump_time_bin needs a time-bin state")
    em = cv.TIME_BIN_EMITTER
    amp = math.sqrt(_emission_factor(noise))
    w_emit = state.spin_weight(em)
    if bin == "early":
        if state.has_open_round:
            raise ValueError("previous round is still open")
        photon = np.zeros((2, 2), dtype=complex)
        photon[1 - em, 0] = 1.0
        photon[em, 1] = amp
        out = _append_emission(state, photon, PendingBin(round))
    elif bin == "late":
        if not state.has_open_round or state.labels[-1].round != round:
            raise ValueError(f"round {round} has no open early bin")
        # emitting branch gains a late photon; legal iff early and late differ
        dims = state.dims
        op = np.zeros((4, 4), dtype=complex)
        op[em * 2 + 0, em * 2 + 0] = amp
        op[(1 - em) * 2 + 1, (1 - em) * 2 + 1] = 1.0
        before = state.retained_weight
        data = _apply_two(state.data, op, 0, len(dims) - 1, dims)
        out = replace(state, data=data, labels=state.labels[:-1] + (TimeBinPair(round),))
        kept_if_ideal = before - (1 - amp ** 2) * w_emit
        out = replace(out, illegal_weight=state.illegal_weight + max(kept_if_ideal - out.retained_weight, 0.0))
    else:
        raise ValueError(f"bin must be 'early' or 'late', got {bin!r}")
    out = _book_emission(out, w_emit, noise)
    return _dephase(out, noise.spin_dephasing_per_step)


def _apply_two(data: np.ndarray, op: np.ndarray, a: int, b: int, dims: tuple[int, ...]) -> np.ndarray:
    """Apply a 4x4 operator on subsystems (a, b) of a ket or density matrix."""
    n = len(dims)
    op4 = op.reshape(2, 2, 2, 2)
    if data.ndim == 1:
        t = data.reshape(dims)
        t = np.tensordot(op4, t, axes=([2, 3], [a, b]))
        t = np.moveaxis(t, [0, 1], [a, b])
        return t.reshape(-1)
    t = data.reshape(dims + dims)
    t = np.tensordot(op4, t, axes=([2, 3], [a, b]))
    t = np.moveaxis(t, [0, 1], [a, b])
    t = np.tensordot(op4.conj(), t, axes=([2, 3], [n + a, n + b]))
    t = np.moveaxis(t, [0, 1], [n + a, n + b])
    return t.reshape(data.shape)


def _steps(config: ProtocolConfig) -> list[tuple]:
    steps: list[tuple] = [("rotate", HALF_PI, "step0")]
    if config.encoding == "polarization_energy":
        for k in range(1, config.n_photons + 1):
            steps.append(("emit", k))
            if config.target == "linear_cluster":
                steps.append(("rotate", HALF_PI, f"hadamard-like {k}"))
        return steps
    last = config.n_photons
    for r in range(1, last + 1):
        steps.append(("pump", r, "early"))
        steps.append(("rotate", math.pi, f"step2 round {r}"))
        steps.append(("pump", r, "late"))
        if config.target == "ghz":
            steps.append(("rotate", math.pi, f"step4 round {r}"))
        elif r < last:
            steps.append(("rotate", HALF_PI, f"step4 round {r}"))
    return steps


def _execute(state: HybridState, step: tuple, config: ProtocolConfig, cross: float = 0.0) -> HybridState:
    kind = step[0]
    if kind == "rotate":
        return apply_spin_rotation(state, step[1], config.noise)
    if kind == "pump":
        return pump_time_bin(state, step[1], step[2], config.noise)
    if kind == "emit":
        return _emit_polarization(state, step[1], cross, config.noise)
    raise ValueError(f"unknown step {step!r}")


def run_protocol(config: ProtocolConfig, cross_amplitude: float = 0.0) -> tuple[HybridState, ProtocolRecord]:
    """Run every step up to (not including) the spin measurement."""
    config.check_cap()
    record = ProtocolRecord()
    state = _fresh_spin(config)
    for step in _steps(config):
        state = _execute(state, step, config, cross_amplitude)
        record.steps.append(step)
    return state, record


def replay(record: ProtocolRecord, config: ProtocolConfig, upto: int | None = None,
           cross_amplitude: float = 0.0) -> HybridState:
    state = _fresh_spin(config)
    for step in record.steps[:upto]:
        state = _execute(state, step, config, cross_amplitude)
    return state


def encode_time_bins(state: HybridState) -> HybridState:
    """Relabel each dual-rail pair as a logical photonic qubit.

    Pairs were already projected onto the legal patterns when their late bin
    was pumped; the discarded weight stays in ``illegal_weight``.
    """
    if state.encoding != "time_bin":
        raise ValueError("encode_time_bins needs a time-bin state")
    if state.has_open_round:
        raise ValueError("cannot encode while a round is open (early bin pumped, late bin not yet)")
    labels = tuple(LogicalPhoton(p.round, p.bins) if isinstance(p, TimeBinPair) else p for p in state.labels)
    return replace(state, labels=labels)


def to_bin_occupation(state: HybridState) -> StateVector:
    """Expand to explicit bin occupations: spin, then bins 1, 2, 3, ... (ket only)."""
    if state.is_density:
        raise ValueError("bin expansion is provided for kets")
    pair = np.zeros((4, 2), dtype=complex)
    pair[0b01, cv.PAIR_LATE_OCCUPIED] = 1.0
    pair[0b10, cv.PAIR_EARLY_OCCUPIED] = 1.0
    t = state.data.reshape(state.dims)
    new_dims = [2]
    axis = 1
    for lab in state.labels:
        if isinstance(lab, (TimeBinPair, LogicalPhoton)):
            t = np.moveaxis(np.tensordot(pair, t, axes=([1], [axis])), 0, axis)
            shape = t.shape[:axis] + (2, 2) + t.shape[axis + 1:]
            t = t.reshape(shape)
            new_dims += [2, 2]
            axis += 2
        else:
            new_dims.append(2)
            axis += 1
    return StateVector(t.reshape(-1), tuple(new_dims))


@dataclass(frozen=True)
class MeasurementResult:
    photons: HybridState
    outcome: str
    correction: PauliString
    probability: float


def readout_basis(encoding: str, target: str) -> str:
    """Spin readout basis: |+-> except for LR-like cluster generation.

    In that mode the spin already closes the chain after its final R_Y(pi/2),
    so a Z readout ("+" = up, "-" = down) detaches it and leaves the photons
    in a cluster state up to a Pauli frame.
    """
    return "z" if (encoding == "polarization_energy" and target == "linear_cluster") else "x"


def _project_spin(state: HybridState, outcome: str, basis: str = "x") -> tuple[np.ndarray, float]:
    if basis == "z":
        bra = np.array([1.0, 0.0]) if outcome == "+" else np.array([0.0, 1.0])
    else:
        sgn = 1.0 if outcome == "+" else -1.0
        bra = np.array([1.0, sgn]) / math.sqrt(2)
    n = state.dim // 2
    if state.is_density:
        r = state.data.reshape(2, n, 2, n)
        out = np.einsum("a,arbs,b->rs", bra, r, bra)
        w = float(np.trace(out).real)
    else:
        out = bra @ state.data.reshape(2, n)
        w = float(np.vdot(out, out).real)
    return out, w


def _photon_part(state: HybridState) -> HybridState:
    if state.encoding == "time_bin":
        return encode_time_bins(state)
    return state


def measure_spin(state: HybridState, target: str, forced_outcome: str | None = None,
                 rng: np.random.Generator | None = None) -> MeasurementResult:
    """Measure the spin (see :func:`readout_basis`) and return the corrected-frame photonic state."""
    state = _photon_part(state)
    total = state.retained_weight
    basis = readout_basis(state.encoding, target)
    parts = {o: _project_spin(state, o, basis) for o in ("+", "-")}
    probs = {o: parts[o][1] / total for o in parts}
    if forced_outcome is not None:
        if forced_outcome not in probs:
            raise ValueError(f"outcome must be '+' or '-', got {forced_outcome!r}")
        if probs[forced_outcome] <= 1e-15:
            raise ValueError(f"outcome {forced_outcome!r} has zero probability")
        outcome = forced_outcome
    else:
        rng = rng if rng is not None else np.random.default_rng()
        outcome = "+" if rng.random() < probs["+"] else "-"
    data, w = parts[outcome]
    data = data / (w if data.ndim == 2 else math.sqrt(w))
    photons = _as_photonic(state, data)
    return MeasurementResult(photons, outcome, correction_for(target, state.encoding, state.n_photons, outcome),
                             probs[outcome])


def _as_photonic(state: HybridState, data: np.ndarray) -> HybridState:
    """Wrap a spin-free array: the first photon takes the leading slot."""
    return _PhotonState(data, state.labels)


@dataclass(frozen=True)
class _PhotonState:
    data: np.ndarray
    labels: tuple

    @property
    def dims(self) -> tuple[int, ...]:
        return (2,) * len(self.labels)

    @property
    def is_density(self) -> bool:
        return self.data.ndim == 2

    def as_quantum(self):
        if self.is_density:
            return DensityMatrix(self.data, self.dims)
        return StateVector(self.data, self.dims)

    def corrected(self, p: PauliString) -> "_PhotonState":
        return _PhotonState(p.apply(self.data, self.dims), self.labels)


PhotonicState = _PhotonState  # public alias


@lru_cache(maxsize=None)
def _frames(target: str, encoding: str, n: int) -> dict[str, PauliString]:
    """Pauli fix-ups taking each ideal outcome to the canonical target."""
    state, _ = run_protocol(ProtocolConfig(target, encoding, n))
    state = _photon_part(state)
    group = canonical_group(target, n)
    out = {}
    for o in ("+", "-"):
        data, w = _project_spin(state, o, readout_basis(encoding, target))
        psi = _PhotonState(data / math.sqrt(w), state.labels)
        signs = [int(round(expectation(psi, g))) for g in group]
        if any(s == 0 for s in signs):
            raise RuntimeError(f"ideal {target} run is not a stabilizer state of the canonical group")
        out[o] = pauli_fix(group, signs)
    return out


def correction_for(target: str, encoding: str, n: int, outcome: str) -> PauliString:
    return _frames(target, encoding, n)[outcome]


def feed_forward_branches(state: HybridState, target: str) -> list[tuple[float, _PhotonState]]:
    """Both measurement outcomes, each corrected and normalized, with probabilities."""
    state = _photon_part(state)
    total = state.retained_weight
    out = []
    for o in ("+", "-"):
        data, w = _project_spin(state, o, readout_basis(state.encoding, target))
        if w <= 1e-300:
            continue
        data = data / (w if data.ndim == 2 else math.sqrt(w))
        fix = correction_for(target, state.encoding, state.n_photons, o)
        out.append((w / total, _PhotonState(data, state.labels).corrected(fix)))
    return out


def photonic_fidelity(state: HybridState, target: str) -> float:
    """Fidelity of the feed-forward-corrected photonic state to the canonical target."""
    return float(sum(p * fidelity_to_canonical(ph, target) for p, ph in feed_forward_branches(state, target)))


def photonic_certification(state: HybridState, target: str):
    """Outcome-averaged stabilizer expectations of the corrected photonic state."""
    branches = feed_forward_branches(state, target)
    group = canonical_group(target, state.n_photons)
    reports = [(p, certify(ph, group)) for p, ph in branches]
    exps = tuple(sum(p * r.expectations[i] for p, r in reports) for i in range(len(group)))
    return type(reports[0][1])(group.generators, exps)


def _emit_polarization(state: HybridState, k: int, cross: float, noise: NoiseModel) -> HybridState:
    if state.encoding != "polarization_energy":
        raise ValueError("polarization emission needs a polarization_energy state")
    if not 0.0 <= cross <= 1.0:
        raise ValueError(f"cross_amplitude must lie in [0, 1], got {cross}")
    amp = math.sqrt(_emission_factor(noise))
    wrong = cross / math.sqrt(2)
    right = math.sqrt(1 - wrong ** 2)
    photon = amp * np.array([[right, wrong], [wrong, right]], dtype=complex)
    out = _append_emission(state, photon, PolarizationPhoton(k))
    out = _book_emission(out, state.retained_weight, noise)
    return _dephase(out, noise.spin_dephasing_per_step)


def run_lr_polarization(config: ProtocolConfig, cross_amplitude: float = 0.0) -> HybridState:
    """LR-like sequence: every emission tags the photon's polarization and energy.

    ``cross_amplitude`` in [0, 1] mixes in the wrong-polarization branch
    coherently (amplitude cross/sqrt2); at 1 the photon no longer depends on
    the spin.
    """
    if config.encoding != "polarization_energy":
        raise ValueError("run_lr_polarization needs encoding='polarization_energy'")
    state, _ = run_protocol(config, cross_amplitude)
    return state


@lru_cache(maxsize=None)
def _lr_frame(target: str, n: int) -> PauliString:
    state = run_lr_polarization(ProtocolConfig(target, "polarization_energy", n))
    view = _lr_reorder(state)
    group = canonical_group(target, n + 1)
    signs = [int(round(expectation(view, g))) for g in group]
    return pauli_fix(group, signs)


def _lr_reorder(state: HybridState) -> _PhotonState:
    n = len(state.dims)
    order = list(range(1, n)) + [0]
    dims = state.dims
    if state.is_density:
        t = state.data.reshape(dims + dims).transpose(order + [n + i for i in order])
        data = t.reshape(state.data.shape)
    else:
        data = state.data.reshape(dims).transpose(order).reshape(-1)
    return _PhotonState(data, state.labels + ("spin",))


def lr_canonical_view(state: HybridState, target: str) -> _PhotonState:
    """Photons then spin, in the canonical Pauli frame of the ideal sequence."""
    return _lr_reorder(state).corrected(_lr_frame(target, state.n_photons))


def simulated_gate_channels(params: QdmParams | None = None, sigma: float = cv.DEFAULT_SIGMA_MEV,
                            t_gate: float = cv.DEFAULT_T_GATE_PS) -> dict[float, QubitChannel]:
    params = params or QdmParams()
    out = {}
    for phi in (HALF_PI, math.pi):
        ch, _ = simulate_gate(RotationRequest(phi, params, sigma, True, t_gate))
        out[phi] = ch
    return out


def dump_state(state, path) -> None:
    """Plain-text dump: one ``index,re,im`` line per ket amplitude (row-major for matrices)."""
    data = np.asarray(state.data if hasattr(state, "data") else state.amplitudes).reshape(-1)
    with open(path, "w", newline="") as fh:
        for i, a in enumerate(data):
            fh.write(f"{i},{a.real:.17g},{a.imag:.17g}\n")


def load_state(path) -> np.ndarray:
    rows = np.loadtxt(path, delimiter=",", ndmin=2)
    out = np.zeros(int(rows[:, 0].max()) + 1, dtype=complex)
    out[rows[:, 0].astype(int)] = rows[:, 1] + 1j * rows[:, 2]
    return out
