"""Run configuration: INI file, environment overrides, validation.

Every key can be overridden with ``QDMPHOTON_<SECTION>_<KEY>`` (upper
case), e.g. ``QDMPHOTON_PHYSICS_GAMMA_PER_NS=0``. Numeric values accept
simple expressions in ``pi`` such as ``pi/4`` or ``pi/2 - 0.1``.
"""

from __future__ import annotations

import ast
import configparser
import math
import operator
import os
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from . import conventions as cv
from .qdm_model import QdmParams

__all__ = [
    "ConfigError",
    "ENV_PREFIX",
    "PhysicsConfig",
    "ProtocolSettings",
    "SweepConfig",
    "DetuningCheckConfig",
    "OutputConfig",
    "RunConfig",
    "parse_number",
    "load_config",
    "default_config_text",
]

ENV_PREFIX = "QDMPHOTON_"


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending field."""


_OPS = {
    ast.Add: operator.add,
    ast.Sub: operator.sub,
    ast.Mult: operator.mul,
    ast.Div: operator.truediv,
    ast.Pow: operator.pow,
    ast.USub: operator.neg,
    ast.UAdd: operator.pos,
}


def _eval(node):
    if isinstance(node, ast.Expression):
        return _eval(node.body)
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)) and not isinstance(node.value, bool):
        return float(node.value)
    if isinstance(node, ast.Name) and node.id == "pi":
        return math.pi
    if isinstance(node, ast.BinOp) and type(node.op) in _OPS:
        return _OPS[type(node.op)](_eval(node.left), _eval(node.right))
    if isinstance(node, ast.UnaryOp) and type(node.op) in _OPS:
        return _OPS[type(node.op)](_eval(node.operand))
    raise ValueError("only numbers, pi and + - * / ** are allowed")


def parse_number(text: str) -> float:
    """Evaluate a literal or a small arithmetic expression in ``pi``."""
    try:
        value = _eval(ast.parse(text.strip(), mode="eval"))
    except (SyntaxError, ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"cannot parse {text!r}: {exc}") from None
    if not math.isfinite(value):
        raise ValueError(f"{text!r} is not finite")
    return value


@dataclass(frozen=True)
class PhysicsConfig:
    eta: float = cv.DEFAULT_ETA
    epsilon_meV: float = cv.DEFAULT_EPSILON_MEV
    sigma_meV: float = cv.DEFAULT_SIGMA_MEV
    gamma_per_ns: float = cv.DEFAULT_GAMMA_PER_NS
    dephasing_per_ns: float = 0.0
    t_gate_ps: float = cv.DEFAULT_T_GATE_PS
    u_above_t: bool = cv.FROZEN_U_ABOVE_T
    tol: float = 1e-9

    def params(self) -> QdmParams:
        return QdmParams(self.eta, self.epsilon_meV, self.gamma_per_ns, self.dephasing_per_ns, self.u_above_t)


@dataclass(frozen=True)
class ProtocolSettings:
    target: str = "linear_cluster"
    encoding: str = "time_bin"
    n_max: int = 6
    gate_source: str = "ideal"
    cyclicity: float = 1.0
    photon_loss: float = 0.0
    spin_dephasing_per_step: float = 0.0
    cross_amplitude: float = 0.0
    compare_cyclicity: float = 0.94


@dataclass(frozen=True)
class SweepConfig:
    eta_start: float = 0.1
    eta_stop: float = math.pi / 2 - 0.1
    eta_points: int = 21


@dataclass(frozen=True)
class DetuningCheckConfig:
    phis: tuple[float, ...] = (math.pi / 2, math.pi)
    step_meV: float = 0.001
    half_points: int = 20
    include_decoupled: bool = True


@dataclass(frozen=True)
class OutputConfig:
    directory: str = "results"
    figures: bool = False


@dataclass(frozen=True)
class RunConfig:
    physics: PhysicsConfig = field(default_factory=PhysicsConfig)
    protocol: ProtocolSettings = field(default_factory=ProtocolSettings)
    sweep: SweepConfig = field(default_factory=SweepConfig)
    detuning_check: DetuningCheckConfig = field(default_factory=DetuningCheckConfig)
    output: OutputConfig = field(default_factory=OutputConfig)
    seed: int = 0
    threads: int = 1


# section -> key -> (attribute, kind)
_SCHEMA = {
    "physics": {
        "eta": ("eta", "number"),
        "epsilon_mev": ("epsilon_meV", "number"),
        "sigma_mev": ("sigma_meV", "number"),
        "gamma_per_ns": ("gamma_per_ns", "number"),
        "dephasing_per_ns": ("dephasing_per_ns", "number"),
        "t_gate_ps": ("t_gate_ps", "number"),
        "u_above_t": ("u_above_t", "bool"),
        "tol": ("tol", "number"),
    },
    "protocol": {
        "target": ("target", "str"),
        "encoding": ("encoding", "str"),
        "n_max": ("n_max", "int"),
        "gate_source": ("gate_source", "str"),
        "cyclicity": ("cyclicity", "number"),
        "photon_loss": ("photon_loss", "number"),
        "spin_dephasing_per_step": ("spin_dephasing_per_step", "number"),
        "cross_amplitude": ("cross_amplitude", "number"),
        "compare_cyclicity": ("compare_cyclicity", "number"),
    },
    "sweep": {
        "eta_start": ("eta_start", "number"),
        "eta_stop": ("eta_stop", "number"),
        "eta_points": ("eta_points", "int"),
    },
    "detuning_check": {
        "phis": ("phis", "numbers"),
        "step_mev": ("step_meV", "number"),
        "half_points": ("half_points", "int"),
        "include_decoupled": ("include_decoupled", "bool"),
    },
    "output": {
        "directory": ("directory", "str"),
        "figures": ("figures", "bool"),
    },
    "run": {
        "seed": ("seed", "int"),
        "threads": ("threads", "int"),
    },
}

_BOOLS = {"1": True, "true": True, "yes": True, "on": True,
          "0": False, "false": False, "no": False, "off": False}


def _convert(section: str, key: str, kind: str, raw: str):
    name = f"[{section}] {key}"
    try:
        if kind == "number":
            return parse_number(raw)
        if kind == "numbers":
            vals = tuple(parse_number(x) for x in raw.split(",") if x.strip())
            if not vals:
                raise ValueError("empty list")
            return vals
        if kind == "int":
            v = parse_number(raw)
            if v != int(v):
                raise ValueError("not an integer")
            return int(v)
        if kind == "bool":
            return _BOOLS[raw.strip().lower()]
        return raw.strip()
    except (ValueError, KeyError) as exc:
        raise ConfigError(f"{name}: invalid value {raw!r} ({exc})") from None


def default_config_text() -> str:
    return resources.files("qdmphoton").joinpath("data/default.ini").read_text()


def _gather(path: str | os.PathLike | None, env: dict) -> dict[str, dict[str, str]]:
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    parser.read_string(default_config_text())
    if path is not None:
        p = Path(path)
        if not p.is_file():
            raise ConfigError(f"config file not found: {p}")
        try:
            parser.read_string(p.read_text(), source=str(p))
        except configparser.Error as exc:
            raise ConfigError(f"cannot parse {p}: {exc}") from None
    raw: dict[str, dict[str, str]] = {}
    for section in parser.sections():
        if section not in _SCHEMA:
            raise ConfigError(f"unknown section [{section}]")
        for key, value in parser.items(section):
            if key not in _SCHEMA[section]:
                raise ConfigError(f"[{section}] {key}: unknown key")
            raw.setdefault(section, {})[key] = value
    for var, value in env.items():
        if not var.startswith(ENV_PREFIX):
            continue
        rest = var[len(ENV_PREFIX):].lower()
        for section in _SCHEMA:
            if rest.startswith(section + "_") and rest[len(section) + 1:] in _SCHEMA[section]:
                raw.setdefault(section, {})[rest[len(section) + 1:]] = value
                break
        else:
            raise ConfigError(f"environment variable {var} does not name a config key")
    return raw


def _build(raw: dict[str, dict[str, str]]) -> RunConfig:
    values: dict[str, dict] = {}
    for section, items in raw.items():
        for key, text in items.items():
            attr, kind = _SCHEMA[section][key]
            values.setdefault(section, {})[attr] = _convert(section, key, kind, text)
    run = values.pop("run", {})
    return RunConfig(
        physics=PhysicsConfig(**values.get("physics", {})),
        protocol=ProtocolSettings(**values.get("protocol", {})),
        sweep=SweepConfig(**values.get("sweep", {})),
        detuning_check=DetuningCheckConfig(**values.get("detuning_check", {})),
        output=OutputConfig(**values.get("output", {})),
        **run,
    )


def _require(ok: bool, field_name: str, message: str):
    if not ok:
        raise ConfigError(f"{field_name}: {message}")


def validate(cfg: RunConfig) -> RunConfig:
    ph, pr, sw, dc = cfg.physics, cfg.protocol, cfg.sweep, cfg.detuning_check
    _require(0 < ph.eta < math.pi / 2, "[physics] eta", f"must lie in (0, pi/2), got {ph.eta}")
    _require(ph.epsilon_meV > 0, "[physics] epsilon_meV", f"must be positive, got {ph.epsilon_meV}")
    _require(ph.sigma_meV > 0, "[physics] sigma_meV", f"must be positive, got {ph.sigma_meV}")
    _require(ph.gamma_per_ns >= 0, "[physics] gamma_per_ns", f"must be non-negative, got {ph.gamma_per_ns}")
    _require(ph.dephasing_per_ns >= 0, "[physics] dephasing_per_ns",
             f"must be non-negative, got {ph.dephasing_per_ns}")
    _require(ph.t_gate_ps > 0, "[physics] t_gate_ps", f"must be positive, got {ph.t_gate_ps}")
    _require(0 < ph.tol < 1e-3, "[physics] tol", f"must lie in (0, 1e-3), got {ph.tol}")
    _require(pr.target in ("ghz", "linear_cluster"), "[protocol] target",
             f"must be ghz or linear_cluster, got {pr.target!r}")
    _require(pr.encoding in ("time_bin", "polarization_energy"), "[protocol] encoding",
             f"must be time_bin or polarization_energy, got {pr.encoding!r}")
    _require(pr.n_max >= 1, "[protocol] n_max", f"must be >= 1, got {pr.n_max}")
    _require(pr.gate_source in ("ideal", "simulated"), "[protocol] gate_source",
             f"must be ideal or simulated, got {pr.gate_source!r}")
    for name in ("cyclicity", "photon_loss", "spin_dephasing_per_step", "cross_amplitude", "compare_cyclicity"):
        v = getattr(pr, name)
        _require(0 <= v <= 1, f"[protocol] {name}", f"must lie in [0, 1], got {v}")
    _require(sw.eta_points >= 1, "[sweep] eta_points", f"must be >= 1, got {sw.eta_points}")
    for name in ("eta_start", "eta_stop"):
        v = getattr(sw, name)
        _require(0 < v < math.pi / 2, f"[sweep] {name}", f"must lie in (0, pi/2), got {v}")
    _require(sw.eta_start <= sw.eta_stop, "[sweep] eta_start", "must not exceed eta_stop")
    for phi in dc.phis:
        _require(0 < phi < 2 * math.pi, "[detuning_check] phis", f"each angle must lie in (0, 2pi), got {phi}")
    _require(dc.step_meV > 0, "[detuning_check] step_meV", f"must be positive, got {dc.step_meV}")
    _require(dc.half_points >= 0, "[detuning_check] half_points", f"must be >= 0, got {dc.half_points}")
    _require(cfg.threads >= 1, "[run] threads", f"must be >= 1, got {cfg.threads}")
    _require(cfg.seed >= 0, "[run] seed", f"must be >= 0, got {cfg.seed}")
    return cfg


def load_config(path: str | os.PathLike | None = None, env: dict | None = None) -> RunConfig:
    """Defaults, then the file at ``path``, then environment overrides; validated."""
    env = dict(os.environ) if env is None else env
    return validate(_build(_gather(path, env)))
