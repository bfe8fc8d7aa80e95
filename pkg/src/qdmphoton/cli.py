"""Batch front end: ``qdm-photon {gate-sweep,protocol,detuning-check,verify}``.

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import math
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import conventions as cv
from .config import ConfigError, RunConfig, load_config, validate
from .gate_synthesis import (
    DiscriminantError,
    RotationRequest,
    modified_detuning,
    sweep_delta,
    sweep_eta,
    two_level_detuning,
)
from .protocol import (
    NoiseModel,
    ProtocolCapError,
    ProtocolConfig,
    measure_spin,
    photonic_certification,
    photonic_fidelity,
    run_protocol,
    simulated_gate_channels,
    dump_state,
    load_state,
)
from .quantum_core import IntegrationError
from .verification import canonical_group, certify, write_certification_csv

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL = 0, 2, 3


class NumericalFailure(RuntimeError):
    pass


def _fmt(x) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(x)
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.17g}"
    return str(x)


def write_csv(path: Path, header: list[str], rows: list[dict]) -> Path:
    with open(path, "w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for r in rows:
            fh.write(",".join(_fmt(r[h]) for h in header) + "\n")
    return path


def _out_dir(cfg: RunConfig) -> Path:
    d = Path(cfg.output.directory)
    d.mkdir(parents=True, exist_ok=True)
    return d


def _base_request(cfg: RunConfig, phi: float) -> RotationRequest:
    ph = cfg.physics
    return RotationRequest(phi, ph.params(), ph.sigma_meV, True, ph.t_gate_ps, tol=ph.tol)


# gate-sweep

GATE_SWEEP_HEADER = ["eta", "error_pi_half", "error_pi", "leakage_pi_half", "leakage_pi",
                     "delta_pi_half_meV", "delta_pi_meV"]


def cmd_gate_sweep(cfg: RunConfig) -> list[Path]:
    sw = cfg.sweep
    grid = np.linspace(sw.eta_start, sw.eta_stop, sw.eta_points)
    half = sweep_eta(math.pi / 2, grid, _base_request(cfg, math.pi / 2), cfg.threads)
    full = sweep_eta(math.pi, grid, _base_request(cfg, math.pi), cfg.threads)
    rows = []
    for a, b in zip(half, full):
        for p in (a, b):
            if p.failure:
                print(f"warning: eta={p.param:.6g}: {p.failure}", file=sys.stderr)
        rows.append({"eta": a.param, "error_pi_half": a.error, "error_pi": b.error,
                     "leakage_pi_half": a.leakage, "leakage_pi": b.leakage,
                     "delta_pi_half_meV": a.delta_meV, "delta_pi_meV": b.delta_meV})
    out = _out_dir(cfg)
    paths = [write_csv(out / "gate_sweep.csv", GATE_SWEEP_HEADER, rows)]
    if all(p.failure for p in half + full):
        raise NumericalFailure("every sweep point failed")
    if cfg.output.figures:
        from .plotting import gate_sweep_figure
        paths.append(gate_sweep_figure(rows, out / "gate_sweep.png"))
    return paths


# protocol

PROTOCOL_HEADER = ["N", "fidelity", "witness_bound", "success_prob"]


def _noise(cfg: RunConfig, cyclicity: float | None = None) -> NoiseModel:
    pr = cfg.protocol
    channels = None
    if pr.gate_source == "simulated":
        ph = cfg.physics
        channels = simulated_gate_channels(ph.params(), ph.sigma_meV, ph.t_gate_ps)
    return NoiseModel(channels, pr.cyclicity if cyclicity is None else cyclicity,
                      pr.photon_loss, pr.spin_dephasing_per_step)


def _run(cfg: RunConfig, n: int, noise: NoiseModel):
    pr = cfg.protocol
    pc = ProtocolConfig(pr.target, pr.encoding, n, noise)
    return run_protocol(pc, pr.cross_amplitude)


def cmd_protocol(cfg: RunConfig) -> list[Path]:
    pr = cfg.protocol
    noise = _noise(cfg)
    rows = []
    state = record = None
    for n in range(1, pr.n_max + 1):
        state, record = _run(cfg, n, noise)
        rows.append({"N": n, "fidelity": photonic_fidelity(state, pr.target),
                     "witness_bound": photonic_certification(state, pr.target).fidelity_lower_bound,
                     "success_prob": state.success_probability})
    out = _out_dir(cfg)
    paths = [write_csv(out / "protocol.csv", PROTOCOL_HEADER, rows)]

    # same run with the comparison cyclicity; success probability only
    cyc = (1.0, pr.compare_cyclicity)
    cols = [f"success_prob_cyclicity_{c:g}" for c in cyc]
    table = []
    for n in range(1, pr.n_max + 1):
        row = {"N": n}
        for c, col in zip(cyc, cols):
            row[col] = _run(cfg, n, replace(noise, cyclicity=c))[0].success_probability
        table.append(row)
    paths.append(write_csv(out / "protocol_cyclicity.csv", ["N"] + cols, table))
    print(f"{'N':>3} " + " ".join(f"{c:>28}" for c in cols))
    for row in table:
        print(f"{row['N']:>3} " + " ".join(f"{row[c]:>28.6f}" for c in cols))

    rng = np.random.default_rng(cfg.seed)
    result = measure_spin(state, pr.target, rng=rng)
    record.outcome, record.correction = result.outcome, result.correction
    log = out / "protocol_record.log"
    log.write_text("\n".join(record.log_lines()) + "\n")
    paths.append(log)
    dumped = out / "protocol_state.csv"
    dump_state(result.photons.corrected(result.correction), dumped)
    paths.append(dumped)
    if cfg.output.figures:
        from .plotting import protocol_figure
        paths.append(protocol_figure(rows, out / "protocol.png"))
    return paths


# detuning-check

DETUNING_HEADER = ["phi", "convention", "u_above_t", "reference", "formula_meV", "argmin_meV", "grid_step_meV",
                   "offset_steps", "argmin_error", "within_one_step", "degenerate", "frozen"]


def _check_row(phi, label, above, ref, formula, sweep, frozen) -> dict:
    ok = [p for p in sweep.points if p.failure is None]
    best = sweep.argmin if ok else None
    step = sweep.step
    argmin = best.param if best else float("nan")
    within = bool(best is not None and not sweep.degenerate and abs(argmin - formula) <= step * (1 + 1e-9))
    return {"phi": phi, "convention": label, "u_above_t": above, "reference": ref, "formula_meV": formula,
            "argmin_meV": argmin, "grid_step_meV": step,
            "offset_steps": (argmin - formula) / step if not sweep.degenerate else float("nan"),
            "argmin_error": best.error if best else float("nan"),
            "within_one_step": within, "degenerate": sweep.degenerate, "frozen": frozen}


def cmd_detuning_check(cfg: RunConfig) -> list[Path]:
    dc, ph = cfg.detuning_check, cfg.physics
    ks = np.arange(-dc.half_points, dc.half_points + 1)
    rows, curves, report = [], {}, []
    for phi in dc.phis:
        try:
            formula = modified_detuning(phi, ph.epsilon_meV, ph.sigma_meV)
        except DiscriminantError as exc:
            report.append(f"phi={phi:.6g}: closed form undefined ({exc})")
            continue
        grid = formula + dc.step_meV * ks
        for above in (False, True):
            for ref in ("target", "unwanted"):
                base = _base_request(cfg, phi)
                base = replace(base, params=base.params.with_(u_above_t=above))
                sweep = sweep_delta(phi, grid, base, ref, cfg.threads)
                frozen = above == cv.FROZEN_U_ABOVE_T and ref == cv.FROZEN_DETUNING_REFERENCE
                label = f"{'u_above' if above else 'u_below'}/{ref}"
                rows.append(_check_row(phi, label, above, ref, formula, sweep, frozen))
                curves[f"phi={phi:.3f} {label}"] = (list(grid), [p.error for p in sweep.points], formula)
        if dc.include_decoupled:
            formula = two_level_detuning(phi, ph.sigma_meV)
            base = _base_request(cfg, phi)
            base = replace(base, params=base.params.with_(decouple_unwanted=True))
            sweep = sweep_delta(phi, formula + dc.step_meV * ks, base, "target", cfg.threads)
            rows.append(_check_row(phi, "decoupled", False, "target", formula, sweep, False))

    for r in rows:
        if r["degenerate"]:
            report.append(f"phi={r['phi']:.6g} {r['convention']}: degenerate grid (one point), nothing validated")
    for phi in dc.phis:
        frozen = [r for r in rows if r["phi"] == phi and r["frozen"]]
        if not frozen or frozen[0]["degenerate"]:
            continue
        r = frozen[0]
        matches = [x["convention"] for x in rows if x["phi"] == phi and x["within_one_step"]
                   and x["convention"] != "decoupled"]
        status = "OK" if r["within_one_step"] else "DISCREPANCY"
        report.append(
            f"phi={phi:.6g} frozen {r['convention']}: {status} argmin={r['argmin_meV']:.6f} meV "
            f"formula={r['formula_meV']:.6f} meV offset={r['offset_steps']:+.2f} steps; "
            f"conventions within one step: {', '.join(matches) or 'none'}")
    out = _out_dir(cfg)
    paths = [write_csv(out / "detuning_check.csv", DETUNING_HEADER, rows)]
    text = "\n".join(report) + "\n"
    (out / "detuning_report.txt").write_text(text)
    paths.append(out / "detuning_report.txt")
    sys.stdout.write(text)
    if cfg.output.figures and curves:
        from .plotting import detuning_figure
        paths.append(detuning_figure(curves, out / "detuning_check.png"))
    return paths


# verify

def cmd_verify(cfg: RunConfig, state_path: str | None = None, as_matrix: bool = False) -> list[Path]:
    pr = cfg.protocol
    if state_path is None:
        state, _ = _run(cfg, pr.n_max, _noise(cfg))
        res = measure_spin(state, pr.target, rng=np.random.default_rng(cfg.seed))
        photons = res.photons.corrected(res.correction)
        n = len(photons.dims)
    else:
        flat = load_state(state_path)
        if as_matrix:
            d = math.isqrt(flat.size)
            if d * d != flat.size:
                raise ConfigError(f"--state: {flat.size} entries do not form a square matrix")
            flat = flat.reshape(d, d)
        size = flat.shape[0]
        n = size.bit_length() - 1
        if 2 ** n != size or n < 1:
            raise ConfigError(f"--state: dimension {size} is not a power of two")
        from .quantum_core import DensityMatrix, StateVector
        photons = (DensityMatrix if flat.ndim == 2 else StateVector)(flat, (2,) * n)
    report = certify(photons, canonical_group(pr.target, n))
    out = _out_dir(cfg)
    path = out / "certification.csv"
    write_certification_csv(report, path)
    print(report.summary())
    return [path]


# argument parsing

def _common(parser: argparse.ArgumentParser, suppress: bool):
    d = argparse.SUPPRESS if suppress else None
    parser.add_argument("--config", default=d, help="INI configuration file")
    parser.add_argument("--out", default=d, help="output directory")
    parser.add_argument("--seed", type=int, default=d, help="seed for sampled measurement outcomes")
    parser.add_argument("--threads", type=int, default=d, help="worker processes for sweeps")
    parser.add_argument("--figures", action="store_true", default=argparse.SUPPRESS if suppress else False,
                        help="also write PNG figures next to the CSV files")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qdm-photon", description=__doc__.splitlines()[0])
    _common(p, suppress=False)
    sub = p.add_subparsers(dest="command", required=True)
    for name, help_ in (("gate-sweep", "gate error versus mixing angle"),
                        ("protocol", "photon-generation protocol for N = 1..n_max"),
                        ("detuning-check", "full-dynamics detuning sweep against the closed form")):
        _common(sub.add_parser(name, help=help_), suppress=True)
    v = sub.add_parser("verify", help="stabilizer certification of a protocol output or dumped state")
    _common(v, suppress=True)
    v.add_argument("--state", help="state file with index,re,im lines")
    v.add_argument("--matrix", action="store_true", help="the state file holds a flattened density matrix")
    return p


def _apply_flags(cfg: RunConfig, args) -> RunConfig:
    if args.out is not None:
        cfg = replace(cfg, output=replace(cfg.output, directory=args.out))
    if args.figures:
        cfg = replace(cfg, output=replace(cfg.output, figures=True))
    if args.seed is not None:
        cfg = replace(cfg, seed=args.seed)
    if args.threads is not None:
        cfg = replace(cfg, threads=args.threads)
    return validate(cfg)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _apply_flags(load_config(args.config), args)
        if args.command == "gate-sweep":
            paths = cmd_gate_sweep(cfg)
        elif args.command == "protocol":
            paths = cmd_protocol(cfg)
        elif args.command == "detuning-check":
            paths = cmd_detuning_check(cfg)
        else:
            paths = cmd_verify(cfg, args.state, args.matrix)
    except (ConfigError, ProtocolCapError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalFailure, IntegrationError, DiscriminantError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    for path in paths:
        print(f"wrote {path}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
