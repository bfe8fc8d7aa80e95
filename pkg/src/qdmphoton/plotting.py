"""Optional PNG figures written next to the CSV output (``--figures``)."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def _save(fig, path: Path) -> Path:
    fig.tight_layout()
    fig.savefig(path, dpi=120, metadata={"Software": None})
    plt.close(fig)
    return path


def gate_sweep_figure(rows: list[dict], path: Path) -> Path:
    eta = [r["eta"] for r in rows]
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.semilogy(eta, [r["error_pi_half"] for r in rows], "-", label="R_Y(pi/2)")
    ax.semilogy(eta, [r["error_pi"] for r in rows], "--", label="R_Y(pi)")
    ax.set_xlabel("eta (rad)")
    ax.set_ylabel("gate error")
    ax.legend()
    return _save(fig, path)


def protocol_figure(rows: list[dict], path: Path) -> Path:
    n = [r["N"] for r in rows]
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.plot(n, [r["fidelity"] for r in rows], "o-", label="fidelity")
    ax.plot(n, [r["witness_bound"] for r in rows], "s--", label="witness bound")
    ax.plot(n, [r["success_prob"] for r in rows], "^:", label="success probability")
    ax.set_xlabel("photons N")
    ax.set_ylim(0, 1.02)
    ax.legend()
    return _save(fig, path)


def detuning_figure(curves: dict[str, tuple[list[float], list[float], float]], path: Path) -> Path:
    """``curves`` maps a label to (detunings, errors, closed-form value)."""
    fig, ax = plt.subplots(figsize=(5, 3.5))
    for label, (x, y, formula) in curves.items():
        line, = ax.plot(x, y, label=label)
        ax.axvline(formula, color=line.get_color(), lw=0.8, ls=":")
    ax.set_xlabel("detuning (meV)")
    ax.set_ylabel("gate error")
    ax.set_yscale("log")
    ax.legend(fontsize=7)
    return _save(fig, path)
