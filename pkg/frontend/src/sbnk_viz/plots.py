"""The four plot kinds: contraction, gates, energy, snapshot."""

from __future__ import annotations

import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from sbnk_viz.formats import read_archive, read_cauchy, read_diagnostics


class PlotError(ValueError):
    """Input unsuitable for the requested plot."""


def fit_factorial(n: np.ndarray, delta: np.ndarray) -> tuple[float, float] | None:
    """Fit delta(n) = A * C^n / n! by least squares in log space.

    Returns (A, C), or None when fewer than 2 positive points exist (a flat
    or empty series has nothing to fit).
    """
    mask = delta > 0
    if np.count_nonzero(mask) < 2:
        return None
    ns = n[mask].astype(float)
    ys = np.log(delta[mask]) + np.array([math.lgamma(x + 1.0) for x in ns])
    # linear regression ys = log A + ns * log C
    coef = np.polyfit(ns, ys, 1)
    return math.exp(coef[1]), math.exp(coef[0])


def plot_contraction(cauchy_csv: str | Path, out_png: str | Path) -> tuple[float, float] | None:
    """Log-scale Cauchy-difference series with a fitted factorial-decay overlay."""
    table = read_cauchy(cauchy_csv)
    if len(table.n) < 3:
        raise PlotError(f"{cauchy_csv}: need at least 3 rows to plot contraction")
    totals = table.totals
    fig, ax = plt.subplots(figsize=(6, 4))
    fit = fit_factorial(table.n, totals)
    if np.any(totals > 0):
        ax.set_yscale("log")
        pos = totals > 0
        ax.plot(table.n[pos], totals[pos], "o-", label="measured difference")
        if fit is not None:
            A, C = fit
            ns = np.linspace(table.n[0], table.n[-1], 64)
            curve = A * np.exp(
                ns * math.log(C) - np.array([math.lgamma(x + 1.0) for x in ns])
            )
            ax.plot(ns, curve, "--", label=f"fit A·C^n/n!  (C = {C:.3g})")
    else:
        # all-zero series: flat line, linear scale (log would fail)
        ax.plot(table.n, totals, "o-", label="measured difference (all zero)")
    ax.set_xlabel("iteration n")
    ax.set_ylabel("successive-iterate difference")
    ax.legend()
    fig.tight_layout()
    fig.savefig(out_png, dpi=120)
    plt.close(fig)
    if fit is not None:
        print(f"factorial fit: A = {fit[0]:.6g}, C = {fit[1]:.6g}")
    else:
        print("factorial fit: skipped (no positive differences)")
    return fit


def plot_gates(diag_csv: str | Path, out_png: str | Path) -> None:
    """Measured-vs-gate tracks for every diagnostic family in the CSV."""
    rows = read_diagnostics(diag_csv)
    if not rows:
        raise PlotError(f"{diag_csv}: no diagnostic rows")
    families: dict[str, list] = {}
    for r in rows:
        families.setdefault(r.lemma_id, []).append(r)
    fig, axes = plt.subplots(
        len(families), 1, figsize=(6, 2.2 * len(families)), squeeze=False
    )
    for ax, (name, fam) in zip(axes[:, 0], sorted(families.items())):
        ts = np.array([r.t for r in fam])
        measured = np.array([r.measured for r in fam])
        gates = np.array([r.gate for r in fam])
        if len(fam) > 1:
            ax.plot(ts, measured, "o-", ms=3, label="measured")
            if np.all(np.isfinite(gates)):
                ax.plot(ts, gates, "--", label="gate")
        else:
            ax.axhline(measured[0], color="C0", label="measured")
            if math.isfinite(gates[0]):
                ax.axhline(gates[0], color="C1", ls="--", label="gate")
        ok = all(r.passed for r in fam)
        ax.set_title(f"{name}  [{'pass' if ok else 'FAIL'}]", fontsize=9)
        ax.legend(fontsize=7)
    axes[-1, 0].set_xlabel("t")
    fig.tight_layout()
    fig.savefig(out_png, dpi=120)
    plt.close(fig)


def plot_energy(archive_path: str | Path, out_png: str | Path) -> None:
    """Total (kinetic + fluid) energy over time from a FieldArchive."""
    arc = read_archive(archive_path)
    if arc.count < 1:
        raise PlotError(f"{archive_path}: archive holds no snapshots")
    energy = arc.total_energy()
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(arc.times, energy, "-")
    ax.set_xlabel("t")
    ax.set_ylabel("total energy")
    ax.set_title("energy dissipation")
    fig.tight_layout()
    fig.savefig(out_png, dpi=120)
    plt.close(fig)


def plot_snapshot(archive_path: str | Path, t_index: int, out_png: str | Path) -> None:
    """Field snapshot: kinetic distribution plus fluid fields at one time index."""
    arc = read_archive(archive_path)
    if not (-arc.count <= t_index < arc.count):
        raise PlotError(
            f"{archive_path}: snapshot index {t_index} out of range (count {arc.count})"
        )
    f = arc.f[t_index]
    fig, axes = plt.subplots(1, 3, figsize=(12, 3.5))
    if arc.d == 1:
        im = axes[0].imshow(
            f.T,
            origin="lower",
            aspect="auto",
            extent=(0, arc.Lx, -arc.Vmax, arc.Vmax),
        )
        axes[0].set_xlabel("x")
        axes[0].set_ylabel("v")
        axes[0].set_title("f(x, v)")
        fig.colorbar(im, ax=axes[0])
        axes[1].plot(arc.x_nodes, arc.rho[t_index], label="rho")
        axes[1].plot(arc.x_nodes, arc.p[t_index], label="p")
        axes[1].legend()
        axes[2].plot(arc.x_nodes, arc.u[t_index][0])
        axes[2].set_title("u(x)")
    else:
        # d >= 2: spatial slices/heatmaps of the macroscopic fields
        rho2 = arc.rho[t_index]
        while rho2.ndim > 2:
            rho2 = rho2[..., rho2.shape[-1] // 2]
        im = axes[0].imshow(rho2.T, origin="lower", extent=(0, arc.Lx, 0, arc.Lx))
        axes[0].set_title("rho")
        fig.colorbar(im, ax=axes[0])
        speed = np.sqrt(np.sum(arc.u[t_index] ** 2, axis=0))
        while speed.ndim > 2:
            speed = speed[..., speed.shape[-1] // 2]
        im = axes[1].imshow(speed.T, origin="lower", extent=(0, arc.Lx, 0, arc.Lx))
        axes[1].set_title("|u|")
        fig.colorbar(im, ax=axes[1])
        # velocity marginal of f at the spatial origin
        fv = f[(0,) * arc.d]
        while fv.ndim > 1:
            fv = fv.sum(axis=-1)
        axes[2].plot(arc.v_nodes, fv)
        axes[2].set_title("f(x=0, v1, ·) marginal")
    for ax in axes:
        ax.set_xlabel(ax.get_xlabel() or "")
    fig.suptitle(f"t = {t_index * arc.dt:g}")
    fig.tight_layout()
    fig.savefig(out_png, dpi=120)
    plt.close(fig)
