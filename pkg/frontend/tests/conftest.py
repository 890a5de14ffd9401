"""Helpers: build format-conforming files by hand for the reader tests."""

from __future__ import annotations

import math
import struct

import numpy as np

HEADER_FMT = "<4sHH3I3IdddI4x"


def archive_bytes(
    d: int,
    nx: int,
    nv: int,
    Lx: float,
    Vmax: float,
    dt: float,
    snapshots: list[tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]],
) -> bytes:
    """Assemble FieldArchive bytes from (f, rho, u, p) snapshot tuples."""
    nx3 = [nx if j < d else 0 for j in range(3)]
    nv3 = [nv if j < d else 0 for j in range(3)]
    out = [
        struct.pack(HEADER_FMT, b"SBNK", 1, d, *nx3, *nv3, Lx, Vmax, dt, len(snapshots))
    ]
    for f, rho, u, p in snapshots:
        for arr in (f, rho, u, p):
            out.append(np.ascontiguousarray(arr, dtype="<f8").tobytes())
    return b"".join(out)


def maxwellian_snapshot(nx: int, nv: int, Vmax: float, rho0=1.0, T0=1.0):
    """Simple d=1 snapshot: homogeneous Maxwellian f, uniform fluid fields."""
    v = np.linspace(-Vmax, Vmax, nv)
    prof = rho0 * np.exp(-(v**2) / (2 * T0)) / math.sqrt(2 * math.pi * T0)
    f = np.broadcast_to(prof, (nx, nv)).copy()
    rho = np.full(nx, 2.0)
    u = np.full((1, nx), 0.25)
    p = np.zeros(nx)
    return f, rho, u, p


def cauchy_csv_text(ns, deltas) -> str:
    lines = ["n,delta_f_q,delta_rho_h2,delta_u_h1,l2h1_grad_u,ratio"]
    prev = None
    for n, dl in zip(ns, deltas):
        ratio = float("nan") if prev is None else (dl / prev if prev > 0 else 0.0)
        lines.append(f"{n},{dl:.17g},0,0,0,{ratio:.17g}")
        prev = dl
    return "\n".join(lines) + "\n"
