"""Independent readers for the solver's external file formats.

Implements the documented formats directly (no import of the solver package):

- ``cauchy.csv``: header ``n,delta_f_q,delta_rho_h2,delta_u_h1,l2h1_grad_u,ratio``
- ``diagnostics.csv``: header ``lemma_id,t,measured,gate,pass``
- FieldArchive: 64-byte little-endian header (magic ``SBNK``, version 1,
  dimension, grid counts, Lx, Vmax, dt, snapshot count) followed by per-
  snapshot contiguous float64 arrays f, rho, u (d components), p in C order.
"""

from __future__ import annotations

import csv
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

MAGIC = b"SBNK"
VERSION = 1
HEADER_SIZE = 64
_HEADER_FMT = "<4sHH3I3IdddI4x"

CAUCHY_HEADER = ["n", "delta_f_q", "delta_rho_h2", "delta_u_h1", "l2h1_grad_u", "ratio"]
DIAG_HEADER = ["lemma_id", "t", "measured", "gate", "pass"]


class FormatError(ValueError):
    """Input file does not match its documented format."""


@dataclass
class CauchyTable:
    n: np.ndarray
    delta_f_q: np.ndarray
    delta_rho_h2: np.ndarray
    delta_u_h1: np.ndarray
    l2h1_grad_u: np.ndarray
    ratio: np.ndarray

    @property
    def totals(self) -> np.ndarray:
        return self.delta_f_q + self.delta_rho_h2 + self.delta_u_h1


def read_cauchy(path: str | Path) -> CauchyTable:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0] != CAUCHY_HEADER:
        raise FormatError(f"{path}: expected cauchy.csv header {','.join(CAUCHY_HEADER)}")
    body = rows[1:]
    try:
        cols = np.array([[float(x) for x in r] for r in body], dtype=float)
    except ValueError as exc:
        raise FormatError(f"{path}: non-numeric value in cauchy.csv") from exc
    if body and cols.shape[1] != 6:
        raise FormatError(f"{path}: expected 6 columns, got {cols.shape[1]}")
    if not body:
        cols = np.empty((0, 6))
    return CauchyTable(
        n=cols[:, 0].astype(int),
        delta_f_q=cols[:, 1],
        delta_rho_h2=cols[:, 2],
        delta_u_h1=cols[:, 3],
        l2h1_grad_u=cols[:, 4],
        ratio=cols[:, 5],
    )


@dataclass
class DiagnosticRow:
    lemma_id: str
    t: float
    measured: float
    gate: float
    passed: bool


def read_diagnostics(path: str | Path) -> list[DiagnosticRow]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0] != DIAG_HEADER:
        raise FormatError(f"{path}: expected diagnostics.csv header {','.join(DIAG_HEADER)}")
    out = []
    for r in rows[1:]:
        if len(r) != 5 or r[4] not in ("true", "false"):
            raise FormatError(f"{path}: malformed diagnostics row {r!r}")
        out.append(
            DiagnosticRow(
                lemma_id=r[0],
                t=float(r[1]),
                measured=float(r[2]),
                gate=float(r[3]),
                passed=r[4] == "true",
            )
        )
    return out


@dataclass
class Archive:
    d: int
    nx: int
    nv: int
    Lx: float
    Vmax: float
    dt: float
    f: np.ndarray  # (count, nx^d..., nv^d...)
    rho: np.ndarray  # (count, nx^d...)
    u: np.ndarray  # (count, d, nx^d...)
    p: np.ndarray  # (count, nx^d...)

    @property
    def count(self) -> int:
        return self.f.shape[0]

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.count) * self.dt

    @property
    def v_nodes(self) -> np.ndarray:
        return np.linspace(-self.Vmax, self.Vmax, self.nv)

    @property
    def x_nodes(self) -> np.ndarray:
        return np.arange(self.nx) * (self.Lx / self.nx)

    def v_quad_weights(self) -> np.ndarray:
        """Trapezoid weights over the d-dimensional velocity box."""
        dv = 2.0 * self.Vmax / (self.nv - 1)
        w1 = np.full(self.nv, dv)
        w1[0] = w1[-1] = dv / 2.0
        w = w1
        for _ in range(self.d - 1):
            w = np.multiply.outer(w, w1)
        return w

    def total_energy(self) -> np.ndarray:
        """0.5 int |v|^2 f dv dx + 0.5 int rho |u|^2 dx per snapshot."""
        v = self.v_nodes
        grids = np.meshgrid(*([v] * self.d), indexing="ij")
        v_sq = sum(a**2 for a in grids)
        w = self.v_quad_weights()
        cell_x = (self.Lx / self.nx) ** self.d
        v_axes = tuple(range(1 + self.d, 1 + 2 * self.d))
        kin = 0.5 * np.sum(
            np.tensordot(self.f * v_sq[(None,) * (1 + self.d)], w,
                         axes=(v_axes, tuple(range(self.d)))),
            axis=tuple(range(1, 1 + self.d)),
        ) * cell_x
        fl = 0.5 * np.sum(
            self.rho * np.sum(self.u**2, axis=1),
            axis=tuple(range(1, 1 + self.d)),
        ) * cell_x
        return kin + fl


def read_archive(path: str | Path) -> Archive:
    raw = Path(path).read_bytes()
    if len(raw) < HEADER_SIZE:
        raise FormatError(f"{path}: truncated header")
    magic, version, d, *rest = struct.unpack(_HEADER_FMT, raw[:HEADER_SIZE])
    if magic != MAGIC:
        raise FormatError(f"{path}: bad magic bytes {magic!r}")
    if version != VERSION:
        raise FormatError(f"{path}: unsupported format version {version}")
    if d not in (1, 2, 3):
        raise FormatError(f"{path}: bad dimension {d}")
    nx3, nv3 = rest[0:3], rest[3:6]
    Lx, Vmax, dt, count = rest[6], rest[7], rest[8], rest[9]
    nx, nv = nx3[0], nv3[0]
    nphase = nx**d * nv**d
    nspace = nx**d
    per_snap = (nphase + nspace * (d + 2)) * 8
    expected = HEADER_SIZE + count * per_snap
    if len(raw) != expected:
        raise FormatError(
            f"{path}: payload length mismatch: file has {len(raw)} bytes, "
            f"header implies {expected}"
        )
    shape_x = (nx,) * d
    shape_phase = shape_x + (nv,) * d
    f = np.empty((count,) + shape_phase)
    rho = np.empty((count,) + shape_x)
    u = np.empty((count, d) + shape_x)
    p = np.empty((count,) + shape_x)
    off = HEADER_SIZE
    for k in range(count):
        block = np.frombuffer(raw, dtype="<f8", count=per_snap // 8, offset=off)
        off += per_snap
        pos = 0
        f[k] = block[pos : pos + nphase].reshape(shape_phase)
        pos += nphase
        rho[k] = block[pos : pos + nspace].reshape(shape_x)
        pos += nspace
        u[k] = block[pos : pos + d * nspace].reshape((d,) + shape_x)
        pos += d * nspace
        p[k] = block[pos : pos + nspace].reshape(shape_x)
    return Archive(d=d, nx=nx, nv=nv, Lx=Lx, Vmax=Vmax, dt=dt, f=f, rho=rho, u=u, p=p)
