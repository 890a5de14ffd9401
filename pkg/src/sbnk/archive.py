"""FieldArchive: the binary on-disk snapshot format.

Layout (all little-endian):

====== ====== =======================================
offset type   field
====== ====== =======================================
0      4s     magic ``SBNK``
4      u16    format version (currently 1)
6      u16    d (dimension)
8      3*u32  nx per axis (unused axes zero)
20     3*u32  nv per axis (unused axes zero)
32     f64    Lx
40     f64    Vmax
48     f64    dt (snapshot spacing in time)
56     u32    snapshot count
60     4x     zero padding (header is exactly 64 bytes)
====== ====== =======================================

Payload: per snapshot, contiguous float64 little-endian arrays in C order —
f (x-major, v-minor), rho, u (d components), p.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from sbnk.grid import Distribution, PhaseGrid
from sbnk.picard import IterateTrajectory, total_energy, total_mass, total_momentum

MAGIC = b"SBNK"
VERSION = 1
HEADER_SIZE = 64
_HEADER_FMT = "<4sHH3I3IdddI4x"
assert struct.calcsize(_HEADER_FMT) == HEADER_SIZE


class ArchiveError(ValueError):
    """Corrupt or inconsistent archive file."""


def _snapshot_doubles(grid: PhaseGrid) -> int:
    nphase = grid.nx**grid.d * grid.nv**grid.d
    nspace = grid.nx**grid.d
    return nphase + nspace * (grid.d + 2)


def write_archive(path: str | Path, traj: IterateTrajectory) -> None:
    """Write a trajectory's snapshots to a FieldArchive file."""
    g = traj.grid
    count = len(traj.f_snaps)
    nx3 = [g.nx if j < g.d else 0 for j in range(3)]
    nv3 = [g.nv if j < g.d else 0 for j in range(3)]
    header = struct.pack(
        _HEADER_FMT, MAGIC, VERSION, g.d, *nx3, *nv3, g.Lx, g.Vmax, traj.dt, count
    )
    with open(path, "wb") as fh:
        fh.write(header)
        for k in range(count):
            fh.write(np.ascontiguousarray(traj.f_snaps[k].values, dtype="<f8").tobytes())
            fh.write(np.ascontiguousarray(traj.rho_snaps[k], dtype="<f8").tobytes())
            fh.write(np.ascontiguousarray(traj.u_snaps[k], dtype="<f8").tobytes())
            fh.write(np.ascontiguousarray(traj.p_snaps[k], dtype="<f8").tobytes())


@dataclass
class ArchiveData:
    """In-memory image of one FieldArchive file."""

    grid: PhaseGrid
    dt: float
    f_snaps: list[Distribution]
    rho_snaps: np.ndarray
    u_snaps: np.ndarray
    p_snaps: np.ndarray


def read_header(raw: bytes) -> tuple[PhaseGrid, float, int]:
    if len(raw) < HEADER_SIZE:
        raise ArchiveError("truncated header")
    magic, version, d, *rest = struct.unpack(_HEADER_FMT, raw[:HEADER_SIZE])
    if magic != MAGIC:
        raise ArchiveError(f"bad magic bytes {magic!r}")
    if version != VERSION:
        raise ArchiveError(f"unsupported format version {version}")
    nx3 = rest[0:3]
    nv3 = rest[3:6]
    Lx, Vmax, dt, count = rest[6], rest[7], rest[8], rest[9]
    if d not in (1, 2, 3):
        raise ArchiveError(f"bad dimension {d}")
    for j in range(d):
        if nx3[j] != nx3[0] or nv3[j] != nv3[0]:
            raise ArchiveError("anisotropic grids not supported")
    for j in range(d, 3):
        if nx3[j] != 0 or nv3[j] != 0:
            raise ArchiveError("nonzero grid counts beyond dimension d")
    grid = PhaseGrid(d=d, nx=nx3[0], nv=nv3[0], Lx=Lx, Vmax=Vmax)
    return grid, dt, count


def read_archive(path: str | Path) -> ArchiveData:
    """Read a FieldArchive file, validating header/payload consistency."""
    raw = Path(path).read_bytes()
    grid, dt, count = read_header(raw)
    per_snap = _snapshot_doubles(grid) * 8
    expected = HEADER_SIZE + count * per_snap
    if len(raw) != expected:
        raise ArchiveError(
            f"payload length mismatch: file has {len(raw)} bytes, header implies {expected}"
        )
    nphase = grid.nx**grid.d * grid.nv**grid.d
    nspace = grid.nx**grid.d
    f_snaps: list[Distribution] = []
    rho_snaps = np.empty((count,) + grid.shape_x)
    u_snaps = np.empty((count, grid.d) + grid.shape_x)
    p_snaps = np.empty((count,) + grid.shape_x)
    off = HEADER_SIZE
    for k in range(count):
        block = np.frombuffer(raw, dtype="<f8", count=_snapshot_doubles(grid), offset=off)
        off += per_snap
        pos = 0
        f_snaps.append(
            Distribution(grid, block[pos : pos + nphase].reshape(grid.shape_phase).copy())
        )
        pos += nphase
        rho_snaps[k] = block[pos : pos + nspace].reshape(grid.shape_x)
        pos += nspace
        u_snaps[k] = block[pos : pos + grid.d * nspace].reshape(
            (grid.d,) + grid.shape_x
        )
        pos += grid.d * nspace
        p_snaps[k] = block[pos : pos + nspace].reshape(grid.shape_x)
    return ArchiveData(
        grid=grid, dt=dt, f_snaps=f_snaps, rho_snaps=rho_snaps,
        u_snaps=u_snaps, p_snaps=p_snaps,
    )


def verify_archive(path: str | Path) -> list[str]:
    """Validate an archive and summarize conservation/norm quantities per snapshot.

    Returns human-readable report lines; raises ArchiveError on structural
    corruption.  Positivity violations are reported, not raised.
    """
    data = read_archive(path)
    lines = [
        f"archive: d={data.grid.d} nx={data.grid.nx} nv={data.grid.nv} "
        f"Lx={data.grid.Lx:g} Vmax={data.grid.Vmax:g} dt={data.dt:g} "
        f"snapshots={len(data.f_snaps)}"
    ]
    for k, f in enumerate(data.f_snaps):
        fmin = float(np.min(f.values))
        if fmin < 0:
            # summarize the clipped field so the report stays readable; the
            # violation itself is flagged below
            f = Distribution(data.grid, np.maximum(f.values, 0.0))
        mass = total_mass(f)
        mom = total_momentum(f, data.rho_snaps[k], data.u_snaps[k])
        energy = total_energy(f, data.rho_snaps[k], data.u_snaps[k])
        rho_min = float(np.min(data.rho_snaps[k]))
        line = (
            f"snapshot {k}: mass={mass:.12g} momentum={np.array2string(mom, precision=10)} "
            f"energy={energy:.12g} min_f={fmin:.3g} min_rho={rho_min:.6g}"
        )
        if fmin < 0:
            line += "  [POSITIVITY VIOLATION]"
        lines.append(line)
    return lines
