"""Phase-space grids and field containers.

The spatial domain is a periodic box (torus) with ``nx`` points per axis and
period ``Lx``; the velocity domain is the box ``[-Vmax, Vmax]^d`` with ``nv``
points per axis, endpoints included.  A kinetic density lives on the tensor
product of the two.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np


class GridError(ValueError):
    """Invalid grid construction parameters."""


@dataclass(frozen=True)
class PhaseGrid:
    """Discretized torus x velocity-box phase space.

    Parameters
    ----------
    d : int
        Spatial/velocity dimension (1, 2 or 3).
    nx : int
        Spatial points per axis (even, >= 4; required by the spectral fluid solve).
    nv : int
        Velocity points per axis (even, >= 4).
    Lx : float
        Torus period per axis.
    Vmax : float
        Velocity truncation half-width; nodes span [-Vmax, Vmax] inclusive.
    """

    d: int
    nx: int
    nv: int
    Lx: float = 1.0
    Vmax: float = 8.0

    def __post_init__(self) -> None:
        if self.d not in (1, 2, 3):
            raise GridError(f"dimension must be 1, 2 or 3, got {self.d}")
        for name, n in (("nx", self.nx), ("nv", self.nv)):
            if n < 4 or n % 2 != 0:
                raise GridError(f"{name} must be even and >= 4, got {n}")
        if self.Lx <= 0 or self.Vmax <= 0:
            raise GridError("Lx and Vmax must be positive")

    # -- derived spacings ---------------------------------------------------

    @property
    def dx(self) -> float:
        return self.Lx / self.nx

    @property
    def dv(self) -> float:
        # endpoints at +-Vmax: dv * (nv - 1) == 2 * Vmax
        return 2.0 * self.Vmax / (self.nv - 1)

    @property
    def shape_x(self) -> tuple[int, ...]:
        return (self.nx,) * self.d

    @property
    def shape_v(self) -> tuple[int, ...]:
        return (self.nv,) * self.d

    @property
    def shape_phase(self) -> tuple[int, ...]:
        return self.shape_x + self.shape_v

    # -- node coordinates ---------------------------------------------------

    @cached_property
    def x_nodes(self) -> np.ndarray:
        return np.arange(self.nx) * self.dx

    @cached_property
    def v_nodes(self) -> np.ndarray:
        return -self.Vmax + np.arange(self.nv) * self.dv

    def v_axis(self, j: int) -> np.ndarray:
        """Velocity nodes of axis ``j`` broadcast over ``shape_v``."""
        shape = [1] * self.d
        shape[j] = self.nv
        return self.v_nodes.reshape(shape)

    def x_axis(self, j: int) -> np.ndarray:
        """Spatial nodes of axis ``j`` broadcast over ``shape_x``."""
        shape = [1] * self.d
        shape[j] = self.nx
        return self.x_nodes.reshape(shape)

    @cached_property
    def v_mag(self) -> np.ndarray:
        """|v| over the velocity box, shape ``shape_v``."""
        sq = sum(self.v_axis(j) ** 2 for j in range(self.d))
        return np.sqrt(sq)

    def velocity_weight(self, q: float) -> np.ndarray:
        """(1 + |v|)^q over the velocity box."""
        return (1.0 + self.v_mag) ** q

    @cached_property
    def v_quad_weights(self) -> np.ndarray:
        """Trapezoidal tensor-product quadrature weights over the velocity box."""
        w1 = np.full(self.nv, self.dv)
        w1[0] *= 0.5
        w1[-1] *= 0.5
        w = w1
        for _ in range(self.d - 1):
            w = np.multiply.outer(w, w1)
        return w

    def wavenumbers(self, j: int) -> np.ndarray:
        """Spectral wavenumbers of spatial axis ``j`` broadcast over ``shape_x``."""
        k1 = 2.0 * np.pi * np.fft.fftfreq(self.nx, d=self.dx)
        shape = [1] * self.d
        shape[j] = self.nx
        return k1.reshape(shape)

    @cached_property
    def k_squared(self) -> np.ndarray:
        return sum(self.wavenumbers(j) ** 2 for j in range(self.d))

    @property
    def cell_volume_x(self) -> float:
        return self.dx**self.d

    def wrap(self, x: np.ndarray) -> np.ndarray:
        """Wrap torus coordinates into [0, Lx)."""
        return np.mod(x, self.Lx)


@dataclass(frozen=True)
class WeightParams:
    """Velocity-weight parameters for the weighted sup norms and initial-data floor.

    ``q`` is the weight exponent (must exceed d + 2), ``a`` the extra tail
    margin of the initial-data lower barrier, ``eps1`` its amplitude.
    """

    q: float
    a: float = 0.5
    eps1: float = 1e-3

    def __post_init__(self) -> None:
        if self.a <= 0:
            raise ValueError("tail margin a must be positive")
        if self.eps1 < 0:
            raise ValueError("eps1 must be nonnegative")

    def validate_for_dim(self, d: int) -> None:
        if self.q <= d + 2:
            raise ValueError(f"weight exponent q must exceed d+2={d + 2}, got {self.q}")


@dataclass
class Distribution:
    """Kinetic density on a phase grid; ``values`` indexed (x-multi-index, v-multi-index)."""

    grid: PhaseGrid
    values: np.ndarray

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != self.grid.shape_phase:
            raise GridError(
                f"values shape {self.values.shape} does not match grid {self.grid.shape_phase}"
            )

    def copy(self) -> "Distribution":
        return Distribution(self.grid, self.values.copy())

    def tail_mass(self) -> float:
        """Velocity mass in the outer two-cell rim |v| > Vmax - 2*dv, max over x."""
        g = self.grid
        rim = g.v_mag > g.Vmax - 2.0 * g.dv
        w = g.v_quad_weights * rim
        v_axes = tuple(range(g.d, 2 * g.d))
        return float(np.max(np.tensordot(self.values, w, axes=(v_axes, tuple(range(g.d))))))

    def check_initial(self, trunc_tol: float = 1e-10) -> None:
        """Validate the initial-data invariants: nonnegativity and tail truncation."""
        if not np.all(np.isfinite(self.values)):
            raise ValueError("non-finite field")
        if np.min(self.values) < -1e-14:
            raise ValueError("negative distribution")
        tm = self.tail_mass()
        if tm > trunc_tol:
            raise ValueError(
                f"velocity-box truncation too aggressive: rim mass {tm:.3e} > {trunc_tol:.1e}; "
                "increase Vmax"
            )
