"""Regular phase-space lattice and the Wigner vector living on it.

All coordinates are dimensionless: position in units of x_zpf, momentum in
units of p_zpf, time in units of 1/Omega.  A grid point (i, j) sits at
(x0 + i*hx, p0 + j*hp) and maps to the flat index k = i*np + j.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterError

FRAME_LIOUVILLE = "liouville"
FRAME_LAB = "lab"


@dataclass(frozen=True)
class PhaseGrid:
    """Rectangular N_x x N_p lattice with spacings (hx, hp) and origin (x0, p0)."""

    nx: int
    np_: int
    hx: float
    hp: float
    x0: float
    p0: float

    def __post_init__(self):
        if self.nx < 8 or self.np_ < 8:
            raise ParameterError(f"grid must be at least 8x8, got {self.nx}x{self.np_}")
        if self.hx <= 0 or self.hp <= 0:
            raise ParameterError("grid spacings must be positive")

    @classmethod
    def centered(cls, nx, np_, hx, hp, center=(0.0, 0.0)):
        """Grid whose midpoint falls on ``center``."""
        x0 = center[0] - 0.5 * (nx - 1) * hx
        p0 = center[1] - 0.5 * (np_ - 1) * hp
        return cls(nx, np_, hx, hp, x0, p0)

    @property
    def n(self) -> int:
        return self.nx * self.np_

    @property
    def cell_area(self) -> float:
        return self.hx * self.hp

    @property
    def x_coords(self) -> np.ndarray:
        return self.x0 + self.hx * np.arange(self.nx)

    @property
    def p_coords(self) -> np.ndarray:
        return self.p0 + self.hp * np.arange(self.np_)

    def points(self):
        """Flattened coordinate arrays (u, v), each of length n, k = i*np + j."""
        u, v = np.meshgrid(self.x_coords, self.p_coords, indexing="ij")
        return u.ravel(), v.ravel()

    def unravel(self, k):
        return divmod(k, self.np_)


@dataclass
class WignerField:
    """Real Wigner values on a PhaseGrid, flattened with k = i*np + j."""

    grid: PhaseGrid
    values: np.ndarray
    tau: float = 0.0
    frame: str = FRAME_LIOUVILLE

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.shape != (self.grid.n,):
            raise ParameterError(
                f"field length {self.values.size} does not match grid size {self.grid.n}"
            )

    def as_matrix(self) -> np.ndarray:
        """View shaped (nx, np) with W[i, j] = values[i*np + j]."""
        return self.values.reshape(self.grid.nx, self.grid.np_)

    def norm(self) -> float:
        """Discrete integral sum(W) * hx * hp."""
        return float(np.sum(self.values) * self.grid.cell_area)

    def copy(self) -> "WignerField":
        return WignerField(self.grid, self.values.copy(), self.tau, self.frame)
