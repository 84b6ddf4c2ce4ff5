"""PDE coefficient fields and the sparse finite-difference generator D(t).

The transformed equation of motion is

    dW/dtau = sum_{n+m<=3} g_nm(u, v, tau) d^{n+m} W / du^n dv^m,

with ten scalar coefficient fields.  In internal units (m = 1, Omega = 1,
hbar = 2, potential W = 2U) the fields read, writing q = -(1/3) U'''(u_c)
for the cubic quantum weight and d = 2*Gamma for the momentum diffusion
weight:

    g00 = gamma
    g10 = gamma*v_c*X1 + d*X2 + q*X3        g01 = gamma*v_c*P1 + d*P2 + q*P3
    g20 = d*X1^2 + 3q*X1*X2                 g02 = d*P1^2 + 3q*P1*P2
    g11 = 2d*X1*P1 + 3q*(X2*P1 + X1*P2)
    g30 = q*X1^3                            g03 = q*P1^3
    g21 = 3q*X1^2*P1                        g12 = 3q*X1*P1^2

where (X*, P*) are the backward-map momentum derivatives.  Discretizing every
derivative with second-order centered differences couples each grid point to
12 neighbours; rows wrap periodically (i = nx identified with i = 0, same
for j).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.sparse

from .errors import AssemblyError
from .flow import FlowField
from .grid import PhaseGrid
from .inverse import InverseDerivs
from .units import DimensionlessParams

#: The 13 stencil offsets (di, dj), diagonal entry first.
STENCIL_OFFSETS = (
    (0, 0),
    (1, 0), (-1, 0), (0, 1), (0, -1),
    (1, 1), (-1, -1), (1, -1), (-1, 1),
    (2, 0), (-2, 0), (0, 2), (0, -2),
)


@dataclass
class GCoeffs:
    """The ten coefficient fields, each a flat array over the grid."""

    g00: np.ndarray
    g10: np.ndarray
    g01: np.ndarray
    g20: np.ndarray
    g02: np.ndarray
    g11: np.ndarray
    g30: np.ndarray
    g03: np.ndarray
    g21: np.ndarray
    g12: np.ndarray

    def as_dict(self):
        return {(0, 0): self.g00, (1, 0): self.g10, (0, 1): self.g01,
                (2, 0): self.g20, (0, 2): self.g02, (1, 1): self.g11,
                (3, 0): self.g30, (0, 3): self.g03, (2, 1): self.g21,
                (1, 2): self.g12}


def g_coefficients(flow: FlowField, inv: InverseDerivs,
                   params: DimensionlessParams) -> GCoeffs:
    """Evaluate all ten coefficient fields from flow + inverse-map data."""
    n = flow.grid.n
    gamma = params.gamma
    dcoef = 2.0 * params.big_gamma

    if params.classical:
        qcoef = np.zeros(n)
    else:
        u3 = params.potential.derivs(flow.x)[2]
        qcoef = -u3 / 3.0

    x1, p1 = inv.x1, inv.p1
    x2, p2 = inv.x2, inv.p2
    x3, p3 = inv.x3, inv.p3
    v_c = flow.p

    return GCoeffs(
        g00=np.full(n, gamma),
        g10=gamma * v_c * x1 + dcoef * x2 + qcoef * x3,
        g01=gamma * v_c * p1 + dcoef * p2 + qcoef * p3,
        g20=dcoef * x1 * x1 + 3.0 * qcoef * x1 * x2,
        g02=dcoef * p1 * p1 + 3.0 * qcoef * p1 * p2,
        g11=2.0 * dcoef * x1 * p1 + 3.0 * qcoef * (x2 * p1 + x1 * p2),
        g30=qcoef * x1**3,
        g03=qcoef * p1**3,
        g21=3.0 * qcoef * x1 * x1 * p1,
        g12=3.0 * qcoef * x1 * p1 * p1,
    )


@lru_cache(maxsize=8)
def _csr_pattern(grid: PhaseGrid):
    """Fixed sparsity structure of the 13-slot operator on a grid.

    Every row holds exactly 13 entries; only the data array changes between
    steps.  Returns (indices, indptr, order) where ``order`` permutes the
    stacked slot values into column-sorted CSR order.
    """
    nx, np_ = grid.nx, grid.np_
    ii, jj = np.meshgrid(np.arange(nx), np.arange(np_), indexing="ij")
    cols = np.empty((len(STENCIL_OFFSETS), grid.n), dtype=np.int32)
    for t, (di, dj) in enumerate(STENCIL_OFFSETS):
        cols[t] = (((ii + di) % nx) * np_ + (jj + dj) % np_).ravel()
    order = np.argsort(cols, axis=0, kind="stable")
    indices = np.take_along_axis(cols, order, axis=0).T.ravel()
    indptr = len(STENCIL_OFFSETS) * np.arange(grid.n + 1, dtype=np.int64)
    return indices, indptr, order


class SparseOperator:
    """D(t) stored as 13 value fields, one per stencil offset.

    Rows are fixed 13-slot (zero-padded) with periodic column wrap
    (i = nx identified with 0, j = np with 0); the matvec runs through a
    compressed-row matrix whose sparsity pattern is cached per grid.
    """

    def __init__(self, grid: PhaseGrid, slot_values):
        self.grid = grid
        self.slots = slot_values  # list of (nx, np) arrays, order of STENCIL_OFFSETS
        self._csr = None

    @property
    def n(self) -> int:
        return self.grid.n

    def csr(self) -> scipy.sparse.csr_matrix:
        if self._csr is None:
            indices, indptr, order = _csr_pattern(self.grid)
            stacked = np.stack([s.ravel() for s in self.slots])
            data = np.take_along_axis(stacked, order, axis=0).T.ravel()
            self._csr = scipy.sparse.csr_matrix((data, indices, indptr),
                                                shape=(self.n, self.n))
        return self._csr

    def matvec(self, w: np.ndarray) -> np.ndarray:
        return self.csr().dot(w)

    def one_norm(self) -> float:
        """Exact max column sum of |D|."""
        col = np.zeros((self.grid.nx, self.grid.np_))
        for (di, dj), vals in zip(STENCIL_OFFSETS, self.slots):
            col += np.roll(np.abs(vals), shift=(di, dj), axis=(0, 1))
        return float(col.max())

    def trace(self) -> float:
        return float(self.slots[0].sum())

    def nnz(self) -> int:
        return int(sum(np.count_nonzero(v) for v in self.slots))

    def shifted(self, mu: float) -> "SparseOperator":
        """D - mu*I (used to shrink the norm before the exponential series)."""
        slots = [self.slots[0] - mu] + [v for v in self.slots[1:]]
        return SparseOperator(self.grid, slots)

    def to_coo(self, drop_zeros: bool = True):
        """(rows, cols, values) triplets; zero-valued slots dropped by default."""
        nx, np_ = self.grid.nx, self.grid.np_
        ii, jj = np.meshgrid(np.arange(nx), np.arange(np_), indexing="ij")
        rows_all, cols_all, vals_all = [], [], []
        for (di, dj), vals in zip(STENCIL_OFFSETS, self.slots):
            cols = ((ii + di) % nx) * np_ + (jj + dj) % np_
            rows_all.append((ii * np_ + jj).ravel())
            cols_all.append(cols.ravel())
            vals_all.append(vals.ravel())
        rows = np.concatenate(rows_all)
        cols = np.concatenate(cols_all)
        vals = np.concatenate(vals_all)
        if drop_zeros:
            keep = vals != 0.0
            rows, cols, vals = rows[keep], cols[keep], vals[keep]
        return rows, cols, vals

    def to_dense(self) -> np.ndarray:
        dense = np.zeros((self.n, self.n))
        rows, cols, vals = self.to_coo(drop_zeros=False)
        np.add.at(dense, (rows, cols), vals)
        return dense


def assemble_operator(grid: PhaseGrid, g: GCoeffs) -> SparseOperator:
    """Substitute the centered stencils into the coefficient form of the PDE.

    Per-row entries (h = hx, k = hp for brevity):

        (i, j)      g00 - 2 g20/h^2 - 2 g02/k^2
        (i+1, j)    +g10/2h + g20/h^2 - g30/h^3 - g12/(h k^2)
        (i-1, j)    -g10/2h + g20/h^2 + g30/h^3 + g12/(h k^2)
        (i, j+1)    +g01/2k + g02/k^2 - g03/k^3 - g21/(h^2 k)
        (i, j-1)    -g01/2k + g02/k^2 + g03/k^3 + g21/(h^2 k)
        (i+1, j+1)  +g11/4hk + g21/(2 h^2 k) + g12/(2 h k^2)
        (i-1, j-1)  +g11/4hk - g21/(2 h^2 k) - g12/(2 h k^2)
        (i+1, j-1)  -g11/4hk - g21/(2 h^2 k) + g12/(2 h k^2)
        (i-1, j+1)  -g11/4hk + g21/(2 h^2 k) - g12/(2 h k^2)
        (i+-2, j)   +-g30/(2 h^3)
        (i, j+-2)   +-g03/(2 k^3)
    """
    shape = (grid.nx, grid.np_)
    hx, hp = grid.hx, grid.hp

    def f(a):
        a = np.asarray(a)
        if not np.isfinite(a).all():
            k = int(np.argmax(~np.isfinite(a)))
            raise AssemblyError(
                f"non-finite coefficient at grid index {grid.unravel(k)} (k={k})")
        return a.reshape(shape)

    g00, g10, g01 = f(g.g00), f(g.g10), f(g.g01)
    g20, g02, g11 = f(g.g20), f(g.g02), f(g.g11)
    g30, g03, g21, g12 = f(g.g30), f(g.g03), f(g.g21), f(g.g12)

    mixed = g11 / (4.0 * hx * hp)
    xxp = g21 / (2.0 * hx * hx * hp)
    xpp = g12 / (2.0 * hx * hp * hp)

    slots = [
        g00 - 2.0 * g20 / hx**2 - 2.0 * g02 / hp**2,
        g10 / (2.0 * hx) + g20 / hx**2 - g30 / hx**3 - 2.0 * xpp,
        -g10 / (2.0 * hx) + g20 / hx**2 + g30 / hx**3 + 2.0 * xpp,
        g01 / (2.0 * hp) + g02 / hp**2 - g03 / hp**3 - 2.0 * xxp,
        -g01 / (2.0 * hp) + g02 / hp**2 + g03 / hp**3 + 2.0 * xxp,
        mixed + xxp + xpp,
        mixed - xxp - xpp,
        -mixed - xxp + xpp,
        -mixed + xxp - xpp,
        g30 / (2.0 * hx**3),
        -g30 / (2.0 * hx**3),
        g03 / (2.0 * hp**3),
        -g03 / (2.0 * hp**3),
    ]
    return SparseOperator(grid, slots)


def boundary_mass_fraction(w: np.ndarray, grid: PhaseGrid, width: int = 2) -> float:
    """|W| mass within ``width`` cells of any edge, relative to the total."""
    w2 = np.abs(w.reshape(grid.nx, grid.np_))
    total = float(w2.sum())
    if total == 0.0:
        return 0.0
    inner = float(w2[width:-width, width:-width].sum())
    return (total - inner) / total
