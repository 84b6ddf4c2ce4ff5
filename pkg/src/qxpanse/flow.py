"""Classical trajectories and their initial-condition derivatives, per grid point.

For every phase-space point we track 20 scalars: the trajectory (x, p) plus
all derivatives with respect to the initial condition (x0, p0) up to third
order.  The equations of motion for the derivatives follow from repeatedly
differentiating Hamilton's equations, so the whole hierarchy splits into a
"position block" X (driven only by the momentum block) and a "momentum block"
P (driven only by potential derivatives evaluated at the current x and by
lower-order position components).  That split makes one shared drift/kick
leapfrog exact for the extended system, and the 4th-order composition scheme
applies to all 20 components in lockstep.

Blocks are arrays of shape (10, n); row order within each block:

    0: value          5: d2/dp0^2
    1: d/dx0          6: d3/dx0^3
    2: d/dp0          7: d3/dx0^2 dp0
    3: d2/dx0^2       8: d3/dx0 dp0^2
    4: d2/dx0 dp0     9: d3/dp0^3

Internal units throughout (see units.py): m = 1, the kick force is -W'(u)
with W = 2*U.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DivergedTrajectoryError
from .grid import PhaseGrid
from .units import Potential

#: 4th-order composition coefficients (w1, w0, w1 substeps of leapfrog).
_CBRT2 = 2.0 ** (1.0 / 3.0)
_W1 = 1.0 / (2.0 - _CBRT2)
_W0 = -_CBRT2 / (2.0 - _CBRT2)
YOSHIDA_DRIFTS = (0.5 * _W1, 0.5 * (_W0 + _W1), 0.5 * (_W0 + _W1), 0.5 * _W1)
YOSHIDA_KICKS = (_W1, _W0, _W1)

#: Any |u| or |v| beyond this is treated as a blown-up trajectory.
DIVERGENCE_LIMIT = 1.0e12


@dataclass
class FlowState:
    """The 20 per-point scalars, with named access (used by tests and docs)."""

    x: float
    p: float
    x_dx: float
    x_dp: float
    p_dx: float
    p_dp: float
    x_dxx: float
    x_dxp: float
    x_dpp: float
    p_dxx: float
    p_dxp: float
    p_dpp: float
    x_dxxx: float
    x_dxxp: float
    x_dxpp: float
    x_dppp: float
    p_dxxx: float
    p_dxxp: float
    p_dxpp: float
    p_dppp: float

    @classmethod
    def initial(cls, x0: float, p0: float) -> "FlowState":
        s = cls(*([0.0] * 20))
        s.x, s.p = x0, p0
        s.x_dx, s.p_dp = 1.0, 1.0
        return s

    def to_blocks(self):
        """(X, P) arrays of shape (10, 1)."""
        x_block = np.array([[self.x], [self.x_dx], [self.x_dp], [self.x_dxx],
                            [self.x_dxp], [self.x_dpp], [self.x_dxxx],
                            [self.x_dxxp], [self.x_dxpp], [self.x_dppp]])
        p_block = np.array([[self.p], [self.p_dx], [self.p_dp], [self.p_dxx],
                            [self.p_dxp], [self.p_dpp], [self.p_dxxx],
                            [self.p_dxxp], [self.p_dxpp], [self.p_dppp]])
        return x_block, p_block

    @classmethod
    def from_blocks(cls, x_block, p_block, k=0):
        vals = [x_block[0, k], p_block[0, k],
                x_block[1, k], x_block[2, k], p_block[1, k], p_block[2, k],
                x_block[3, k], x_block[4, k], x_block[5, k],
                p_block[3, k], p_block[4, k], p_block[5, k],
                x_block[6, k], x_block[7, k], x_block[8, k], x_block[9, k],
                p_block[6, k], p_block[7, k], p_block[8, k], p_block[9, k]]
        return cls(*[float(v) for v in vals])


def hierarchy_rhs(x_block: np.ndarray, p_block: np.ndarray, potential: Potential):
    """Time derivative of both blocks.

    The position block simply drifts with the momentum block.  The momentum
    block combines W'', W''' and W'''' at the current x with products of
    lower-order position derivatives; mixed-derivative rows use the same
    expressions regardless of the order the initial-condition labels are
    written in.
    """
    u = x_block[0]
    d1, d2, d3, d4 = potential.derivs(u)
    w1, w2, w3, w4 = 2.0 * d1, 2.0 * d2, 2.0 * d3, 2.0 * d4

    x1, x2 = x_block[1], x_block[2]
    x3, x4, x5 = x_block[3], x_block[4], x_block[5]

    dp = np.empty_like(p_block)
    dp[0] = -w1
    dp[1] = -w2 * x1
    dp[2] = -w2 * x2
    dp[3] = -(w3 * x1 * x1 + w2 * x3)
    dp[4] = -(w3 * x1 * x2 + w2 * x4)
    dp[5] = -(w3 * x2 * x2 + w2 * x5)
    dp[6] = -(w4 * x1**3 + 3.0 * w3 * x1 * x3 + w2 * x_block[6])
    dp[7] = -(w4 * x1 * x1 * x2 + w3 * (x3 * x2 + 2.0 * x1 * x4) + w2 * x_block[7])
    dp[8] = -(w4 * x1 * x2 * x2 + w3 * (x1 * x5 + 2.0 * x2 * x4) + w2 * x_block[8])
    dp[9] = -(w4 * x2**3 + 3.0 * w3 * x2 * x5 + w2 * x_block[9])
    return p_block.copy(), dp


def _kick(x_block, p_block, dt, potential):
    """Momentum-block update over dt with the position block frozen."""
    _, dp = hierarchy_rhs(x_block, p_block, potential)
    p_block += dt * dp


def _drift(x_block, p_block, dt):
    x_block += dt * p_block


def yoshida_step_blocks(x_block, p_block, potential, dt):
    """One 4th-order composition step, in place, any sign of dt."""
    _drift(x_block, p_block, YOSHIDA_DRIFTS[0] * dt)
    _kick(x_block, p_block, YOSHIDA_KICKS[0] * dt, potential)
    _drift(x_block, p_block, YOSHIDA_DRIFTS[1] * dt)
    _kick(x_block, p_block, YOSHIDA_KICKS[1] * dt, potential)
    _drift(x_block, p_block, YOSHIDA_DRIFTS[2] * dt)
    _kick(x_block, p_block, YOSHIDA_KICKS[2] * dt, potential)
    _drift(x_block, p_block, YOSHIDA_DRIFTS[3] * dt)


def yoshida_step(state: FlowState, potential: Potential, dt: float) -> FlowState:
    """Single-point convenience wrapper around the block stepper."""
    xb, pb = state.to_blocks()
    yoshida_step_blocks(xb, pb, potential, dt)
    return FlowState.from_blocks(xb, pb)


class FlowField:
    """One FlowState per grid point, advanced in lockstep.

    Points are independent; the vectorized update is bit-identical to a
    per-point loop.
    """

    def __init__(self, grid: PhaseGrid, potential: Potential):
        self.grid = grid
        self.potential = potential
        self.tau = 0.0
        n = grid.n
        u, v = grid.points()
        self.xb = np.zeros((10, n))
        self.pb = np.zeros((10, n))
        self.xb[0] = u
        self.pb[0] = v
        self.xb[1] = 1.0
        self.pb[2] = 1.0

    @property
    def x(self) -> np.ndarray:
        """Current trajectory positions x_cl per grid point."""
        return self.xb[0]

    @property
    def p(self) -> np.ndarray:
        return self.pb[0]

    def jacobian(self) -> np.ndarray:
        """Forward Jacobian per point, shape (n, 2, 2)."""
        n = self.grid.n
        jac = np.empty((n, 2, 2))
        jac[:, 0, 0] = self.xb[1]
        jac[:, 0, 1] = self.xb[2]
        jac[:, 1, 0] = self.pb[1]
        jac[:, 1, 1] = self.pb[2]
        return jac

    def state(self, k: int) -> FlowState:
        return FlowState.from_blocks(self.xb, self.pb, k)

    def advance(self, dtau: float, substeps: int = 1):
        """Advance every point by dtau using ``substeps`` composition steps."""
        if dtau <= 0:
            raise ValueError("dtau must be positive")
        dt = dtau / substeps
        for _ in range(substeps):
            yoshida_step_blocks(self.xb, self.pb, self.potential, dt)
        self.tau += dtau
        self._check_finite()

    def _check_finite(self):
        bad = ~np.isfinite(self.xb[0]) | ~np.isfinite(self.pb[0])
        bad |= (np.abs(self.xb[0]) > DIVERGENCE_LIMIT) | (np.abs(self.pb[0]) > DIVERGENCE_LIMIT)
        if bad.any():
            k = int(np.argmax(bad))
            raise DivergedTrajectoryError(
                f"trajectory diverged at grid index {self.grid.unravel(k)} "
                f"(k={k}) at tau={self.tau:.6g}",
                indices=self.grid.unravel(k), time=self.tau)

    def copy(self) -> "FlowField":
        out = FlowField.__new__(FlowField)
        out.grid = self.grid
        out.potential = self.potential
        out.tau = self.tau
        out.xb = self.xb.copy()
        out.pb = self.pb.copy()
        return out


def propagate_points(u, v, potential: Potential, tau: float, dt: float):
    """Integrate plain trajectories (no derivatives) from (u, v) over tau.

    dt is the magnitude of the composition step; a negative ``tau`` runs the
    flow backwards.  Returns new (u, v) arrays.
    """
    u = np.array(u, dtype=np.float64, copy=True)
    v = np.array(v, dtype=np.float64, copy=True)
    if tau == 0.0:
        return u, v
    n_steps = max(1, int(np.ceil(abs(tau) / dt - 1e-12)))
    h = tau / n_steps
    for _ in range(n_steps):
        for drift_c, kick_c in zip(YOSHIDA_DRIFTS, YOSHIDA_KICKS + (None,)):
            u += (drift_c * h) * v
            if kick_c is not None:
                v += (kick_c * h) * potential.force_internal(u)
    bad = ~np.isfinite(u) | ~np.isfinite(v)
    bad |= (np.abs(u) > DIVERGENCE_LIMIT) | (np.abs(v) > DIVERGENCE_LIMIT)
    if bad.any():
        raise DivergedTrajectoryError(
            f"{int(bad.sum())} point trajectories diverged during a {tau:.3g} flow",
            indices=np.nonzero(bad)[0], time=tau)
    return u, v


def backward_point(u, v, potential: Potential, tau: float, dt: float):
    """Map (u, v) through the classical flow reversed over tau >= 0."""
    if tau < 0:
        raise ValueError("tau must be non-negative")
    return propagate_points(u, v, potential, -tau, dt)
