"""Lab-frame observables extracted from the co-moving Wigner field.

Moments use the measure-preserving change of variables: the grid carries the
co-moving values, the flow carries each point's current lab coordinates, and
the cell area is unchanged (unit Jacobian), so lab moments are plain
quadrature over mapped points.  The full lab-frame field instead needs the
backward trajectories: W(x, p, t) equals the co-moving field evaluated at the
point that flows to (x, p) after time t.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateStateError, NoInterferenceError
from .flow import (DIVERGENCE_LIMIT, YOSHIDA_DRIFTS, YOSHIDA_KICKS, FlowField)
from .grid import FRAME_LAB, PhaseGrid, WignerField
from .units import Potential


@dataclass
class Moments:
    """First and second phase-space moments in zero-point units.

    xp_sym is the symmetrized cross moment <{u, v}> = 2<u v>; divide by the
    internal hbar = 2 to get <{x, p}>/hbar.
    """

    mean_x: float
    mean_p: float
    x2: float
    p2: float
    xp_sym: float

    @property
    def xp_sym_hbar(self) -> float:
        return 0.5 * self.xp_sym


def moments(w: WignerField, flow: FlowField) -> Moments:
    """Second-order moments by quadrature over forward-mapped grid points."""
    norm = float(np.sum(w.values))
    if norm == 0.0 or not np.isfinite(norm):
        raise DegenerateStateError("Wigner field has zero or non-finite norm")
    weights = w.values / norm
    x, p = flow.x, flow.p
    mean_x = float(weights @ x)
    mean_p = float(weights @ p)
    return Moments(
        mean_x=mean_x,
        mean_p=mean_p,
        x2=float(weights @ (x * x)),
        p2=float(weights @ (p * p)),
        xp_sym=2.0 * float(weights @ (x * p)),
    )


def moments_lab(w_lab: WignerField) -> Moments:
    """Moments of a lab-frame field on its own grid (cross-check path)."""
    norm = float(np.sum(w_lab.values))
    if norm == 0.0 or not np.isfinite(norm):
        raise DegenerateStateError("Wigner field has zero or non-finite norm")
    weights = w_lab.values / norm
    u, v = w_lab.grid.points()
    return Moments(
        mean_x=float(weights @ u),
        mean_p=float(weights @ v),
        x2=float(weights @ (u * u)),
        p2=float(weights @ (v * v)),
        xp_sym=2.0 * float(weights @ (u * v)),
    )


@dataclass
class GridDensity:
    """Singular values of the (dimensionless) flow Jacobian per grid point."""

    lam_plus: np.ndarray
    lam_minus: np.ndarray

    @property
    def lam_min(self) -> float:
        """Global grid-density parameter: min over points of the small value."""
        return float(self.lam_minus.min())


def grid_density(flow: FlowField) -> GridDensity:
    """Closed-form 2x2 singular values; the product lam+ * lam- is one."""
    xb, pb = flow.xb, flow.pb
    a = xb[1]**2 + xb[2]**2 + pb[1]**2 + pb[2]**2
    # a = lam+^2 + lam-^2 >= 2 for unit determinant; clamp roundoff
    disc = np.sqrt(np.maximum(a * a - 4.0, 0.0))
    lam_minus = np.sqrt(2.0 / (a + disc))
    return GridDensity(lam_plus=1.0 / lam_minus, lam_minus=lam_minus)


def _backward_points_masked(u, v, potential: Potential, tau: float, dt: float):
    """Reverse flow that tolerates (and flags) diverging points."""
    u = np.array(u, dtype=np.float64, copy=True)
    v = np.array(v, dtype=np.float64, copy=True)
    if tau == 0.0:
        return u, v, np.zeros(u.shape, dtype=bool)
    n_steps = max(1, int(np.ceil(tau / dt - 1e-12)))
    h = -tau / n_steps
    with np.errstate(over="ignore", invalid="ignore"):
        for _ in range(n_steps):
            for drift_c, kick_c in zip(YOSHIDA_DRIFTS, YOSHIDA_KICKS + (None,)):
                u += (drift_c * h) * v
                if kick_c is not None:
                    v += (kick_c * h) * potential.force_internal(u)
    bad = ~np.isfinite(u) | ~np.isfinite(v)
    bad |= (np.abs(u) > DIVERGENCE_LIMIT) | (np.abs(v) > DIVERGENCE_LIMIT)
    return u, v, bad


def resample_lab_frame(w: WignerField, potential: Potential,
                       target: PhaseGrid, dt_back: float) -> WignerField:
    """Evaluate the lab-frame Wigner function on ``target``.

    Each target point is propagated backwards over the field's time and the
    co-moving field is bilinearly interpolated there.  Points whose preimage
    falls outside the stored grid contribute zero (the state has compact
    effective support); diverging backward trajectories are zeroed and
    reported once as a warning.
    """
    src = w.grid
    u_t, v_t = target.points()
    u_b, v_b, bad = _backward_points_masked(u_t, v_t, potential, w.tau, dt_back)
    if bad.any():
        warnings.warn(
            f"{int(bad.sum())} of {bad.size} backward trajectories diverged "
            "during resampling; their values were set to zero",
            RuntimeWarning, stacklevel=2)
        u_b = np.where(bad, np.nan, u_b)
        v_b = np.where(bad, np.nan, v_b)

    fx = (u_b - src.x0) / src.hx
    fy = (v_b - src.p0) / src.hp
    with np.errstate(invalid="ignore"):
        inside = (fx >= 0.0) & (fx <= src.nx - 1) & (fy >= 0.0) & (fy <= src.np_ - 1)
    fx = np.where(inside, fx, 0.0)
    fy = np.where(inside, fy, 0.0)

    ix = np.minimum(fx.astype(np.int64), src.nx - 2)
    iy = np.minimum(fy.astype(np.int64), src.np_ - 2)
    tx = fx - ix
    ty = fy - iy

    w2 = w.values.reshape(src.nx, src.np_)
    v00 = w2[ix, iy]
    v10 = w2[ix + 1, iy]
    v01 = w2[ix, iy + 1]
    v11 = w2[ix + 1, iy + 1]
    vals = ((1 - tx) * (1 - ty) * v00 + tx * (1 - ty) * v10
            + (1 - tx) * ty * v01 + tx * ty * v11)
    vals = np.where(inside, vals, 0.0)
    return WignerField(target, vals, tau=w.tau, frame=FRAME_LAB)


@dataclass
class MarginalAnalysis:
    """Position distribution P(x) plus interference metrics (when defined)."""

    x: np.ndarray
    density: np.ndarray
    x_f: float = None
    visibility: float = None
    peak_positions: np.ndarray = None


def position_marginal(w_lab: WignerField):
    """P(x) by trapezoidal integration over the momentum columns."""
    grid = w_lab.grid
    w2 = w_lab.values.reshape(grid.nx, grid.np_)
    density = np.trapezoid(w2, dx=grid.hp, axis=1)
    return grid.x_coords, density


def _refine_peak(x, p, i):
    """Quadratic vertex through (i-1, i, i+1); returns (x*, p*)."""
    denom = p[i - 1] - 2.0 * p[i] + p[i + 1]
    if denom == 0.0:
        return x[i], p[i]
    delta = 0.5 * (p[i - 1] - p[i + 1]) / denom
    delta = float(np.clip(delta, -0.5, 0.5))
    h = x[i + 1] - x[i]
    return x[i] + delta * h, p[i] - 0.25 * (p[i - 1] - p[i + 1]) * delta


def interference_metrics(x, density, noise_floor_rel: float = 1.0e-6):
    """Peak separation x_f and fringe visibility of a position marginal.

    Peaks are discrete local maxima above the noise floor, refined by a
    3-point quadratic fit.  x_f is the distance from the global maximum to
    its nearest other peak; the visibility uses the minimum between those two
    peaks.  Ties in the global maximum go to the peak with smaller |x|.
    """
    x = np.asarray(x, dtype=np.float64)
    p = np.asarray(density, dtype=np.float64)
    floor = noise_floor_rel * p.max()
    idx = [i for i in range(1, len(p) - 1)
           if p[i] > p[i - 1] and p[i] >= p[i + 1] and p[i] > floor]
    if len(idx) < 2:
        raise NoInterferenceError(
            f"found {len(idx)} peak(s) above the noise floor; need at least 2")

    refined = [_refine_peak(x, p, i) for i in idx]
    positions = np.array([r[0] for r in refined])
    heights = np.array([r[1] for r in refined])

    order = sorted(range(len(idx)), key=lambda a: (-heights[a], abs(positions[a])))
    main = order[0]
    others = [a for a in range(len(idx)) if a != main]
    neighbor = min(others, key=lambda a: (abs(positions[a] - positions[main]),
                                          abs(positions[a])))

    x_f = abs(positions[main] - positions[neighbor])
    lo, hi = sorted((idx[main], idx[neighbor]))
    p_min = float(p[lo:hi + 1].min())
    p_max = float(heights[main])
    visibility = (p_max - p_min) / (p_max + p_min)
    return x_f, visibility, positions


def analyze_marginal(w_lab: WignerField,
                     noise_floor_rel: float = 1.0e-6) -> MarginalAnalysis:
    """Marginal plus metrics; metrics stay None when no fringes resolve."""
    x, density = position_marginal(w_lab)
    out = MarginalAnalysis(x=x, density=density)
    try:
        out.x_f, out.visibility, out.peak_positions = interference_metrics(
            x, density, noise_floor_rel)
    except NoInterferenceError:
        pass
    return out
