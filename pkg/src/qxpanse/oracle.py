"""Independent reference solvers used by tests and the verification suite.

Nothing here shares code with the main pipeline beyond the potential and the
plain point propagator: the wavefunction evolver integrates the Schrodinger
equation spectrally, the moment ODEs integrate the exact quadratic-potential
moment hierarchy, and the stencil reference applies the finite-difference
formulas directly to a field.  Internal units (m = 1, Omega = 1, hbar = 2)
throughout.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .errors import ParameterError, ResolutionError
from .flow import propagate_points
from .grid import PhaseGrid
from .observables import Moments
from .operator import GCoeffs
from .units import HBAR_INTERNAL, Potential


@dataclass
class WaveFunction:
    """Complex amplitudes on a regular position grid."""

    x: np.ndarray
    psi: np.ndarray
    tau: float = 0.0

    @property
    def dx(self) -> float:
        return float(self.x[1] - self.x[0])

    def norm(self) -> float:
        return float(np.sum(np.abs(self.psi) ** 2) * self.dx)

    def momentum_grid(self) -> np.ndarray:
        k = 2.0 * np.pi * np.fft.fftfreq(self.x.size, d=self.dx)
        return HBAR_INTERNAL * k


def gaussian_wavefunction(n_points, x_max, mean_x=0.0, mean_p=0.0,
                          sigma_x=1.0) -> WaveFunction:
    """Minimum-uncertainty packet; sigma_p = 1/sigma_x in zpf units."""
    x = np.linspace(-x_max, x_max, n_points, endpoint=False)
    psi = (2.0 * np.pi * sigma_x**2) ** (-0.25) * np.exp(
        -((x - mean_x) ** 2) / (4.0 * sigma_x**2)
        + 1j * mean_p * x / HBAR_INTERNAL)
    wf = WaveFunction(x=x, psi=psi.astype(np.complex128))
    wf.psi /= np.sqrt(wf.norm())
    return wf


def split_operator_evolve(wf: WaveFunction, potential: Potential, dtau: float,
                          steps: int, tail_tol: float = 1.0e-8) -> WaveFunction:
    """Strang splitting: half potential kick, spectral kinetic step, half kick.

    Unitary to roundoff and second-order accurate in dtau.  Raises
    ResolutionError when spectral mass accumulates in the top octave of
    wavenumbers (aliasing).
    """
    x, dx = wf.x, wf.dx
    m = x.size
    p = wf.momentum_grid()
    # exp(-i H dt / hbar) split with hbar = 2: V half-kicks and p^2/2 drift
    half_kick = np.exp(-1j * 2.0 * potential.value(x) * dtau / (2.0 * HBAR_INTERNAL))
    kinetic = np.exp(-1j * (p**2 / 2.0) * dtau / HBAR_INTERNAL)
    tail = np.abs(p) >= 0.75 * np.abs(p).max()

    psi = wf.psi.copy()
    for _ in range(steps):
        psi *= half_kick
        psi_k = np.fft.fft(psi)
        tail_mass = float(np.sum(np.abs(psi_k[tail]) ** 2)
                          / np.sum(np.abs(psi_k) ** 2))
        if tail_mass > tail_tol:
            raise ResolutionError(
                f"spectral tail holds {tail_mass:.2e} of the wavefunction; "
                "enlarge or refine the oracle grid")
        psi = np.fft.ifft(psi_k * kinetic)
        psi *= half_kick
    return WaveFunction(x=x, psi=psi, tau=wf.tau + steps * dtau)


def wavefunction_moments(wf: WaveFunction) -> Moments:
    """Position/momentum moments straight from psi and its spectrum."""
    x, dx, psi = wf.x, wf.dx, wf.psi
    prob = np.abs(psi) ** 2 * dx
    prob /= prob.sum()
    mean_x = float(prob @ x)
    x2 = float(prob @ x**2)

    psi_k = np.fft.fft(psi)
    p = wf.momentum_grid()
    prob_p = np.abs(psi_k) ** 2
    prob_p /= prob_p.sum()
    mean_p = float(prob_p @ p)
    p2 = float(prob_p @ p**2)

    dpsi = np.fft.ifft(1j * (p / HBAR_INTERNAL) * psi_k)
    p_psi = -1j * HBAR_INTERNAL * dpsi
    xp = np.sum(np.conj(psi) * x * p_psi).real * dx
    return Moments(mean_x=mean_x, mean_p=mean_p, x2=x2, p2=p2,
                   xp_sym=float(2.0 * xp))


def wigner_transform(wf: WaveFunction, x_indices=None):
    """Wigner function of psi, column by column.

    W(x_i, p_l) = (1/pi hbar) * sum_y psi*(x_i+y) psi(x_i-y) e^{2 i p y / hbar} dx
    with y on the psi grid and p_l = pi * hbar * l / (M dx) from the FFT.
    Returns (x_sel, p, W) with W shaped (len(x_sel), M).
    """
    psi, m, dx = wf.psi, wf.x.size, wf.dx
    if x_indices is None:
        x_indices = np.arange(m)
    x_indices = np.asarray(x_indices)

    offsets = np.fft.fftfreq(m, d=1.0 / m).astype(np.int64)  # 0..M/2-1, -M/2..-1
    ia = x_indices[:, None] + offsets[None, :]
    ib = x_indices[:, None] - offsets[None, :]
    valid = (ia >= 0) & (ia < m) & (ib >= 0) & (ib < m)
    corr = np.where(valid, np.conj(psi[np.clip(ia, 0, m - 1)])
                    * psi[np.clip(ib, 0, m - 1)], 0.0)

    w = (m * np.fft.ifft(corr, axis=1)).real * dx / (np.pi * HBAR_INTERNAL)
    p = np.pi * HBAR_INTERNAL * np.fft.fftfreq(m, d=dx)
    order = np.argsort(p)
    return wf.x[x_indices], p[order], w[:, order]


def gaussian_moment_ode(gamma: float, big_gamma: float, potential: Potential,
                        tau_eval, initial=(0.0, 0.0, 1.0, 0.0, 1.0)):
    """Exact moment dynamics for quadratic potentials.

    State vector (mean_u, mean_v, <u^2>, <uv>, <v^2>); the Wigner generator
    closes on these for degree <= 2.  Returns an array (len(tau_eval), 5).
    """
    if not potential.is_quadratic:
        raise ParameterError("moment ODE oracle requires a quadratic potential")
    w1 = 2.0 * potential.c[0]
    w2 = 2.0 * potential.c[1]

    def rhs(_t, y):
        mu, mv, uu, uv, vv = y
        return [
            mv,
            -(w1 + 2.0 * w2 * mu) - gamma * mv,
            2.0 * uv,
            vv - w1 * mu - 2.0 * w2 * uu - gamma * uv,
            -2.0 * w1 * mv - 4.0 * w2 * uv - 2.0 * gamma * vv + 4.0 * big_gamma,
        ]

    tau_eval = np.atleast_1d(np.asarray(tau_eval, dtype=np.float64))
    sol = solve_ivp(rhs, (0.0, float(tau_eval[-1])), list(initial),
                    t_eval=tau_eval, method="DOP853", rtol=1e-11, atol=1e-13)
    return sol.y.T


def classical_ensemble(n_samples, potential: Potential, dtau, n_steps,
                       seed=0, mean=(0.0, 0.0), sigma=(1.0, 1.0)):
    """Monte Carlo moments from sampled trajectories (closed system only).

    Returns (tau, moments, stderr) where moments and stderr have columns
    (<u>, <v>, <u^2>, <v^2>, <{u,v}>).
    """
    rng = np.random.default_rng(seed)
    u = rng.normal(mean[0], sigma[0], n_samples)
    v = rng.normal(mean[1], sigma[1], n_samples)
    taus = np.arange(n_steps + 1) * dtau
    cols = 5
    out = np.empty((n_steps + 1, cols))
    err = np.empty((n_steps + 1, cols))

    def record(row, u, v):
        samples = np.stack([u, v, u * u, v * v, 2.0 * u * v])
        out[row] = samples.mean(axis=1)
        err[row] = samples.std(axis=1, ddof=1) / np.sqrt(n_samples)

    record(0, u, v)
    for step in range(1, n_steps + 1):
        u, v = propagate_points(u, v, potential, dtau, dtau)
        record(step, u, v)
    return taus, out, err


def reference_trajectory(u0, v0, potential: Potential, tau_eval):
    """High-order adaptive (non-symplectic) integration of the point flow."""
    def rhs(_t, y):
        return [y[1], float(potential.force_internal(y[0]))]

    tau_eval = np.atleast_1d(np.asarray(tau_eval, dtype=np.float64))
    t_span = (0.0, float(tau_eval[-1])) if tau_eval[-1] >= 0 else (0.0, float(tau_eval[-1]))
    sol = solve_ivp(rhs, t_span, [float(u0), float(v0)], t_eval=tau_eval,
                    method="DOP853", rtol=1e-12, atol=1e-13)
    return sol.y[0], sol.y[1]


def dense_expm_taylor(a: np.ndarray, t: float = 1.0) -> np.ndarray:
    """exp(a*t) for small dense matrices via extended-precision Taylor.

    Scaling and squaring in long double; independent of both the sparse
    series code and scipy's Pade implementation.
    """
    a = np.asarray(a, dtype=np.longdouble) * np.longdouble(t)
    norm = float(np.linalg.norm(a.astype(np.float64), 1))
    s = max(0, int(np.ceil(np.log2(max(norm, 1e-300)))) + 1) if norm > 0 else 0
    b = a / np.longdouble(2.0**s)
    eye = np.eye(a.shape[0], dtype=np.longdouble)
    result = eye.copy()
    term = eye.copy()
    for k in range(1, 40):
        term = term @ b / np.longdouble(k)
        result = result + term
    for _ in range(s):
        result = result @ result
    return result.astype(np.float64)


def apply_stencils_reference(g: GCoeffs, w: np.ndarray, grid: PhaseGrid) -> np.ndarray:
    """Evaluate the discretized PDE right-hand side term by term.

    Uses the centered-difference formulas directly (periodic rolls), without
    going through the assembled matrix; the two paths must agree to roundoff.
    """
    nx, np_, hx, hp = grid.nx, grid.np_, grid.hx, grid.hp
    w2 = w.reshape(nx, np_)

    def sh(di, dj):
        return np.roll(w2, shift=(-di, -dj), axis=(0, 1))

    d_x = (sh(1, 0) - sh(-1, 0)) / (2 * hx)
    d_p = (sh(0, 1) - sh(0, -1)) / (2 * hp)
    d_xx = (sh(1, 0) + sh(-1, 0) - 2 * w2) / hx**2
    d_pp = (sh(0, 1) + sh(0, -1) - 2 * w2) / hp**2
    d_xp = (sh(1, 1) + sh(-1, -1) - sh(-1, 1) - sh(1, -1)) / (4 * hx * hp)
    d_xxx = (sh(2, 0) - 2 * sh(1, 0) + 2 * sh(-1, 0) - sh(-2, 0)) / (2 * hx**3)
    d_ppp = (sh(0, 2) - 2 * sh(0, 1) + 2 * sh(0, -1) - sh(0, -2)) / (2 * hp**3)
    d_xxp = (sh(1, 1) + sh(-1, 1) - 2 * sh(0, 1)
             + 2 * sh(0, -1) - sh(1, -1) - sh(-1, -1)) / (2 * hx**2 * hp)
    d_xpp = (sh(1, 1) + sh(1, -1) - 2 * sh(1, 0)
             + 2 * sh(-1, 0) - sh(-1, 1) - sh(-1, -1)) / (2 * hx * hp**2)

    shape = (nx, np_)
    rhs = (g.g00.reshape(shape) * w2
           + g.g10.reshape(shape) * d_x + g.g01.reshape(shape) * d_p
           + g.g20.reshape(shape) * d_xx + g.g02.reshape(shape) * d_pp
           + g.g11.reshape(shape) * d_xp
           + g.g30.reshape(shape) * d_xxx + g.g03.reshape(shape) * d_ppp
           + g.g21.reshape(shape) * d_xxp + g.g12.reshape(shape) * d_xpp)
    return rhs.ravel()
