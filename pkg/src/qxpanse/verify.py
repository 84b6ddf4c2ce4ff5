"""Self-verification against the independent reference solvers.

Each check prints one pass/fail line; the suite returns the number of
failures.  This is the fast CLI-facing twin of the pytest acceptance suite.
"""

from __future__ import annotations

import numpy as np

from . import oracle
from .grid import PhaseGrid, WignerField
from .inverse import inverse_derivs
from .flow import FlowField, FlowState, backward_point, yoshida_step
from .observables import moments
from .operator import assemble_operator, g_coefficients, GCoeffs
from .run import gaussian_initial
from .stepper import SimulationState, StepperConfig, build_operator, expmv
from .units import DimensionlessParams, Potential


def _report(name, ok, detail):
    print(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
    return 0 if ok else 1


def check_expmv_dense():
    rng = np.random.default_rng(3)
    grid = PhaseGrid.centered(10, 10, 0.3, 0.3)
    g = GCoeffs(*(rng.normal(scale=0.3, size=100) for _ in range(10)))
    op = assemble_operator(grid, g)
    w = rng.normal(size=100)
    got = expmv(op, w, 0.7, 1e-12)
    want = oracle.dense_expm_taylor(op.to_dense(), 0.7) @ w
    err = np.linalg.norm(got - want) / np.linalg.norm(want)
    return _report("expmv vs dense exponential", err < 1e-10, f"rel err {err:.2e}")


def check_operator_equivalence():
    rng = np.random.default_rng(5)
    grid = PhaseGrid.centered(24, 20, 0.17, 0.23)
    g = GCoeffs(*(rng.normal(size=grid.n) for _ in range(10)))
    w = rng.normal(size=grid.n)
    direct = oracle.apply_stencils_reference(g, w, grid)
    via_op = assemble_operator(grid, g).matvec(w)
    scale = np.abs(direct).max()
    err = np.abs(via_op - direct).max() / scale
    return _report("operator application equivalence", err < 1e-12, f"rel err {err:.2e}")


def check_harmonic_closed():
    pot = Potential.harmonic()
    params = DimensionlessParams(gamma=0.0, big_gamma=0.0, potential=pot)
    grid = PhaseGrid.centered(48, 48, 0.25, 0.25)
    sim = SimulationState(params, FlowField(grid, pot), gaussian_initial(grid),
                          StepperConfig(dtau=0.05))
    w0 = sim.wigner.values.copy()
    sim.run_steps(100)
    same = np.array_equal(sim.wigner.values, w0)
    return _report("harmonic closed system is frozen", same,
                   "bit-identical over 100 steps" if same else "values changed")


def check_harmonic_open():
    pot = Potential.harmonic()
    gamma, big_gamma = 0.05, 0.5
    params = DimensionlessParams(gamma=gamma, big_gamma=big_gamma, potential=pot)
    grid = PhaseGrid.centered(128, 128, 0.22, 0.22)
    sim = SimulationState(params, FlowField(grid, pot), gaussian_initial(grid),
                          StepperConfig(dtau=0.05))
    sim.run_steps(100)  # to Omega*t = 5
    m = moments(sim.wigner, sim.flow)
    ref = oracle.gaussian_moment_ode(gamma, big_gamma, pot, [5.0])[-1]
    errs = [abs(m.x2 / ref[2] - 1), abs(m.xp_sym / (2 * ref[3]) - 1),
            abs(m.p2 / ref[4] - 1)]
    worst = max(errs)
    return _report("harmonic open system vs moment ODEs", worst < 5e-3,
                   f"worst moment err {worst:.2e}")


def check_inverse_map():
    eta = 10.0
    pot = Potential.quartic(eta)
    st = FlowState.initial(1.3, -0.7)
    tau, n = 1.0, 200
    for _ in range(n):
        st = yoshida_step(st, pot, tau / n)

    class _One:
        grid = type("G", (), {"n": 1})()

    f = _One()
    f.xb, f.pb = st.to_blocks()
    inv = inverse_derivs(f)
    eps = 1e-3
    uf, vf = st.x, st.p

    def back(dv):
        u, v = backward_point(np.array([uf]), np.array([vf + dv]), pot, tau, tau / n)
        return u[0]

    x2_fd = (back(eps) + back(-eps) - 2 * back(0.0)) / eps**2
    err = abs(inv.x2[0] - x2_fd) / max(abs(x2_fd), 1e-12)
    return _report("inverse-map second derivative vs finite difference",
                   err < 1e-3, f"rel err {err:.2e}")


def check_quartic_oracle(fast=False):
    eta = 5.0
    s_end = 0.6 if fast else 1.12
    pot = Potential.quartic(eta)
    params = DimensionlessParams(gamma=0.0, big_gamma=0.0, potential=pot)
    grid = PhaseGrid.centered(256, 160, 24.0 / 256, 10.0 / 160)
    sim = SimulationState(params, FlowField(grid, pot), gaussian_initial(grid),
                          StepperConfig(dtau=0.05))
    while sim.tau < s_end * eta - 1e-9:
        sim.advance()
    m = moments(sim.wigner, sim.flow)
    wf = oracle.gaussian_wavefunction(8192, 3.0 * eta)
    wf = oracle.split_operator_evolve(wf, pot, 0.002,
                                      int(round(s_end * eta / 0.002)))
    ref = oracle.wavefunction_moments(wf)
    errs = [abs(m.x2 / ref.x2 - 1), abs(m.p2 / ref.p2 - 1)]
    worst = max(errs)
    return _report(f"quartic eta=5 vs wavefunction oracle (s={s_end})",
                   worst < 1e-2, f"worst second-moment err {worst:.2e}")


def run_suite(fast=False) -> int:
    failures = 0
    failures += check_operator_equivalence()
    failures += check_expmv_dense()
    failures += check_inverse_map()
    failures += check_harmonic_closed()
    failures += check_harmonic_open()
    failures += check_quartic_oracle(fast=fast)
    print("verification:", "all checks passed" if failures == 0
          else f"{failures} check(s) FAILED")
    return failures
