import numpy as np
import pytest

from qxpanse import (DivergedTrajectoryError, FlowField, FlowState, PhaseGrid,
                     Potential, backward_point, hierarchy_rhs, yoshida_step)
from qxpanse.flow import propagate_points
from qxpanse.oracle import reference_trajectory


def small_grid(n=12, h=0.4):
    return PhaseGrid.centered(n, n, h, h)


def test_initial_conditions():
    field = FlowField(small_grid(), Potential.harmonic())
    state = field.state(5)
    assert state.x_dx == 1.0 and state.p_dp == 1.0
    assert state.x_dp == 0.0 and state.p_dx == 0.0
    assert state.x_dxx == state.p_dppp == 0.0


def test_free_particle_drift_exact():
    pot = Potential()
    u, v = propagate_points(np.array([1.0]), np.array([0.5]), pot, 2.0, 0.25)
    assert u[0] == pytest.approx(2.0, abs=1e-13)
    assert v[0] == pytest.approx(0.5, abs=1e-15)


def test_free_particle_kicks_vanish():
    xb, pb = FlowState.initial(1.0, 2.0).to_blocks()
    dx, dp = hierarchy_rhs(xb, pb, Potential())
    assert np.all(dp == 0.0)
    assert np.array_equal(dx, pb)


def test_harmonic_kick_structure():
    # kick of dp/dp0 is -(m Omega^2) dx/dp0 in internal units (= -dx/dp0)
    st = FlowState.initial(0.3, -0.2)
    st.x_dp = 0.7
    xb, pb = st.to_blocks()
    _, dp = hierarchy_rhs(xb, pb, Potential.harmonic())
    assert dp[2, 0] == pytest.approx(-0.7)
    # quadratic potential: no W''' contributions anywhere
    st2 = FlowState.initial(0.3, -0.2)
    st2.x_dx, st2.x_dxx = 2.0, 3.0
    xb2, pb2 = st2.to_blocks()
    _, dp2 = hierarchy_rhs(xb2, pb2, Potential.harmonic())
    assert dp2[3, 0] == pytest.approx(-3.0)  # only -W'' * x_dxx survives


def test_quartic_second_order_kick_value():
    # d/dt (d2p/dx0^2) includes -W'''(x) (dx/dx0)^2 with W''' = 2*6u/eta^4
    st = FlowState.initial(1.0, 0.0)
    xb, pb = st.to_blocks()
    _, dp = hierarchy_rhs(xb, pb, Potential.quartic(1.0))
    assert dp[3, 0] == pytest.approx(-12.0)  # x_dx = 1, x_dxx = 0


def test_harmonic_quarter_period():
    pot = Potential.harmonic()
    state = FlowState.initial(1.0, 0.0)
    n = 400
    for _ in range(n):
        state = yoshida_step(state, pot, (np.pi / 2) / n)
    assert state.x == pytest.approx(0.0, abs=1e-9)
    assert state.p == pytest.approx(-1.0, abs=1e-9)


def test_harmonic_variational_rotation():
    grid = small_grid()
    field = FlowField(grid, Potential.harmonic())
    tau = 1.3
    field.advance(tau, 200)
    jac = field.jacobian()
    ref = np.array([[np.cos(tau), np.sin(tau)], [-np.sin(tau), np.cos(tau)]])
    assert np.abs(jac - ref).max() < 1e-8


def test_quartic_vs_reference_integrator():
    pot = Potential.quartic(1.0)
    u0, v0 = 1.0, 0.0
    # quartic orbit period: T = 4*eta^2*K4/A with K4 = int dy/sqrt(1-y^4)
    from scipy.special import gamma as gamma_fn
    k4 = gamma_fn(0.25) * gamma_fn(0.5) / (4 * gamma_fn(0.75))
    period = 4.0 * k4 / u0
    u_ref, v_ref = reference_trajectory(u0, v0, pot, [period])
    u, v = propagate_points(np.array([u0]), np.array([v0]), pot, period, period / 4000)
    assert abs(u[0] - u_ref[-1]) < 1e-8
    assert abs(u[0] - u0) < 1e-6  # returns to start after one period


def test_forward_backward_round_trip():
    pot = Potential.quartic(10.0)
    rng = np.random.default_rng(1)
    u0 = rng.normal(size=50)
    v0 = rng.normal(size=50)
    tau = 3.0
    u1, v1 = propagate_points(u0, v0, pot, tau, 0.01)
    u2, v2 = backward_point(u1, v1, pot, tau, 0.01)
    assert np.abs(u2 - u0).max() < 1e-8
    assert np.abs(v2 - v0).max() < 1e-8


def test_backward_quartic_vs_reference():
    pot = Potential.quartic(10.0)
    u1, v1 = backward_point(np.array([1.7]), np.array([-0.4]), pot, 2.0, 0.002)
    def rhs(_t, y):
        return [-y[1], -float(pot.force_internal(y[0]))]
    from scipy.integrate import solve_ivp
    sol = solve_ivp(rhs, (0, 2.0), [1.7, -0.4], method="DOP853",
                    rtol=1e-12, atol=1e-13)
    assert abs(u1[0] - sol.y[0, -1]) < 1e-8
    assert abs(v1[0] - sol.y[1, -1]) < 1e-8


def test_symplectic_determinant_long_run():
    grid = PhaseGrid.centered(8, 8, 0.7, 0.7)
    field = FlowField(grid, Potential.quartic(1.0))
    for _ in range(100):
        field.advance(0.5, 100)  # 10^4 steps total
    jac = field.jacobian()
    det = jac[:, 0, 0] * jac[:, 1, 1] - jac[:, 0, 1] * jac[:, 1, 0]
    assert np.abs(det - 1.0).max() < 1e-9


def test_energy_bounded_long_run():
    pot = Potential.quartic(1.0)
    state = FlowState.initial(1.1, 0.3)
    xb, pb = state.to_blocks()
    from qxpanse.flow import yoshida_step_blocks
    energies = []
    for k in range(100000):
        yoshida_step_blocks(xb, pb, pot, 0.01)
        if k % 5000 == 0:
            energies.append(0.5 * pb[0, 0]**2 + 2.0 * pot.value(xb[0, 0]))
    energies = np.array(energies)
    drift = np.abs(energies - energies[0]).max() / energies[0]
    assert drift < 1e-6  # oscillatory error only, no secular growth


@pytest.mark.parametrize("eta", [1.0, 10.0])
def test_variational_derivatives_vs_finite_differences(eta):
    pot = Potential.quartic(eta)
    rng = np.random.default_rng(42)
    tau, nstep = 1.0, 400
    eps = 1e-5

    def evolve(u0, v0):
        u, v = propagate_points(np.array([u0]), np.array([v0]), pot, tau, tau / nstep)
        return u[0], v[0]

    for _ in range(10):
        u0, v0 = rng.normal(scale=1.5, size=2)
        st = FlowState.initial(u0, v0)
        for _ in range(nstep):
            st = yoshida_step(st, pot, tau / nstep)
        xp_p = evolve(u0, v0 + eps)
        xp_m = evolve(u0, v0 - eps)
        xx_p = evolve(u0 + eps, v0)
        xx_m = evolve(u0 - eps, v0)
        fd_x_dp = (xp_p[0] - xp_m[0]) / (2 * eps)
        fd_p_dp = (xp_p[1] - xp_m[1]) / (2 * eps)
        fd_x_dx = (xx_p[0] - xx_m[0]) / (2 * eps)
        fd_p_dx = (xx_p[1] - xx_m[1]) / (2 * eps)
        assert st.x_dp == pytest.approx(fd_x_dp, rel=1e-4, abs=1e-7)
        assert st.p_dp == pytest.approx(fd_p_dp, rel=1e-4, abs=1e-7)
        assert st.x_dx == pytest.approx(fd_x_dx, rel=1e-4, abs=1e-7)
        assert st.p_dx == pytest.approx(fd_p_dx, rel=1e-4, abs=1e-7)


def test_second_derivatives_vs_finite_differences():
    pot = Potential.quartic(1.0)
    tau, nstep = 0.8, 400
    u0, v0 = 0.9, -0.4
    st = FlowState.initial(u0, v0)
    for _ in range(nstep):
        st = yoshida_step(st, pot, tau / nstep)
    eps = 1e-4

    def x_of(u, v):
        return propagate_points(np.array([u]), np.array([v]), pot, tau, tau / nstep)[0][0]

    fd_xpp = (x_of(u0, v0 + eps) + x_of(u0, v0 - eps) - 2 * x_of(u0, v0)) / eps**2
    fd_xxp = (x_of(u0 + eps, v0 + eps) - x_of(u0 + eps, v0 - eps)
              - x_of(u0 - eps, v0 + eps) + x_of(u0 - eps, v0 - eps)) / (4 * eps**2)
    assert st.x_dpp == pytest.approx(fd_xpp, rel=1e-3, abs=1e-6)
    assert st.x_dxp == pytest.approx(fd_xxp, rel=1e-3, abs=1e-6)


def test_mixed_derivative_label_symmetry():
    # the hierarchy treats d2/dx0 dp0 and d2/dp0 dx0 as one component; its
    # RHS must be symmetric under swapping the roles of the first-order inputs
    pot = Potential.quartic(2.0)
    st = FlowState.initial(0.5, 0.2)
    st.x_dx, st.x_dp = 1.3, -0.4
    xb, pb = st.to_blocks()
    _, dp = hierarchy_rhs(xb, pb, pot)
    u3 = 2.0 * pot.derivs(st.x)[1]
    w3 = 2.0 * pot.derivs(st.x)[2]
    expected = -(w3 * st.x_dx * st.x_dp + u3 * st.x_dxp)
    assert dp[4, 0] == pytest.approx(expected, rel=1e-14)


def test_divergence_detection():
    grid = PhaseGrid.centered(8, 8, 1.0, 1.0)
    field = FlowField(grid, Potential(c4=1.0))  # strong quartic
    with pytest.raises(DivergedTrajectoryError):
        field.advance(50.0, 2)  # absurd step blows up


def test_zero_steps_is_identity():
    grid = small_grid()
    field = FlowField(grid, Potential.quartic(5.0))
    xb0 = field.xb.copy()
    # no advance call: field untouched
    assert np.array_equal(field.xb, xb0)
    assert field.tau == 0.0
