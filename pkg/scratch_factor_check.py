"""Scratch: decide the cubic-term prefactor by cross-checking the oracle.

Runs the co-moving solver for a quartic well (eta=5) with the derived
coefficient q = -(1/3) U''' (internal units) and with the doubled variant,
and compares moments and the final position marginal against the
split-operator wavefunction.
"""

import time

import numpy as np

import qxpanse as qx
from qxpanse import oracle
from qxpanse.inverse import inverse_derivs
from qxpanse.operator import assemble_operator, boundary_mass_fraction, g_coefficients
from qxpanse.stepper import StepperConfig, expmv


def gaussian_field(grid):
    u, v = grid.points()
    vals = np.exp(-0.5 * (u**2 + v**2)) / (2 * np.pi)
    return qx.WignerField(grid, vals)


def run_solver(eta, tau_final, dtau, grid, quantum_scale):
    pot = qx.Potential.quartic(eta)
    params = qx.DimensionlessParams(gamma=0.0, big_gamma=0.0, potential=pot)
    flow = qx.FlowField(grid, pot)
    w = gaussian_field(grid)
    cfg = StepperConfig(dtau=dtau, flow_substeps=5, expmv_tol=1e-7)
    n_steps = int(round(tau_final / dtau))
    t0 = time.time()
    for step in range(n_steps):
        inv = inverse_derivs(flow)
        g = g_coefficients(flow, inv, params)
        for name in ("g10", "g01", "g20", "g02", "g11", "g30", "g03", "g21", "g12"):
            setattr(g, name, getattr(g, name) * quantum_scale)
        op = assemble_operator(grid, g)
        w.values = expmv(op, w.values, dtau, cfg.expmv_tol, cfg.term_cap)
        w.tau += dtau
        flow.advance(dtau, cfg.flow_substeps)
        if step % 40 == 0:
            print(f"    step {step}: norm={w.norm():.6f} "
                  f"onenorm={op.one_norm():.2e} max|W|={np.abs(w.values).max():.3f}")
    print(f"  solver done in {time.time()-t0:.1f}s, norm={w.norm():.6f}, "
          f"boundary={boundary_mass_fraction(w.values, grid):.2e}")
    return w, flow


def main():
    eta = 5.0
    tau_final = 1.56 * eta
    dtau = 0.05
    grid = qx.PhaseGrid.centered(512, 128, 36.0 / 512, 11.0 / 128)

    pot = qx.Potential.quartic(eta)
    wf = oracle.gaussian_wavefunction(8192, 3.0 * eta)
    t0 = time.time()
    wf = oracle.split_operator_evolve(wf, pot, 0.002, int(round(tau_final / 0.002)))
    prob = np.abs(wf.psi) ** 2
    m = oracle.wavefunction_moments(wf)
    print(f"oracle done in {time.time()-t0:.0f}s, norm={wf.norm():.9f}")
    print(f"oracle moments: x2={m.x2:.4f} p2={m.p2:.4f} xp={m.xp_sym:.4f}")

    for scale, label in ((1.0, "derived q=-(1/3)U'''"), (2.0, "doubled (printed table)")):
        print(f"== {label}")
        w, flow = run_solver(eta, tau_final, dtau, grid, scale)
        mom = qx.moments(w, flow)
        print(f"  moments: x2={mom.x2:.4f} p2={mom.p2:.4f} xp={mom.xp_sym:.4f}")
        target = qx.PhaseGrid.centered(768, 128, 2.0 * 1.6 * eta / 768, 12.0 / 128)
        lab = qx.resample_lab_frame(w, pot, target, dtau)
        x, dens = qx.position_marginal(lab)
        ref = np.interp(x, wf.x, prob)
        l1 = np.trapezoid(np.abs(dens - ref), x) / np.trapezoid(np.abs(ref), x)
        print(f"  marginal L1 vs oracle: {l1:.4f}")
        try:
            xf, vis, _ = qx.interference_metrics(x, dens)
            print(f"  x_f={xf:.3f} visibility={vis:.3f}")
        except qx.NoInterferenceError as exc:
            print("  no fringes:", exc)

    xf_o, vis_o, _ = qx.interference_metrics(wf.x, prob)
    print(f"oracle x_f={xf_o:.3f} visibility={vis_o:.3f}  (2.11*eta^(1/3)={2.11*eta**(1/3):.3f})")


if __name__ == "__main__":
    main()
