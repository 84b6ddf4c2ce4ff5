"""Run orchestration: initial state, main loop, outputs, and analysis."""

from __future__ import annotations

import os
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import fileio
from .config import RunConfig, save as save_config
from .errors import ConfigError, NoInterferenceError, ParameterError
from .flow import FlowField
from .grid import FRAME_LAB, FRAME_LIOUVILLE, PhaseGrid, WignerField
from .observables import (analyze_marginal, grid_density, moments,
                          resample_lab_frame)
from .stepper import SimulationState, StepperConfig
from .units import DimensionlessParams


def gaussian_initial(grid: PhaseGrid, means=(0.0, 0.0), widths=(1.0, 1.0)) -> WignerField:
    """Normalized Gaussian Wigner function in zero-point units.

    Width product must respect the uncertainty floor sigma_u * sigma_v >= 1
    (i.e. sigma_x * sigma_p >= hbar/2).
    """
    su, sv = widths
    if su <= 0 or sv <= 0:
        raise ParameterError("widths must be positive")
    if su * sv < 1.0 - 1e-9:
        raise ParameterError(
            f"sigma_x*sigma_p = {su * sv:.6g} zpf^2 is below the uncertainty floor 1")
    u, v = grid.points()
    vals = np.exp(-0.5 * ((u - means[0]) / su) ** 2
                  - 0.5 * ((v - means[1]) / sv) ** 2) / (2.0 * np.pi * su * sv)
    w = WignerField(grid, vals)
    norm = w.norm()
    if abs(norm - 1.0) > 1e-6:
        warnings.warn(
            f"initial state discrete norm {norm:.8f} deviates from 1; "
            "grid may be too small or too coarse", RuntimeWarning, stacklevel=2)
    return w


@dataclass
class RunResult:
    config: RunConfig
    wigner: WignerField
    flow: FlowField
    series: dict
    report: dict
    out_dir: str = None
    lab_field: WignerField = None


def _record(series, sim, eta_scale):
    m = moments(sim.wigner, sim.flow)
    lam = grid_density(sim.flow).lam_min
    series["t_omega"].append(sim.tau)
    series["mean_x_zpf"].append(m.mean_x)
    series["mean_p_zpf"].append(m.mean_p)
    series["x2_zpf2"].append(m.x2)
    series["p2_zpf2"].append(m.p2)
    series["xp_sym_hbar"].append(m.xp_sym_hbar)
    series["norm"].append(sim.wigner.norm())
    series["lambda_min"].append(lam)


def _snapshot(sim, cfg, out_dir, step, lab_cache):
    tag = f"{step:06d}"
    if cfg.frame in ("liouville", "both"):
        fileio.write_snapshot(sim.wigner, os.path.join(out_dir, f"snap_liouville_{tag}.qxwf"))
    if cfg.frame in ("lab", "both"):
        target = cfg.resample_grid(sim.wigner.grid)
        dt_back = cfg.dtau / max(1, cfg.resample_substeps)
        lab = resample_lab_frame(sim.wigner, cfg.make_potential(), target, dt_back)
        fileio.write_snapshot(lab, os.path.join(out_dir, f"snap_lab_{tag}.qxwf"))
        lab_cache["last"] = lab
    fileio.write_grid_points(sim.flow.x, sim.flow.p,
                             os.path.join(out_dir, f"grid_points_{tag}.csv"))


def run(cfg: RunConfig, out_dir=None) -> RunResult:
    """Execute a configured run and write its outputs.

    Returns the in-memory result; the written report is identical to what
    :func:`analyze` recomputes from the stored files.
    """
    cfg.validate()
    out_dir = out_dir or cfg.out_dir
    os.makedirs(out_dir, exist_ok=True)
    save_config(cfg, os.path.join(out_dir, "config.txt"))

    potential = cfg.make_potential()
    params = DimensionlessParams(gamma=cfg.gamma, big_gamma=cfg.noise_rate,
                                 potential=potential,
                                 classical=cfg.mode == "classical")
    grid = cfg.make_grid()
    flow = FlowField(grid, potential)
    wigner = gaussian_initial(grid, (cfg.mean_x, cfg.mean_p),
                              (cfg.sigma_x, cfg.sigma_p))
    stepcfg = StepperConfig(
        dtau=cfg.dtau, flow_substeps=cfg.flow_substeps,
        expmv_tol=cfg.expmv_tol, eval_point=cfg.eval_point,
        edge_taper_cells=cfg.edge_taper_cells,
        sponge_strength=cfg.sponge_strength,
        filter_alpha=cfg.filter_alpha, filter_exponent=cfg.filter_exponent)
    sim = SimulationState(params, flow, wigner, stepcfg)

    n_steps = int(round(cfg.t_final / cfg.dtau))
    series = {name: [] for name in fileio.TIMESERIES_COLUMNS}
    eta_scale = cfg.eta if cfg.potential == "quartic" else 1.0
    _record(series, sim, eta_scale)
    lab_cache = {"last": None}

    for step in range(1, n_steps + 1):
        sim.advance()
        if step % cfg.output_every == 0 or step == n_steps:
            _record(series, sim, eta_scale)
        if (cfg.snapshot_every and step % cfg.snapshot_every == 0) or step == n_steps:
            _snapshot(sim, cfg, out_dir, step, lab_cache)

    with fileio.TimeSeriesWriter(os.path.join(out_dir, "timeseries.csv")) as tsw:
        for row in zip(*(series[c] for c in fileio.TIMESERIES_COLUMNS)):
            tsw.add(*row)

    series = {k: np.asarray(v) for k, v in series.items()}
    report = summarize_series(series, eta_scale)
    report["boundary_warnings"] = sim.boundary_warnings
    if lab_cache["last"] is not None:
        report.update(marginal_report(lab_cache["last"]))
    fileio.write_report(report, os.path.join(out_dir, "report.txt"))
    return RunResult(config=cfg, wigner=sim.wigner, flow=sim.flow,
                     series=series, report=report, out_dir=out_dir,
                     lab_field=lab_cache["last"])


def summarize_series(series: dict, eta_scale: float) -> dict:
    """Headline numbers from a recorded time series."""
    t = series["t_omega"]
    sx_scaled = np.sqrt(np.maximum(series["x2_zpf2"], 0.0)) / eta_scale
    i_max = int(np.argmax(sx_scaled))
    xp_hbar = series["xp_sym_hbar"]
    i_cov = int(np.argmin(xp_hbar))
    norm = series["norm"]
    return {
        "eta_scale": eta_scale,
        "max_sx_over_eta": float(sx_scaled[i_max]),
        "t_max_sx": float(t[i_max]),
        "s_max_sx": float(t[i_max] / eta_scale),
        "cov_min_hbar": float(xp_hbar[i_cov]),
        "cov_min_over_eta": float(xp_hbar[i_cov] / eta_scale),
        "cov_min_over_2eta": float(xp_hbar[i_cov] / (2.0 * eta_scale)),
        "t_cov_min": float(t[i_cov]),
        "s_cov_min": float(t[i_cov] / eta_scale),
        "lambda_min_run": float(np.min(series["lambda_min"])),
        "norm_initial": float(norm[0]),
        "norm_final": float(norm[-1]),
        "norm_drift_max": float(np.max(np.abs(norm - norm[0]))),
    }


def marginal_report(lab: WignerField) -> dict:
    """Interference metrics of a lab-frame field, tolerant of no fringes."""
    analysis = analyze_marginal(lab)
    w2 = lab.values.reshape(lab.grid.nx, lab.grid.np_)
    out = {
        "lab_tau": float(lab.tau),
        "lab_min_over_max": float(w2.min() / w2.max()) if w2.max() > 0 else 0.0,
        "marginal_norm": float(np.trapezoid(analysis.density, analysis.x)),
    }
    if analysis.x_f is not None:
        out["x_f_zpf"] = float(analysis.x_f)
        out["visibility"] = float(analysis.visibility)
        out["interference"] = "yes"
    else:
        out["interference"] = "no"
    return out


def analyze(path) -> dict:
    """Recompute the analysis report from stored outputs.

    ``path`` may be a run directory (uses its timeseries and the latest
    lab-frame snapshot) or a single lab-frame snapshot file.
    """
    if os.path.isdir(path):
        report = {}
        ts_path = os.path.join(path, "timeseries.csv")
        if os.path.exists(ts_path):
            series = fileio.read_timeseries(ts_path)
            cfg_path = os.path.join(path, "config.txt")
            eta_scale = 1.0
            if os.path.exists(cfg_path):
                from .config import load
                cfg = load(cfg_path, apply_env=False)
                if cfg.potential == "quartic":
                    eta_scale = cfg.eta
            report.update(summarize_series(series, eta_scale))
        labs = sorted(name for name in os.listdir(path)
                      if name.startswith("snap_lab_") and name.endswith(".qxwf"))
        if labs:
            lab = fileio.read_snapshot(os.path.join(path, labs[-1]))
            report.update(marginal_report(lab))
        if not report:
            raise ConfigError(f"{path}: no analyzable outputs found")
        return report

    lab = fileio.read_snapshot(path)
    if lab.frame != FRAME_LAB:
        raise ConfigError(
            f"{path} holds a {lab.frame}-frame field; marginal analysis needs "
            "a lab-frame snapshot")
    return marginal_report(lab)
