"""Run configuration: flat key = value text files, diff-friendly for sweeps.

Unknown keys are rejected; every value round-trips exactly through
``serialize`` / ``parse``.  Environment variables QXPANSE_<KEY> override file
values (same key names, upper-cased).
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field, fields

from .errors import ConfigError
from .grid import PhaseGrid
from .units import Potential

ENV_PREFIX = "QXPANSE_"


@dataclass
class RunConfig:
    """Everything a run needs, in zero-point units."""

    # potential: "harmonic", "quartic" (with eta), or "poly" with c1..c4
    potential: str = "quartic"
    eta: float = 10.0
    c1: float = 0.0
    c2: float = 0.0
    c3: float = 0.0
    c4: float = 0.0

    gamma: float = 0.0        # damping rate / Omega
    noise_rate: float = 0.0   # displacement noise rate / Omega
    mode: str = "quantum"     # "quantum" or "classical"

    # grid (spacings in zpf units, center in zpf units)
    nx: int = 256
    np: int = 128
    hx: float = 0.1
    hp: float = 0.0625
    center_x: float = 0.0
    center_p: float = 0.0

    # initial Gaussian state
    mean_x: float = 0.0
    mean_p: float = 0.0
    sigma_x: float = 1.0
    sigma_p: float = 1.0

    # stepper
    dtau: float = 0.05
    t_final: float = 15.6
    flow_substeps: int = 10
    expmv_tol: float = 1.0e-8
    eval_point: str = "start"
    edge_taper_cells: int = 8
    sponge_strength: float = 1.0
    filter_alpha: float = 100.0
    filter_exponent: int = 24

    # outputs
    output_every: int = 5       # time-series cadence, in steps
    snapshot_every: int = 0     # 0: only final snapshot
    frame: str = "both"         # snapshot frames: liouville | lab | both
    out_dir: str = "runs/out"

    # lab-frame resampling target (used for lab snapshots and analysis)
    resample_nx: int = 1024
    resample_np: int = 160
    resample_hx: float = 0.0    # 0: auto (covers +-1.5 eta)
    resample_hp: float = 0.0    # 0: auto (matches source extent)
    resample_substeps: int = 1  # backward steps per dtau (1: step = dtau)

    def validate(self):
        if self.potential not in ("harmonic", "quartic", "poly"):
            raise ConfigError(f"unknown potential kind {self.potential!r}")
        if self.mode not in ("quantum", "classical"):
            raise ConfigError(f"unknown mode {self.mode!r}")
        if self.frame not in ("liouville", "lab", "both"):
            raise ConfigError(f"unknown frame {self.frame!r}")
        if self.nx < 8 or self.np < 8:
            raise ConfigError("grid must be at least 8x8")
        if self.hx <= 0 or self.hp <= 0:
            raise ConfigError("grid spacings must be positive")
        if self.sigma_x <= 0 or self.sigma_p <= 0:
            raise ConfigError("initial widths must be positive")
        if self.t_final <= 0 or self.dtau <= 0:
            raise ConfigError("times must be positive")
        return self

    def make_potential(self) -> Potential:
        if self.potential == "harmonic":
            return Potential.harmonic()
        if self.potential == "quartic":
            return Potential.quartic(self.eta)
        return Potential(self.c1, self.c2, self.c3, self.c4)

    def make_grid(self) -> PhaseGrid:
        return PhaseGrid.centered(self.nx, self.np, self.hx, self.hp,
                                  (self.center_x, self.center_p))

    def resample_grid(self, source: PhaseGrid) -> PhaseGrid:
        hx = self.resample_hx
        if hx == 0.0:
            scale = self.eta if self.potential == "quartic" else 1.0
            hx = 3.0 * scale / self.resample_nx
        hp = self.resample_hp
        if hp == 0.0:
            hp = source.np_ * source.hp / self.resample_np
        return PhaseGrid.centered(self.resample_nx, self.resample_np, hx, hp,
                                  (self.center_x, self.center_p))


_FIELDS = {f.name: f.type for f in fields(RunConfig)}


def _convert(name, raw):
    kind = _FIELDS[name]
    try:
        if kind == "int":
            return int(raw)
        if kind == "float":
            return float(raw)
    except ValueError as exc:
        raise ConfigError(f"bad value for {name}: {raw!r}") from exc
    return raw


def parse(text: str, apply_env: bool = True) -> RunConfig:
    """Parse flat ``key = value`` lines; '#' starts a comment."""
    cfg = RunConfig()
    for lineno, line in enumerate(text.splitlines(), 1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, raw = (part.strip() for part in body.split("=", 1))
        if key not in _FIELDS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        setattr(cfg, key, _convert(key, raw))
    if apply_env:
        for key in _FIELDS:
            env = os.environ.get(ENV_PREFIX + key.upper())
            if env is not None:
                setattr(cfg, key, _convert(key, env))
    return cfg.validate()


def serialize(cfg: RunConfig) -> str:
    lines = []
    for f in fields(RunConfig):
        value = getattr(cfg, f.name)
        if isinstance(value, float):
            lines.append(f"{f.name} = {value!r}")
        else:
            lines.append(f"{f.name} = {value}")
    return "\n".join(lines) + "\n"


def load(path, apply_env: bool = True) -> RunConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse(fh.read(), apply_env=apply_env)


def save(cfg: RunConfig, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(serialize(cfg))
