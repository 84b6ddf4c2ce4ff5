"""On-disk formats: binary Wigner snapshots, CSV time series, text reports.

Snapshot layout (little-endian):

    bytes 0-3    magic "QXWF"
    bytes 4-7    format version (uint32, currently 1)
    bytes 8-11   N_x (uint32)
    bytes 12-15  N_p (uint32)
    byte  16     frame tag (0 = Liouville frame, 1 = lab frame)
    bytes 17-56  five float64: x0/x_zpf, p0/p_zpf, hx/x_zpf, hp/p_zpf, Omega*t
    bytes 57-    N_x * N_p float64 values, flat index k = i*N_p + j

Every writer is deterministic: identical inputs yield identical bytes.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .errors import FormatError
from .grid import FRAME_LAB, FRAME_LIOUVILLE, PhaseGrid, WignerField

MAGIC = b"QXWF"
VERSION = 1
_HEADER = struct.Struct("<4sIII" + "B" + "5d")

_FRAME_TAGS = {FRAME_LIOUVILLE: 0, FRAME_LAB: 1}
_TAG_FRAMES = {v: k for k, v in _FRAME_TAGS.items()}


def write_snapshot(field: WignerField, path):
    grid = field.grid
    header = _HEADER.pack(MAGIC, VERSION, grid.nx, grid.np_,
                          _FRAME_TAGS[field.frame],
                          grid.x0, grid.p0, grid.hx, grid.hp, field.tau)
    payload = np.ascontiguousarray(field.values, dtype="<f8").tobytes()
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(payload)


def read_snapshot(path) -> WignerField:
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < _HEADER.size:
        raise FormatError(f"{path}: truncated header ({len(raw)} bytes)", offset=0)
    magic, version, nx, np_, tag, x0, p0, hx, hp, tau = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise FormatError(f"{path}: bad magic {magic!r}", offset=0)
    if version != VERSION:
        raise FormatError(f"{path}: unsupported version {version}", offset=4)
    if tag not in _TAG_FRAMES:
        raise FormatError(f"{path}: unknown frame tag {tag}", offset=16)
    expect = _HEADER.size + 8 * nx * np_
    if len(raw) != expect:
        raise FormatError(
            f"{path}: payload length {len(raw) - _HEADER.size} does not match "
            f"header dims {nx}x{np_}", offset=_HEADER.size)
    values = np.frombuffer(raw, dtype="<f8", offset=_HEADER.size).copy()
    grid = PhaseGrid(nx, np_, hx, hp, x0, p0)
    return WignerField(grid, values, tau=tau, frame=_TAG_FRAMES[tag])


TIMESERIES_COLUMNS = ("t_omega", "mean_x_zpf", "mean_p_zpf", "x2_zpf2",
                      "p2_zpf2", "xp_sym_hbar", "norm", "lambda_min")


class TimeSeriesWriter:
    """Appends comma-separated rows with a fixed header."""

    def __init__(self, path):
        self.path = path
        self._fh = open(path, "w", encoding="utf-8")
        self._fh.write(",".join(TIMESERIES_COLUMNS) + "\n")
        self._last_t = None

    def add(self, t_omega, mean_x, mean_p, x2, p2, xp_sym_hbar, norm, lambda_min):
        if self._last_t is not None and t_omega <= self._last_t:
            raise FormatError("time series rows must be strictly increasing in time")
        self._last_t = t_omega
        row = (t_omega, mean_x, mean_p, x2, p2, xp_sym_hbar, norm, lambda_min)
        self._fh.write(",".join(repr(float(v)) for v in row) + "\n")

    def close(self):
        self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def read_timeseries(path) -> dict:
    """Columns as a dict of arrays, validated against the fixed header."""
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
        if tuple(header) != TIMESERIES_COLUMNS:
            raise FormatError(f"{path}: unexpected columns {header}")
        data = np.loadtxt(fh, delimiter=",", ndmin=2)
    if data.size == 0:
        raise FormatError(f"{path}: no data rows")
    t = data[:, 0]
    if np.any(np.diff(t) <= 0):
        raise FormatError(f"{path}: t_omega not strictly increasing")
    return {name: data[:, i] for i, name in enumerate(TIMESERIES_COLUMNS)}


def write_grid_points(flow_x, flow_p, path):
    """Forward-mapped grid point coordinates (Fig.-1-style overlay data)."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("x_zpf,p_zpf\n")
        for x, p in zip(flow_x, flow_p):
            fh.write(f"{x!r},{p!r}\n")


def write_report(entries: dict, path):
    """Flat key = value report, same grammar as config files."""
    with open(path, "w", encoding="utf-8") as fh:
        for key, value in entries.items():
            if isinstance(value, float):
                fh.write(f"{key} = {value!r}\n")
            else:
                fh.write(f"{key} = {value}\n")


def read_report(path) -> dict:
    out = {}
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            body = line.split("#", 1)[0].strip()
            if not body:
                continue
            key, raw = (part.strip() for part in body.split("=", 1))
            try:
                out[key] = float(raw)
            except ValueError:
                out[key] = raw
    return out
