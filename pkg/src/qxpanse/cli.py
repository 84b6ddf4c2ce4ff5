"""Command line interface: run, analyze, sweep, verify, dump-operator."""

from __future__ import annotations

import argparse
import os
import sys

from . import config as config_mod
from .errors import QxpanseError


def _apply_threads(n):
    if n is None:
        return
    os.environ.setdefault("OMP_NUM_THREADS", str(n))
    try:
        import threadpoolctl
        threadpoolctl.threadpool_limits(n)
    except ImportError:
        pass  # element-wise kernels are single-threaded anyway


def _cmd_run(args):
    cfg = config_mod.load(args.config)
    if args.out:
        cfg.out_dir = args.out
    if args.snapshot_every is not None:
        cfg.snapshot_every = args.snapshot_every
    if args.frame:
        cfg.frame = args.frame
    if args.classical:
        cfg.mode = "classical"
    cfg.validate()
    _apply_threads(args.threads)
    from .run import run
    result = run(cfg)
    for key, value in result.report.items():
        print(f"{key} = {value}")
    print(f"outputs written to {result.out_dir}")
    return 0


def _cmd_analyze(args):
    from .run import analyze
    report = analyze(args.path)
    for key, value in report.items():
        print(f"{key} = {value}")
    if args.out:
        from . import fileio
        fileio.write_report(report, args.out)
    return 0


def _cmd_sweep(args):
    cfg = config_mod.load(args.config)
    etas = [float(v) for v in args.eta.split(",")] if args.eta else [cfg.eta]
    noises = ([float(v) for v in args.noise.split(",")]
              if args.noise else [cfg.noise_rate])
    os.makedirs(args.out, exist_ok=True)
    manifest = []
    for eta in etas:
        for noise in noises:
            item = config_mod.RunConfig(**vars(cfg))
            item.eta = eta
            item.noise_rate = noise
            name = f"eta{eta:g}_noise{noise:g}"
            item.out_dir = os.path.join(args.out, name)
            path = os.path.join(args.out, f"{name}.cfg")
            config_mod.save(item, path)
            manifest.append(path)
    with open(os.path.join(args.out, "sweep_manifest.txt"), "w",
              encoding="utf-8") as fh:
        fh.write("\n".join(manifest) + "\n")
    print(f"wrote {len(manifest)} config(s) to {args.out}")
    return 0


def _cmd_verify(args):
    _apply_threads(args.threads)
    from .verify import run_suite
    return 1 if run_suite(fast=args.fast) else 0


def _cmd_dump_operator(args):
    import numpy as np
    cfg = config_mod.load(args.config)
    potential = cfg.make_potential()
    from .flow import FlowField
    from .stepper import build_operator
    from .units import DimensionlessParams
    params = DimensionlessParams(gamma=cfg.gamma, big_gamma=cfg.noise_rate,
                                 potential=potential,
                                 classical=cfg.mode == "classical")
    flow = FlowField(cfg.make_grid(), potential)
    if args.tau > 0:
        n = max(1, int(round(args.tau / (cfg.dtau / cfg.flow_substeps))))
        flow.advance(args.tau, n)
    op = build_operator(flow, params, cfg.edge_taper_cells, cfg.sponge_strength)
    rows, cols, vals = op.to_coo()
    with open(args.out, "w", encoding="utf-8") as fh:
        for r, c, v in zip(rows, cols, vals):
            fh.write(f"{r} {c} {v!r}\n")
    print(f"wrote {len(vals)} entries to {args.out}")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="qxpanse",
        description="Wigner-function dynamics in a co-moving phase-space frame")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute a configured simulation")
    p_run.add_argument("--config", required=True)
    p_run.add_argument("--out", help="output directory (overrides config)")
    p_run.add_argument("--threads", type=int)
    p_run.add_argument("--snapshot-every", type=int, dest="snapshot_every")
    p_run.add_argument("--frame", choices=["liouville", "lab", "both"])
    p_run.add_argument("--classical", action="store_true",
                       help="drop the quantum term (hbar -> 0 limit)")
    p_run.set_defaults(func=_cmd_run)

    p_an = sub.add_parser("analyze", help="recompute metrics from stored outputs")
    p_an.add_argument("path", help="run directory or lab-frame snapshot file")
    p_an.add_argument("--out", help="also write the report to this path")
    p_an.set_defaults(func=_cmd_analyze)

    p_sw = sub.add_parser("sweep", help="emit config files for parameter sweeps")
    p_sw.add_argument("--config", required=True, help="base config")
    p_sw.add_argument("--eta", help="comma-separated quartic strengths")
    p_sw.add_argument("--noise", help="comma-separated noise rates (units of Omega)")
    p_sw.add_argument("--out", required=True)
    p_sw.set_defaults(func=_cmd_sweep)

    p_ve = sub.add_parser("verify", help="run the oracle self-check suite")
    p_ve.add_argument("--fast", action="store_true")
    p_ve.add_argument("--threads", type=int)
    p_ve.set_defaults(func=_cmd_verify)

    p_du = sub.add_parser("dump-operator", help="dump D(tau) as row col value text")
    p_du.add_argument("--config", required=True)
    p_du.add_argument("--tau", type=float, default=0.0)
    p_du.add_argument("--out", required=True)
    p_du.set_defaults(func=_cmd_dump_operator)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except QxpanseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
