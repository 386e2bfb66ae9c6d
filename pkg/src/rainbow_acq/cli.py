"""Command-line entry point: ``rainbow-acq {design,gain-profile,single-sat,multi-sat}``."""

from __future__ import annotations

import argparse
import math
import sys

import numpy as np

from . import harness
from .beamformer import gain_loss_approx, gain_loss_exact, rainbow_design
from .errors import RainbowError
from .estimators import Method
from .geometry import SystemConfig, alpha

CONFIG_HELP = """\
config file: UTF-8 lines of key=value, '#' starts a comment.
  system keys : f_c f_p f_s [Hz], a_sat r_E [m], v_sat [m/s or none], c [m/s],
                beta [rad], N L M [count], seed [int]
  experiment  : trials [count], snr_grid_db [dB list], n_ts_grid [count list],
                angles_deg [deg list], snr_db [dB], master_seed [int],
                methods [fft,mle,music], pad_factor [count], n_grid [count]
Lists are comma separated. Unknown keys are errors.
"""


def _methods(value: str) -> tuple[Method, ...]:
    if value == "all":
        return harness.ONE_SHOT_METHODS
    return (Method(value),)


def _int_list(value: str) -> tuple[int, ...]:
    return tuple(int(v) for v in value.split(",") if v.strip())


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key=value configuration file (see top-level --help)")
    common.add_argument("--seed", type=int, help="master seed (overrides config)")
    common.add_argument("--method", choices=["fft", "mle", "music", "all"], help="estimator(s) to run")
    common.add_argument("--workers", type=int, default=1, help="worker processes for Monte Carlo trials")

    parser = argparse.ArgumentParser(
        prog="rainbow-acq",
        description="One-shot LEO satellite acquisition with Doppler-aware rainbow beamforming.",
        epilog=CONFIG_HELP,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("design", parents=[common], help="print the rainbow beamformer and its gain loss")

    p = sub.add_parser("gain-profile", parents=[common], help="BF gain versus angle (CSV)")
    p.add_argument("--out", help="CSV path (default: stdout)")
    p.add_argument("--points", type=int, default=1001)

    p = sub.add_parser("single-sat", parents=[common], help="one-shot RMSE versus SNR (CSV)")
    p.add_argument("--snr-min", type=float)
    p.add_argument("--snr-max", type=float)
    p.add_argument("--snr-step", type=float, default=5.0)
    p.add_argument("--trials", type=int)
    p.add_argument("--out")

    p = sub.add_parser("multi-sat", parents=[common], help="total-error RMSE versus slot budget (CSV)")
    p.add_argument("--nts", type=_int_list, help="comma-separated slot counts, e.g. 1,2,4,...,1024")
    p.add_argument("--trials", type=int)
    p.add_argument("--snr", type=float, help="effective per-satellite SNR in dB")
    p.add_argument("--out")
    return parser


def _emit(rows, out):
    if out:
        harness.write_csv(rows, out)
    else:
        sys.stdout.write(harness.format_csv(rows))


def _spec(args, experiment: dict, factory) -> harness.ExperimentSpec:
    if args.seed is not None:
        experiment["master_seed"] = args.seed
    if args.method:
        experiment["methods"] = _methods(args.method)
    if getattr(args, "trials", None) is not None:
        experiment["trials"] = args.trials
    return factory(**experiment)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        system, experiment = harness.load_config(args.config) if args.config else ({}, {})
        experiment.pop("kind", None)
        cfg = SystemConfig(**system)

        if args.command == "design":
            d = rainbow_design(cfg)
            edge = cfg.fov_edge
            print(f"alpha            = {alpha(cfg):.6e} Hz")
            print(f"max |f_D|        = {alpha(cfg) * math.sin(edge):.6e} Hz")
            print(f"tau*             = {d.tau:.6e} s")
            print(f"phi* (mod 2pi)   = {d.phi:.6f} rad")
            print(f"worst loss exact = {float(gain_loss_exact(edge, cfg, d)):.5e}")
            print(f"worst loss approx= {float(gain_loss_approx(edge, cfg)):.5e}")
            print(f"max BF gain      = {cfg.N}")
        elif args.command == "gain-profile":
            _emit(harness.run_gain_profile(cfg, args.points), args.out)
        elif args.command == "single-sat":
            if args.snr_min is not None or args.snr_max is not None:
                lo = args.snr_min if args.snr_min is not None else -10.0
                hi = args.snr_max if args.snr_max is not None else 30.0
                grid = np.arange(lo, hi + args.snr_step / 2, args.snr_step)
                experiment["snr_grid_db"] = tuple(float(s) for s in grid)
            spec = _spec(args, experiment, harness.ExperimentSpec)
            _emit(harness.run_single_sat(spec, cfg, workers=args.workers), args.out)
        elif args.command == "multi-sat":
            if args.nts:
                experiment["n_ts_grid"] = args.nts
            if args.snr is not None:
                experiment["snr_db"] = args.snr
            spec = _spec(args, experiment, harness.ExperimentSpec.multi_sat)
            _emit(harness.run_multi_sat(spec, cfg, workers=args.workers), args.out)
    except (RainbowError, OSError, ValueError) as exc:
        print(f"rainbow-acq: error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
