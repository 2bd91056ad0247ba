"""Command line interface.

Subcommands: ``fit`` (regression on a force CSV), ``allocate`` (one-shot
force demand to actuator commands), ``run`` (scenario execution),
``scale`` (nondimensional scaling report), ``dump-config`` (print a
scenario configuration as JSON). Usage errors exit with status 2, runtime
failures with 1.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import forces
from .allocation import (
    ActuatorCommand,
    ActuatorLayout,
    build_z,
    limits_preset,
    saturate_forces,
    to_physical,
)
from .errors import TwindockError
from .harness import config_to_dict, emit_trace, load_config, run_scenario
from .scenarios import SCENARIO_NAMES, builtin_config


def _model_from(path):
    samples = forces.load_samples(path) if path else forces.builtin_samples()
    return forces.FullForceModel(rudder=forces.fit_rudder_model(samples))


def _cmd_fit(args) -> int:
    model = _model_from(args.force_data).rudder
    v = model.v_tilde
    print("slope matrix (N/deg):")
    print(f"  [{v[0, 0]: .6f}  {v[0, 1]: .6f}]")
    print(f"  [{v[1, 0]: .6f}  {v[1, 1]: .6f}]")
    print(f"intercept (N):      [{model.f_itcp[0]: .6f}  {model.f_itcp[1]: .6f}]")
    print(f"hover angle (deg):  [{model.hover_angle[0]: .4f}  {model.hover_angle[1]: .4f}]")
    return 0


def _cmd_allocate(args) -> int:
    model = _model_from(args.force_data)
    allocator = build_z(ActuatorLayout(), model)
    f_req, flags = saturate_forces([args.x_req, args.y_req, args.n_req])
    u = allocator.allocate(f_req)
    hover = model.rudder.hover_angle
    previous = ActuatorCommand(hover[0], hover[1], 0.0)
    cmd = to_physical(u, model, limits_preset("positioning"), previous, dt=10.0)
    if flags.any():
        print(f"demand clipped to saturation box: {f_req.as_array()}")
    print(f"modified command: delta_p~={u[0]:.4f} deg  delta_s~={u[1]:.4f} deg  n_b~={u[2]:.4f}")
    print(f"physical command: delta_p={cmd.delta_p:.4f} deg  delta_s={cmd.delta_s:.4f} deg  "
          f"n_b={cmd.n_b:.4f} rps")
    return 0


def _cmd_run(args) -> int:
    if args.config:
        cfg = load_config(args.config)
    else:
        cfg = builtin_config(args.scenario)
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.path:
        overrides["waypoints"] = np.loadtxt(args.path, ndmin=2)
    if args.force_data:
        overrides["force_data"] = args.force_data
    if overrides:
        from dataclasses import replace

        cfg = replace(cfg, **overrides)
    result = run_scenario(cfg)
    if args.out:
        emit_trace(result.records, args.out)
        print(f"trace written to {args.out} ({len(result.records)} records)")
    for key, value in result.metrics.as_dict().items():
        print(f"{key}: {value}")
    return 0


def _cmd_scale(args) -> int:
    model = _model_from(args.force_data)
    if args.factor is not None:
        scaled = forces.scale_model(model, args.factor)
        print(f"scale factor: {args.factor}")
        print(f"scaled slope matrix (N/deg):\n{scaled.rudder.v_tilde}")
        print(f"scaled bow coefficient (N s^2): {scaled.bow.c_b:.6g}")
        print(f"hover angle (deg, unchanged): {scaled.rudder.hover_angle}")
        return 0
    params = forces.ScalingParams(
        rho=args.rho, a_r=args.a_r, k_x=args.k_x, c_1=args.c_1,
        mu=args.mu, d_p=args.d_p, n=args.n,
    )
    u_r = forces.inflow_velocity(params)
    scale = forces.dynamic_pressure_scale(params)
    print(f"rudder inflow velocity (m/s): {u_r:.6g}")
    print(f"dynamic pressure scale (N):   {scale:.6g}")
    print("nondimensional slope matrix (1/deg):")
    print(model.rudder.v_tilde / scale)
    return 0


def _cmd_dump_config(args) -> int:
    cfg = builtin_config(args.scenario)
    print(json.dumps(config_to_dict(cfg), indent=2))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="twindock",
        description="Twin-rudder ship positioning: force model, allocation and docking scenarios.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_fit = sub.add_parser("fit", help="fit the rudder force model and print its coefficients")
    p_fit.add_argument("--force-data", help="CSV of force samples (default: embedded dataset)")
    p_fit.set_defaults(func=_cmd_fit)

    p_alloc = sub.add_parser("allocate", help="map one force demand to actuator commands")
    p_alloc.add_argument("x_req", type=float, help="surge force demand (N)")
    p_alloc.add_argument("y_req", type=float, help="sway force demand (N)")
    p_alloc.add_argument("n_req", type=float, help="yaw moment demand (N m)")
    p_alloc.add_argument("--force-data")
    p_alloc.set_defaults(func=_cmd_allocate)

    p_run = sub.add_parser("run", help="run a docking/position-keeping scenario")
    p_run.add_argument("--scenario", choices=SCENARIO_NAMES, default="a")
    p_run.add_argument("--config", help="scenario configuration JSON (overrides --scenario)")
    p_run.add_argument("--seed", type=int, help="disturbance seed override")
    p_run.add_argument("--out", help="write the trace CSV here")
    p_run.add_argument("--path", help="waypoint table override (columns: x0_m y0_m psi_rad)")
    p_run.add_argument("--force-data")
    p_run.set_defaults(func=_cmd_run)

    p_scale = sub.add_parser("scale", help="nondimensional scaling report or scaled model")
    p_scale.add_argument("--factor", type=float, help="print the model scaled by this factor")
    for flag, help_text in (
        ("--rho", "water density (kg/m^3)"),
        ("--a-r", "rudder sectional area (m^2)"),
        ("--k-x", "inflow acceleration coefficient"),
        ("--c-1", "thrust-coefficient regression intercept"),
        ("--mu", "propeller diameter to rudder height ratio"),
        ("--d-p", "propeller diameter (m)"),
        ("--n", "propeller revolution (rps)"),
    ):
        p_scale.add_argument(flag, type=float, help=help_text)
    p_scale.add_argument("--force-data")
    p_scale.set_defaults(func=_cmd_scale)

    p_dump = sub.add_parser("dump-config", help="print a built-in scenario configuration as JSON")
    p_dump.add_argument("--scenario", choices=SCENARIO_NAMES, default="a")
    p_dump.set_defaults(func=_cmd_dump_config)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "scale" and args.factor is None:
        required = ("rho", "a_r", "k_x", "c_1", "mu", "d_p", "n")
        missing = [name for name in required if getattr(args, name) is None]
        if missing:
            parser.error(f"scale needs --factor or all of: {', '.join('--' + m.replace('_', '-') for m in missing)}")
    try:
        return args.func(args)
    except (TwindockError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
