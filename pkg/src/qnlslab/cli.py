"""Command-line interface binding all lab pipelines.

Every subcommand assembles an ExperimentConfig and hands it to the runner,
so CLI invocations and config-file runs produce identical artifacts.
"""

from __future__ import annotations

import argparse
import json
import sys

import yaml

from .recipes import ExperimentConfig, recipe, recipe_is_slow, recipe_names
from .runner import run


def _add_out(p):
    p.add_argument("--out", help="output directory (default: $QNLSLAB_OUT/<name>)")
    p.add_argument("--name", default="", help="run name")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="qnlslab",
        description="Numerical laboratory for u_t = e^{i theta}(u_xx + u^2) "
                    "on the torus: simulation, manifold hunting, invariant-"
                    "manifold charts, and self-similar blowup analysis.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="integrate one initial condition")
    p.add_argument("--initial", required=True,
                   help="cos:AMP[,OFF] | exp:AMP[,MODE] | const:C | file:BASE")
    p.add_argument("--theta", default="0", help="rotation angle (e.g. pi/2)")
    p.add_argument("--modes", type=int, default=256)
    p.add_argument("--dt", type=float, default=1e-4)
    p.add_argument("--tend", type=float, default=1.0)
    p.add_argument("--period", type=float, default=1.0)
    p.add_argument("--record-stride", type=int, default=100)
    p.add_argument("--snapshot-stride", type=int)
    p.add_argument("--trapping", action="store_true",
                   help="record trapping status along the run")
    p.add_argument("--stop-on-trapping", action="store_true")
    _add_out(p)

    p = sub.add_parser("galerkin", help="integrate an N-mode truncation")
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--theta", default="0")
    p.add_argument("--init", required=True,
                   help="values:a0,a1,... | sigma:s1,s2,... (chart point)")
    p.add_argument("--order", type=int, default=20,
                   help="chart order when init is sigma:")
    p.add_argument("--dt", type=float, default=1e-3)
    p.add_argument("--tend", type=float, default=100.0)
    p.add_argument("--record-stride", type=int, default=10)
    _add_out(p)

    p = sub.add_parser("hunt", help="manifold bisection / parameter sweeps")
    hsub = p.add_subparsers(dest="hunt_command", required=True)
    b = hsub.add_parser("bisect", help="bisect the heat-flow fate boundary")
    b.add_argument("--family", required=True, help="e.g. cos:30")
    b.add_argument("--range", required=True, help="lo:hi")
    b.add_argument("--tol", type=float, required=True)
    b.add_argument("--modes", type=int, default=256)
    b.add_argument("--dt", type=float, default=1e-4)
    b.add_argument("--tmax", type=float, default=5.0)
    b.add_argument("--doublings", type=int, default=4)
    _add_out(b)
    s = hsub.add_parser("sweep", help="sweep the additive parameter")
    s.add_argument("--family", required=True)
    s.add_argument("--A", required=True, help="lo:hi:step")
    s.add_argument("--theta", default="pi/2")
    s.add_argument("--modes", type=int, default=256)
    s.add_argument("--dt", type=float, default=1e-4)
    s.add_argument("--tend", type=float, default=1.0)
    s.add_argument("--record-stride", type=int, default=10)
    _add_out(s)

    p = sub.add_parser("manifold", help="invariant-manifold charts")
    msub = p.add_subparsers(dest="manifold_command", required=True)
    b = msub.add_parser("build", help="solve the chart to a given order")
    b.add_argument("--N", type=int, required=True)
    b.add_argument("--order", type=int, default=20)
    _add_out(b)
    e = msub.add_parser("eval", help="evaluate a saved chart")
    e.add_argument("--model", required=True)
    e.add_argument("--sigma", required=True, help="s1,s2,...")
    r = msub.add_parser("resonances", help="list eigenvalue resonances")
    r.add_argument("--N", type=int, required=True)
    r.add_argument("--order", type=int, default=20)

    p = sub.add_parser("selfsim", help="blowup-rate fits and rescaled frames")
    ssub = p.add_subparsers(dest="selfsim_command", required=True)
    f = ssub.add_parser("fit", help="power-law fit of the inverse sup norm")
    f.add_argument("--series", required=True, help="series.csv path")
    f.add_argument("--window", required=True, help="t0:t1")
    _add_out(f)
    fr = ssub.add_parser("frames", help="self-similar frames from a run dir")
    fr.add_argument("--run", required=True, help="simulate output directory")
    fr.add_argument("--window", required=True, help="fit window t0:t1")
    fr.add_argument("--alpha", type=float, required=True)
    fr.add_argument("--beta", type=float)
    fr.add_argument("--xi", type=float, default=0.0)
    _add_out(fr)

    p = sub.add_parser("run", help="run a YAML experiment config")
    p.add_argument("config", help="config file path")
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                   help="override a config field (dotted path)")
    p.add_argument("--out")

    p = sub.add_parser("recipe", help="named preset experiments")
    p.add_argument("name", nargs="?", help="recipe to run (omit to list)")
    p.add_argument("--scale", type=float, default=1.0,
                   help="shrink modes / grow dt for smoke tests")
    p.add_argument("--show", action="store_true", help="print config only")
    _add_out(p)

    return ap


def _config_from_args(args) -> ExperimentConfig:
    cmd = args.command
    if cmd == "simulate":
        params = dict(initial=args.initial, theta=args.theta, modes=args.modes,
                      dt=args.dt, t_end=args.tend, period=args.period,
                      record_stride=args.record_stride)
        if args.snapshot_stride:
            params["snapshot_stride"] = args.snapshot_stride
        if args.trapping:
            params["trapping"] = True
        if args.stop_on_trapping:
            params["trapping"] = True
            params["stop_on_trapping"] = True
        return ExperimentConfig("simulate", args.name, params,
                                output_dir=args.out)
    if cmd == "galerkin":
        return ExperimentConfig("galerkin", args.name, dict(
            N=args.N, theta=args.theta, init=args.init, order=args.order,
            dt=args.dt, t_end=args.tend, record_stride=args.record_stride),
            output_dir=args.out)
    if cmd == "hunt" and args.hunt_command == "bisect":
        return ExperimentConfig("bisect", args.name, dict(
            family=args.family, range=args.range, tol=args.tol,
            modes=args.modes, dt=args.dt, t_max=args.tmax,
            doublings=args.doublings), output_dir=args.out)
    if cmd == "hunt" and args.hunt_command == "sweep":
        return ExperimentConfig("sweep", args.name, dict(
            family=args.family, A=args.A, theta=args.theta, modes=args.modes,
            dt=args.dt, t_end=args.tend, record_stride=args.record_stride),
            output_dir=args.out)
    if cmd == "selfsim" and args.selfsim_command == "fit":
        return ExperimentConfig("selfsim", args.name, dict(
            series=args.series, window=args.window), output_dir=args.out)
    if cmd == "selfsim" and args.selfsim_command == "frames":
        params = dict(run=args.run, window=args.window, alpha=args.alpha,
                      xi=args.xi)
        if args.beta is not None:
            params["beta"] = args.beta
        return ExperimentConfig("selfsim", args.name, params,
                                output_dir=args.out)
    raise SystemExit(2)


def _parse_override(item: str):
    key, _, value = item.partition("=")
    if not _:
        raise SystemExit(f"--set expects KEY=VALUE, got {item!r}")
    try:
        value = yaml.safe_load(value)
    except yaml.YAMLError:
        pass
    return key, value


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)

    if args.command == "manifold":
        from .galerkin import GalerkinSystem
        from .manifold import (detect_resonances, evaluate_W, load_model,
                               solve_cohomological)
        if args.manifold_command == "build":
            cfg = ExperimentConfig("manifold", args.name or "manifold",
                                   dict(N=args.N, order=args.order),
                                   output_dir=args.out)
            meta = run(cfg)
            print(json.dumps(meta["summary"], indent=1))
            return 0
        if args.manifold_command == "eval":
            model = load_model(args.model)
            sigma = [complex(x) for x in args.sigma.split(",")]
            w = evaluate_W(model, sigma)
            for i, v in enumerate(w):
                print(f"a_{i} = {v.real:+.17g} {v.imag:+.17g}j")
            return 0
        if args.manifold_command == "resonances":
            res = detect_resonances([-(j * j) for j in range(1, args.N + 1)],
                                    args.order)
            for k, i in res.entries:
                print(f"k = {k}  ->  lambda_{i}")
            print(f"{len(res.entries)} resonances through order {args.order}")
            return 0

    if args.command == "run":
        with open(args.config) as fh:
            cfg = ExperimentConfig.from_yaml(fh.read())
        for item in args.set:
            cfg.override(*_parse_override(item))
        if args.out:
            cfg.output_dir = args.out
        meta = run(cfg)
        print(json.dumps(meta["summary"], indent=1))
        return 0

    if args.command == "recipe":
        if not args.name:
            for n in recipe_names():
                slow = "  [slow]" if recipe_is_slow(n) else ""
                print(f"{n}{slow}")
            return 0
        cfg = recipe(args.name, scale=args.scale)
        if args.out:
            cfg.output_dir = args.out
        if args.name and args.show:
            print(cfg.to_yaml(), end="")
            return 0
        meta = run(cfg)
        print(json.dumps(meta["summary"], indent=1))
        return 0

    cfg = _config_from_args(args)
    meta = run(cfg)
    print(json.dumps(meta["summary"], indent=1))
    return 0


if __name__ == "__main__":
    sys.exit(main())
