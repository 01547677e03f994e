"""
Command line entry point.

    vortint run CONFIG [--out DIR]
    vortint suite paper-acceptance [--quick] [--only NAME ...]
    vortint flows list
    vortint residual FLOW [--samples N] [--seed S]
    vortint validate CONFIG

Exit codes: 0 success, 1 a check or criterion failed, 2 invalid config,
3 runtime error.
"""
from __future__ import annotations

import argparse
import json
import sys

from .errors import ConfigError

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2, 3


def _cmd_run(args) -> int:
    from .config import load
    from .harness import DRIFT_FLOOR, run

    cfg = load(args.config)
    result = run(cfg, out_dir=args.out)
    for rep in result.reports:
        verdict = "PASS" if rep.passed else "FAIL"
        zero = " (zero-valued: judged by drift_abs)" if abs(rep.series[0].value) < DRIFT_FLOOR else ""
        orders = " ".join(f"order_{k}={v.order:.3f}" for k, v in rep.convergence_orders.items())
        print(f"[{verdict}] {rep.kind}: value_t0={rep.series[0].value:.12g} drift_abs={rep.drift_abs:.3e} "
              f"drift_rel={rep.drift_rel:.3e} flux_balance_err={rep.flux_balance_err:.3e} {orders}".rstrip() + zero)
    for path in result.files:
        print(f"wrote {path}")
    return EXIT_OK if result.passed else EXIT_FAIL


def _cmd_validate(args) -> int:
    from .config import load

    cfg = load(args.config)
    print(f"{args.config}: ok ({cfg.name})")
    return EXIT_OK


def _cmd_suite(args) -> int:
    from .acceptance import SUITE, run_suite

    if args.only:
        unknown = [n for n in args.only if n not in SUITE]
        if unknown:
            raise ConfigError("--only", f"unknown criteria {unknown}; known: {', '.join(SUITE)}")
    rows = run_suite(quick=args.quick, only=args.only, echo=print)
    failed = [r.name for r in rows if not r.passed]
    print(f"{len(rows) - len(failed)}/{len(rows)} criteria passed" + (f"; failed: {', '.join(failed)}" if failed else ""))
    return EXIT_FAIL if failed else EXIT_OK


def _cmd_flows(args) -> int:
    from . import flows

    for name in sorted(flows.CATALOG):
        f = flows.make_flow(name)
        print(f"{name:<20} dim={f.dim} isentropic={f.isentropic} incompressible={f.incompressible} "
              f"steady={f.steady}")
    print(f"{'spectral2d':<20} dim=2 isentropic=True incompressible=True steady=False")
    return EXIT_OK


def _cmd_residual(args) -> int:
    from . import flows

    if args.flow == "spectral2d":
        from .spectral import SpectralSolver, as_flow_field

        sol = SpectralSolver(args.N)
        flow = as_flow_field(sol.run(sol.random(seed=args.seed), 0.5, 2.5e-3))
        res = flows.max_residuals(flow, count=args.samples, seed=args.seed, t_range=(0.0, 0.5))
    else:
        try:
            flow = flows.make_flow(args.flow)
        except KeyError as exc:
            raise ConfigError("flow", str(exc.args[0])) from None
        res = flows.max_residuals(flow, count=args.samples, seed=args.seed)
    print(json.dumps(res, indent=2, sort_keys=True))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="vortint", description="Conserved vorticity integrals of ideal flows.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run an experiment config")
    p.add_argument("config")
    p.add_argument("--out", default=None, help="output directory (default: config output.dir or $VORTINT_OUT)")
    p.set_defaults(fn=_cmd_run)

    p = sub.add_parser("validate", help="validate an experiment config")
    p.add_argument("config")
    p.set_defaults(fn=_cmd_validate)

    p = sub.add_parser("suite", help="run a built-in suite")
    p.add_argument("suite", choices=["paper-acceptance"])
    p.add_argument("--quick", action="store_true", help="reduced resolutions")
    p.add_argument("--only", nargs="+", default=None, metavar="NAME")
    p.set_defaults(fn=_cmd_suite)

    p = sub.add_parser("flows", help="list built-in flows")
    p.add_argument("action", choices=["list"])
    p.set_defaults(fn=_cmd_flows)

    p = sub.add_parser("residual", help="max Euler residuals of a flow at random samples")
    p.add_argument("flow")
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--N", type=int, default=64, help="grid size for spectral2d")
    p.set_defaults(fn=_cmd_residual)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
