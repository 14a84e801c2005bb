"""Command-line front end.

    photontrap protocol --n 3 --theta "pi/sqrt(10)" --reps 20 --target w1 --out trace.csv
    photontrap trajectories --n 3 --theta "pi/sqrt(10)" --reps 5 --samples 100000 --seed 42
    photontrap spectrum --n 3 --theta 0.7 --p-in 1
    photontrap initialize --n 3 --theta "2*pi/sqrt(10)" --reps 10
    photontrap figure2 --outdir fig
    photontrap verify

Without ``--out`` results go to ``$PHOTONTRAP_OUTPUT_DIR/<command>.<ext>`` when
that variable is set, otherwise to stdout.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from .conditional import conditional_operator, spectrum
from .errors import NumericalError, ParameterError
from .figures import write_figure2
from .protocol import initialize_two_photon, run_conditional
from .report import parse_theta, write_table
from .sector import canonical_state, maximally_mixed, parse_ket
from .trajectories import run_trajectories

OUTPUT_DIR_ENV = "PHOTONTRAP_OUTPUT_DIR"


def _initial_state(text: str | None, n: int):
    if text is None:
        return canonical_state("computational", n, mask=1)
    if text == "mixed":
        return maximally_mixed(n)
    if text.lower() in ("w1", "w2", "phi"):
        return canonical_state(text, n)
    if len(text) != n:
        raise ParameterError(f"initial ket {text!r} must have {n} symbols")
    return canonical_state("computational", n, mask=parse_ket(text))


def _target_state(name: str, n: int, pair: str):
    if name == "singlet":
        i, j = (int(x) for x in pair.split(","))
        return canonical_state("singlet", n, i=i, j=j)
    if name == "vacuum":
        return canonical_state("computational", n, mask=0)
    return canonical_state(name, n)


def _emit(text: str, out: str | None, command: str, ext: str) -> None:
    if out is None and os.environ.get(OUTPUT_DIR_ENV):
        out = str(Path(os.environ[OUTPUT_DIR_ENV]) / f"{command}.{ext}")
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(text)
        print(f"wrote {out}", file=sys.stderr)


def cmd_protocol(args) -> int:
    theta = parse_theta(args.theta)
    trace = run_conditional(
        _initial_state(args.initial, args.n), args.n, theta, args.reps, args.monitor,
        _target_state(args.target, args.n, args.pair),
        per_step_yield=args.yield_mode == "per-step", keep_states=False,
        descriptor={"initial": args.initial or "1" + "0" * (args.n - 1), "target": args.target,
                    "theta_expr": str(args.theta)},
    )
    _emit(write_table(trace, args.format), args.out, "protocol", args.format)
    return 0


def cmd_initialize(args) -> int:
    initial = None if args.initial is None else _initial_state(args.initial, args.n)
    trace = initialize_two_photon(args.n, parse_theta(args.theta), args.reps, initial=initial,
                                  keep_states=False)
    _emit(write_table(trace, args.format), args.out, "initialize", args.format)
    return 0


def cmd_trajectories(args) -> int:
    stats = run_trajectories(
        _initial_state(args.initial, args.n), args.n, parse_theta(args.theta), args.reps,
        args.monitor, args.samples, args.seed, max_restarts=args.max_restarts, backend=args.backend,
    )
    _emit(write_table(stats, args.format), args.out, "trajectories", args.format)
    return 0


def cmd_spectrum(args) -> int:
    p_out = args.p_in if args.p_out is None else args.p_out
    K = conditional_operator(args.n, args.p_in, p_out, parse_theta(args.theta))
    rep = spectrum(K, cluster_tol=args.cluster_tol, unit_tol=args.unit_tol)
    for c in rep.clusters:
        lam = rep.eigenvalues[c[0]]
        print(f"lambda={lam.real:+.10f}{lam.imag:+.10f}j  |lambda|={abs(lam):.10f}  "
              f"multiplicity={len(c)}  excitations={sorted({int(rep.excitations[i]) for i in c})}",
              file=sys.stderr)
    _emit(json.dumps(rep.to_json(), indent=2) + "\n", args.out, "spectrum", "json")
    return 0


def cmd_figure2(args) -> int:
    outdir = args.outdir or os.environ.get(OUTPUT_DIR_ENV) or "figure2"
    res = write_figure2(outdir, args.reps)
    for c in res["curves"]:
        print(f"{c.label}: F_{args.reps}={c.F[-1]:.9f} P_{args.reps}={c.P[-1]:.9f} "
              f"Y_{args.reps}={c.Y[-1]:.3e}")
    for path in res["paths"].values():
        print(f"wrote {path}", file=sys.stderr)
    return 0


def cmd_verify(args) -> int:
    from .verify import run_checks

    checks = run_checks(quick=args.quick, mc_samples=args.samples)
    for c in checks:
        print(c.line())
    failed = [c for c in checks if not c.passed]
    print(f"{len(checks) - len(failed)}/{len(checks)} checks passed")
    return 1 if failed else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="photontrap", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, reps_default=20):
        p.add_argument("--n", type=int, required=True, help="number of emitters")
        p.add_argument("--theta", required=True, help='coupling*tau, e.g. "pi/sqrt(10)"')
        p.add_argument("--reps", type=int, default=reps_default, help="repetitions N")
        p.add_argument("--out", help="output file")

    p = sub.add_parser("protocol", help="exact conditioned states after N rounds")
    common(p)
    p.add_argument("--monitor", type=int, default=1, help="monitored photon count")
    p.add_argument("--initial", help='ket like "100", "w1" or "mixed" (default |10..0>)')
    p.add_argument("--target", choices=["w1", "w2", "phi", "singlet", "vacuum"], default="w1")
    p.add_argument("--pair", default="0,1", help="emitter pair for --target singlet")
    p.add_argument("--yield", dest="yield_mode", choices=["product", "per-step"], default="product")
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.set_defaults(func=cmd_protocol)

    p = sub.add_parser("initialize", help="two-photon monitoring towards the emitter vacuum")
    common(p, reps_default=10)
    p.add_argument("--initial", help="initial state (default maximally mixed)")
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.set_defaults(func=cmd_initialize)

    p = sub.add_parser("trajectories", help="Monte Carlo measure-or-restart ensemble")
    common(p, reps_default=5)
    p.add_argument("--monitor", type=int, default=1)
    p.add_argument("--initial")
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-restarts", type=int, default=10_000)
    p.add_argument("--backend", choices=["numba", "numpy"])
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p.set_defaults(func=cmd_trajectories)

    p = sub.add_parser("spectrum", help="eigen-analysis of <p_out|U|p_in>")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--theta", required=True)
    p.add_argument("--p-in", type=int, default=1)
    p.add_argument("--p-out", type=int)
    p.add_argument("--cluster-tol", type=float, default=1e-8)
    p.add_argument("--unit-tol", type=float, default=1e-8)
    p.add_argument("--out")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("figure2", help="fidelity and yield curves for n = 3, 6, 9")
    p.add_argument("--reps", type=int, default=10)
    p.add_argument("--outdir")
    p.set_defaults(func=cmd_figure2)

    p = sub.add_parser("verify", help="analytic-vs-numeric consistency suite")
    p.add_argument("--quick", action="store_true", help="fewer random angles")
    p.add_argument("--samples", type=int, default=100_000, help="Monte Carlo samples")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ParameterError as exc:
        parser.error(str(exc))
    except (NumericalError, OSError, np.linalg.LinAlgError) as exc:
        print(f"photontrap: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
