"""Command-line front end.

Exit codes: 0 success, 2 invalid input, 3 I/O failure. Reports go to
stdout and diagnostics to stderr.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import bipartite, serialize, sweep, witnesses
from .qlinalg import ValidationError
from .scenario import AOM, NOM, Scenario, matching_nom_scenario, post_measurement_state, probability_table

EXIT_OK, EXIT_INVALID, EXIT_IO = 0, 2, 3
DEMOS = ("wfs", "theorem1", "bipartite")  # theorem1: AoM table reproduced under NoM

SWEEP_EPILOG = """\
CSV columns: witness,value,bound,violated,seed
  witness   T, Tq (uniform q for d > 2 in a T sweep) or PS
  value     witness value, full float precision
  bound     its AoM bound
  violated  true when value > bound + 1e-9
  seed      per-sample reproducer for sweep.sample_row, or "analytic"
            for the injected construction in row 1
The summary (max, margin, violations, defects) is printed as JSON.
Default thread count comes from WFS_THREADS; output does not depend on it.
"""

REGION_EPILOG = """\
CSV columns: P0,P1,mode,seed
  mode  aom | nom | classical | boundary_p1_eq_p0 | boundary_p1_eq_3/2-p0 |
        boundary_tsirelson | boundary_aom
  seed  per-sample seed, "analytic", "deterministic" or empty for curves
"""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        sys.exit(EXIT_INVALID)


def _write(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def cmd_eval(args) -> int:
    scenario = serialize.load(args.scenario)
    if isinstance(scenario, bipartite.BipartiteScenario):
        if args.witness not in (None, "PS"):
            raise ValidationError(f"witness {args.witness} needs a single-party scenario")
        report = bipartite.eval_bipartite(scenario, seed=args.seed)
    else:
        witness = args.witness or "T"
        if witness == "T":
            report = witnesses.eval_T(scenario, args.op, seed=args.seed)
        elif witness == "Tq":
            q = args.q if args.q is not None else witnesses.natural_q(scenario)
            report = witnesses.eval_Tq(scenario, args.op, q, seed=args.seed)
        else:
            raise ValidationError("PS needs a bipartite scenario")
    print(report.to_json())
    return EXIT_OK


def cmd_sweep(args) -> int:
    report = sweep.bound_falsification_sweep(
        args.witness,
        args.mode,
        args.samples,
        args.seed,
        channel=args.channel,
        dims=args.dims,
        threads=args.threads,
        inject=not args.no_inject,
    )
    _write(report.to_csv(), args.out)
    stream = sys.stdout if args.out else sys.stderr
    print(report.summary_json(), file=stream)
    return EXIT_OK


def cmd_region(args) -> int:
    points = bipartite.feasible_region_sweep(args.resolution, args.seed)
    _write(bipartite.region_csv(points), args.out)
    return EXIT_OK


def cmd_optimize(args) -> int:
    from .optimize import maximize_witness

    result = maximize_witness(
        args.witness, args.mode, args.d, args.budget, args.seed, q=args.q, max_evals=args.max_evals
    )
    print(result.to_json())
    return EXIT_OK


def _fmt(v) -> str:
    return np.array2string(np.asarray(v), precision=6, suppress_small=True, separator=", ")


def _demo_wfs() -> None:
    for mode in (AOM, NOM):
        s = witnesses.worked_example(mode)
        state = post_measurement_state(s.psi, 0, s)
        print(f"[{mode}] state of system + Lab after the Friend measures:")
        if state.kind == "pure":
            f = s.sector_bases[0]
            print(f"  pure, amplitudes on (F+, F-) = {_fmt(f.conj().T @ state.vector)}")
        else:
            f = s.sector_bases[0]
            print(f"  mixture, weights on (F+, F-) = {_fmt(np.einsum('ji,jk,ki->i', f.conj(), state.rho, f).real)}")
        table = probability_table(s)[0]
        print(f"  p(.|1) = {_fmt(table[0])}   p(.|U) = {_fmt(table[1])}")
        print(f"  T = {witnesses.eval_T(s).value:.9f}  (AoM bound 0.5)")
    print("Wigner predicts outcome + with certainty; the Friend's collapse gives 1/2 for each.")


def _demo_theorem1() -> None:
    from .sampling import random_scenario

    s = random_scenario(0, d=3, n=2, m=3, dynamics=AOM)
    nom = matching_nom_scenario(s)
    a, b = probability_table(s), probability_table(nom)
    print("AoM scenario: d=3, n=2, m=3 (seed 0)")
    for x in range(s.n):
        for w in range(s.m):
            print(f"  x={x} w={w}  AoM p = {_fmt(a[x, w])}  matching NoM p = {_fmt(b[x, w])}")
    print(f"max deviation = {np.max(np.abs(a - b)):.3e}")


def _demo_bipartite() -> None:
    bs = bipartite.nom_violating_strategy(NOM)
    t = bipartite.joint_table(bs)
    for x in range(2):
        for y in range(2):
            for w in range(2):
                sl = t.slice(x, y, w)
                print(f"  x={x} y={y} w={w}  p(a,b) = {_fmt(sl.ravel())}  p(0,0)+p(1,1) = {np.trace(sl):.7f}")
    rep = bipartite.eval_P0_P1_PS(t)
    print(f"no-signalling: {bipartite.check_no_signalling(t)}")
    print(f"P0={rep.details['P0']:.7f} P1={rep.details['P1']:.7f} PS={rep.value:.7f}")
    aom = bipartite.eval_bipartite(bipartite.nom_violating_strategy(AOM))
    print(f"same ingredients under AoM: PS={aom.value:.7f} (bound 0.75)")


def cmd_demo(args) -> int:
    {"wfs": _demo_wfs, "theorem1": _demo_theorem1, "bipartite": _demo_bipartite}[args.name]()
    return EXIT_OK


def _positive(kind: str, minimum: int):
    def parse(text: str) -> int:
        try:
            value = int(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"{kind} must be an integer") from None
        if value < minimum:
            raise argparse.ArgumentTypeError(f"{kind} must be >= {minimum}")
        return value

    return parse


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="wfs", description="Wigner's Friend simulator and witness toolkit")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    e = sub.add_parser("eval", help="evaluate a witness on a scenario JSON file")
    e.add_argument("--scenario", required=True)
    e.add_argument("--witness", choices=("T", "Tq", "PS"))
    e.add_argument("--op", type=int, default=1, help="index w of the op to test (default 1)")
    e.add_argument("--q", type=float, nargs="+", help="q vector for Tq (default: observed p(.|1))")
    e.add_argument("--seed", type=int)
    e.set_defaults(func=cmd_eval)

    s = sub.add_parser(
        "sweep", help="bound-falsification sweep", epilog=SWEEP_EPILOG, formatter_class=argparse.RawDescriptionHelpFormatter
    )
    s.add_argument("--witness", choices=sweep.WITNESSES, required=True)
    s.add_argument("--mode", type=str.lower, choices=("aom", "nom"), default="aom")
    s.add_argument("--samples", type=_positive("samples", 1), default=1000)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", help="CSV path (default: stdout, summary then goes to stderr)")
    s.add_argument("--channel", action="store_true", help="random unital channels instead of block unitaries")
    s.add_argument("--dims", type=int, nargs="+")
    s.add_argument("--threads", type=_positive("threads", 1))
    s.add_argument("--no-inject", action="store_true", help="do not put the analytic construction in row 1")
    s.set_defaults(func=cmd_sweep)

    r = sub.add_parser(
        "region", help="(P0, P1) points and boundary curves", epilog=REGION_EPILOG,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    r.add_argument("--resolution", type=_positive("resolution", 2), default=50)
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--out")
    r.set_defaults(func=cmd_region)

    o = sub.add_parser("optimize", help="multi-restart search for the largest witness value")
    o.add_argument("--witness", choices=("T", "Tq", "PS"), required=True)
    o.add_argument("--mode", type=str.lower, choices=("aom", "nom"), default="aom")
    o.add_argument("--d", type=_positive("d", 2), default=2)
    o.add_argument("--budget", type=_positive("budget", 1), default=10)
    o.add_argument("--seed", type=int, default=0)
    o.add_argument("--q", type=float, nargs="+")
    o.add_argument("--max-evals", type=_positive("max-evals", 1), default=20_000)
    o.set_defaults(func=cmd_optimize)

    dm = sub.add_parser("demo", help=f"walk through a construction: {', '.join(DEMOS)}")
    dm.add_argument("name")
    dm.set_defaults(func=cmd_demo)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "demo" and args.name not in DEMOS:
        print(f"error: unknown demo {args.name!r}; choose from {', '.join(DEMOS)}", file=sys.stderr)
        return EXIT_INVALID
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
