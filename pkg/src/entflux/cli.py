"""Command-line interface.

Subcommands:
  analyze    per-link optima and entanglement boundary for a scenario
  curves     sample fidelity/EBR curves for one noise pairing to CSV
  optimize   run the GA sweep for a scenario and emit reports
  oracle     exhaustive optimum vs. GA on one channel count
  count      allocation-space sizes
"""

from __future__ import annotations

import argparse
import csv
import logging
import sys
from dataclasses import replace
from pathlib import Path

from .analysis import (constrained_optimal_flux, count_allocations,
                       entanglement_possible, link_optima)
from .errors import EntfluxError
from .optimize import best_of_runs, brute_force_optimize
from .scenarios import (PRESET_NAMES, emit_curves, emit_report, format_report,
                        load_scenario, run_scenario)

logger = logging.getLogger(__name__)


def _add_common(sub, scenario_required=True):
    sub.add_argument("--scenario", required=scenario_required,
                     help=f"scenario file or preset ({', '.join(PRESET_NAMES)})")
    sub.add_argument("--seed", type=int, default=None, help="master RNG seed")
    sub.add_argument("--runs", type=int, default=None,
                     help="independent GA runs per K (default from scenario)")
    sub.add_argument("--out", default=".", help="output directory")
    sub.add_argument("--threads", type=int, default=1,
                     help="parallel workers for independent runs")
    sub.add_argument("--format", default="both", choices=("csv", "text", "both"),
                     help="report files to write")


def _load(args):
    spec = load_scenario(args.scenario)
    ga = spec.ga
    if args.seed is not None:
        ga = replace(ga, rng_seed=args.seed)
    if args.runs is not None:
        ga = replace(ga, independent_runs=args.runs)
    return replace(spec, ga=ga)


def _cmd_analyze(args) -> int:
    spec = _load(args)
    header = (f"{'link':<6} {'y1':>10} {'y2':>10} {'x_F':>10} {'F_max':>8} "
              f"{'x_R':>10} {'R_max':>10} {'phi':>10}")
    print(f"scenario {spec.name}: F_min = {spec.f_min}")
    print(header)
    rows = []
    for d in spec.links:
        y1, y2 = d.noise_pair(spec.tau)
        opt = link_optima(y1, y2)
        phi, _ = constrained_optimal_flux(y1, y2, spec.f_min)
        print(f"{d.name:<6} {y1:>10.4g} {y2:>10.4g} {opt.x_f:>10.4g} "
              f"{opt.f_max:>8.4f} {opt.x_r:>10.4g} {opt.r_max:>10.4g} {phi:>10.4g}")
        rows.append((d.name, y1, y2, opt.x_f, opt.f_max, opt.x_r, opt.r_max,
                     opt.roots[0], opt.roots[1], phi))
    if args.format in ("csv", "both"):
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        path = out / f"{spec.name}_analysis.csv"
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["link", "y1", "y2", "x_f", "f_max", "x_r", "r_max",
                             "z_lo", "z_hi", "phi"])
            for row in rows:
                writer.writerow([row[0]] + [repr(float(v)) for v in row[1:]])
        print(f"wrote {path}")
    return 0


def _cmd_curves(args) -> int:
    if not entanglement_possible(args.y1, args.y2):
        logger.warning("no entangled operating point; EBR columns will be 0")
        x_max = args.x_max if args.x_max is not None else 2.0
    else:
        opt = link_optima(args.y1, args.y2)
        x_max = args.x_max if args.x_max is not None else 1.2 * opt.roots[1]
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    path = out / f"curves_y1_{args.y1:g}_y2_{args.y2:g}.csv"
    emit_curves(args.y1, args.y2, (0.0, x_max), args.samples, path)
    print(f"wrote {path}")
    return 0


def _cmd_optimize(args) -> int:
    spec = _load(args)
    result = run_scenario(spec, threads=args.threads)
    print(format_report(result))
    for path in emit_report(result, args.out, fmt=args.format):
        print(f"wrote {path}")
    return 0


def _cmd_oracle(args) -> int:
    spec = _load(args)
    K = args.k if args.k is not None else spec.k_list[0]
    net = spec.network(K)
    brute = brute_force_optimize(net)
    runs = best_of_runs(net, spec.ga, threads=args.threads)
    f_ga = runs.champion.report.f
    f_bf = brute.report.f
    print(f"scenario {spec.name} at K = {K}: "
          f"{brute.n_compositions} compositions enumerated")
    print(f"exhaustive optimum f = {f_bf:.9f}  "
          f"counts = {list(brute.allocation.channel_counts(net.L))}  "
          f"mu_tot = {brute.allocation.mu_tot:.6g}/s")
    print(f"GA best of {spec.ga.independent_runs}   f = {f_ga:.9f}  "
          f"counts = {list(runs.champion.allocation.channel_counts(net.L))}  "
          f"mu_tot = {runs.champion.allocation.mu_tot:.6g}/s")
    if f_bf > 0:
        print(f"GA/exhaustive ratio = {f_ga / f_bf:.6f}")
    return 0


def _cmd_count(args) -> int:
    if args.scenario is not None:
        spec = load_scenario(args.scenario)
        L = len(spec.links)
        ks = spec.k_list if args.k is None else (args.k,)
    else:
        if args.k is None or args.l is None:
            print("count: need --scenario or both --k and --l", file=sys.stderr)
            return 2
        L, ks = args.l, (args.k,)
    print(f"{'K':>6} {'L':>4} {'distinct':>24} {'uniform-flux':>16}")
    for k in ks:
        print(f"{k:>6} {L:>4} {count_allocations(k, L, False):>24} "
              f"{count_allocations(k, L, True):>16}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="entflux",
                                     description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("-v", "--verbose", action="store_true",
                        help="log per-K progress")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="per-link optima and boundary check")
    _add_common(p)
    p.set_defaults(func=_cmd_analyze)

    p = sub.add_parser("curves", help="fidelity/EBR curve samples to CSV")
    p.add_argument("--y1", type=float, required=True)
    p.add_argument("--y2", type=float, required=True)
    p.add_argument("--x-max", type=float, default=None,
                   help="grid end (default: 1.2x the upper entanglement root)")
    p.add_argument("--samples", type=int, default=200)
    p.add_argument("--out", default=".")
    p.set_defaults(func=_cmd_curves)

    p = sub.add_parser("optimize", help="GA sweep over the scenario's K list")
    _add_common(p)
    p.set_defaults(func=_cmd_optimize)

    p = sub.add_parser("oracle", help="exhaustive search vs. GA at one K")
    _add_common(p)
    p.add_argument("--k", type=int, default=None,
                   help="channel count (default: first entry of the K list)")
    p.set_defaults(func=_cmd_oracle)

    p = sub.add_parser("count", help="allocation-space sizes")
    p.add_argument("--scenario", default=None)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--l", type=int, default=None)
    p.set_defaults(func=_cmd_count)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except EntfluxError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
