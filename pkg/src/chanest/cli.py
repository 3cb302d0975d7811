"""Command-line driver: simulate -> estimate -> compare -> fit, all emitting
plot-ready CSV."""
from __future__ import annotations

import argparse
import csv
import math
import sys

from . import baselines, ingest, model, semcm, simulator
from .errors import (ChanestError, DegenerateFitError, DegenerateSamplesError,
                     InsufficientDataError, ParseError, RankDeficientFitError)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERIC = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _parse_exclude(text):
    lo, _, hi = text.partition(":")
    try:
        lo, hi = float(lo), float(hi)
    except ValueError:
        raise argparse.ArgumentTypeError("expected LO:HI")
    if hi < lo:
        raise argparse.ArgumentTypeError("expected LO <= HI")
    return lo, hi


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="chanest",
                description="Censored Gamma-mixture channel estimation")
    sub = p.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="generate a synthetic packet log")
    sim.add_argument("--config", required=True, help="scenario JSON")
    sim.add_argument("--out", required=True, help="packet-log CSV path")
    sim.add_argument("--seed", type=int, default=None,
                     help="override the scenario seed")

    est = sub.add_parser("estimate", help="per-bin mixture estimates")
    _estimation_flags(est)
    est.add_argument("--out", required=True, help="estimates CSV path")
    est.add_argument("--trace", default=None,
                     help="optional per-iteration trace CSV path")

    cmp_ = sub.add_parser("compare", help="SEM vs ML-/MB shape per bin")
    _estimation_flags(cmp_)
    cmp_.add_argument("--out", required=True, help="comparison CSV path")

    fit = sub.add_parser("fit", help="path-loss line through bin estimates")
    fit.add_argument("--input", required=True, help="estimates CSV")
    fit.add_argument("--component", type=int, choices=(1, 2), default=1)
    fit.add_argument("--exclude-ld", type=_parse_exclude, default=None,
                     metavar="LO:HI", help="ld interval to mask out")
    fit.add_argument("--out", default=None, help="output CSV (default stdout)")
    return p


def _estimation_flags(sp):
    sp.add_argument("--input", required=True, help="packet-log CSV")
    sp.add_argument("--c-db", type=float, required=True,
                    help="censoring threshold in dBm")
    sp.add_argument("--ld-step", type=float, default=0.5)
    sp.add_argument("--iters", type=int, default=50)
    sp.add_argument("--burn", type=int, default=10)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--init-m1", type=float, default=None)
    sp.add_argument("--digamma", choices=("exact", "paper"), default="exact")


def _write_packet_log(path, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(ingest.HEADER)
        for seq, dist, rssi in rows:
            w.writerow([seq, repr(dist), "" if rssi is None else repr(rssi)])


def cmd_simulate(args) -> int:
    try:
        with open(args.config) as fh:
            sc = simulator.Scenario.from_json(fh.read())
        if args.seed is not None:
            sc = simulator.Scenario(**{**sc.__dict__, "seed": args.seed})
        _write_packet_log(args.out, simulator.packet_rows(sc))
        _, truth, _ = simulator.generate_scenario(sc)
        with open(args.out + ".truth.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["ld", "alpha1", "m1", "omega1", "m2", "omega2",
                        "mean1_db", "mean2_db"])
            for ld, phi, m1db, m2db in zip(truth.lds, truth.params,
                                           truth.mean1_db, truth.mean2_db):
                w.writerow([repr(float(ld)), repr(phi.alpha1),
                            repr(phi.comp1.m), repr(phi.comp1.omega),
                            repr(phi.comp2.m), repr(phi.comp2.omega),
                            repr(float(m1db)), repr(float(m2db))])
    except (OSError, ValueError) as exc:
        print(f"chanest simulate: {exc}", file=sys.stderr)
        return EXIT_DATA
    return EXIT_OK


def _load_bins(args):
    with open(args.input, newline="") as fh:
        records = ingest.parse_packet_log(fh)
    losses = ingest.infer_losses(records)
    return ingest.bin_by_ld(records, losses, args.ld_step, args.c_db)


def _estimate_bins(bins, args):
    """Run the SEM chain on every bin; failures become status strings."""
    config = semcm.SemConfig(
        iterations=args.iters, burn_window=args.burn, seed=args.seed,
        digamma_mode="paper_approx" if args.digamma == "paper" else "exact")
    results = []
    for b, bin_ in enumerate(bins):
        rng = simulator.bin_rng(args.seed, b)
        try:
            init = semcm.init_heuristic(bin_, args.init_m1)
            trace = semcm.run_semcm(bin_, init, config, rng)
            est = model.BinEstimate.from_params(bin_.ld, trace.final,
                                                bin_.loss_fraction)
            results.append((bin_, est, trace, "ok"))
        except InsufficientDataError:
            results.append((bin_, None, None, "insufficient-data"))
        except DegenerateFitError:
            results.append((bin_, None, None, "degenerate-fit"))
        except (ChanestError, ValueError):
            results.append((bin_, None, None, "numerical-failure"))
    return results


def cmd_estimate(args) -> int:
    try:
        bins = _load_bins(args)
    except (OSError, ParseError) as exc:
        print(f"chanest estimate: {exc}", file=sys.stderr)
        return EXIT_DATA
    results = _estimate_bins(bins, args)
    rows = [est if est is not None else {"ld": bin_.ld}
            for bin_, est, _, _ in results]
    model.write_estimates(args.out, rows,
                          statuses=[s for *_, s in results])
    if args.trace:
        with open(args.trace, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["ld", "iteration", "alpha1", "m1", "omega1",
                        "m2", "omega2"])
            for bin_, _, trace, status in results:
                if status != "ok":
                    continue
                for it, phi in enumerate(trace.iterates, start=1):
                    w.writerow([repr(bin_.ld), it, repr(phi.alpha1),
                                repr(phi.comp1.m), repr(phi.comp1.omega),
                                repr(phi.comp2.m), repr(phi.comp2.omega)])
    return EXIT_OK


def cmd_compare(args) -> int:
    try:
        bins = _load_bins(args)
    except (OSError, ParseError) as exc:
        print(f"chanest compare: {exc}", file=sys.stderr)
        return EXIT_DATA
    results = _estimate_bins(bins, args)
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["ld", "sem_m1", "ml_m", "mb_m", "loss_fraction",
                    "status"])
        for bin_, est, _, status in results:
            try:
                ml = repr(baselines.ml_minus_shape(bin_.observed))
                mb = repr(baselines.mb_shape(bin_.observed))
            except (DegenerateSamplesError, ValueError):
                ml = mb = ""
            sem_m1 = repr(est.params.comp1.m) if est is not None else ""
            w.writerow([repr(bin_.ld), sem_m1, ml, mb,
                        repr(bin_.loss_fraction), status])
    return EXIT_OK


def cmd_fit(args) -> int:
    try:
        rows, statuses = model.read_estimates(args.input)
    except (OSError, ValueError) as exc:
        print(f"chanest fit: {exc}", file=sys.stderr)
        return EXIT_DATA
    key = "mean1_db" if args.component == 1 else "mean2_db"
    points = []
    for row, status in zip(rows, statuses):
        if status != "ok" or math.isnan(row[key]):
            continue
        if args.exclude_ld and args.exclude_ld[0] <= row["ld"] <= args.exclude_ld[1]:
            continue
        points.append((row["ld"], row[key]))
    try:
        line = baselines.lse_line_fit(baselines.LineFitInput(points))
    except RankDeficientFitError as exc:
        print(f"chanest fit: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    out = f"A,B\n{line.A!r},{line.B!r}\n"
    if args.out:
        try:
            with open(args.out, "w") as fh:
                fh.write(out)
        except OSError as exc:
            print(f"chanest fit: {exc}", file=sys.stderr)
            return EXIT_DATA
    else:
        sys.stdout.write(out)
    return EXIT_OK


_COMMANDS = {"simulate": cmd_simulate, "estimate": cmd_estimate,
             "compare": cmd_compare, "fit": cmd_fit}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return _COMMANDS[args.command](args)


if __name__ == "__main__":
    raise SystemExit(main())
