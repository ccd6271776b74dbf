"""Command-line interface: ``lgwfbst fit | simulate | study``.

Every command writes its outputs plus ``manifest.json`` (argv, resolved
configuration, seed, version, duration and output files) into ``--outdir``.

Exit codes: 0 success, 2 usage error, 3 data error, 4 numerical failure.
"""

import argparse
import csv
from dataclasses import asdict
import hashlib
import json
import math
import os
import sys
import time
import warnings

import numpy as np

from . import __version__
from .amsampler import SamplerConfig, run_chain
from .exceptions import (
    CalibrationError,
    DataError,
    DomainError,
    InitializationError,
    OptimizerError,
    PexeFitError,
    SolverError,
)
from .fbst import test_hypotheses
from .mixture import LGW, Dataset
from .pexe import fit_pexe, survival_at
from .simcens import STUDY_CSV_HEADER, CensoringSpec, StudyConfig, calibrate_lambda, generate_sample, run_study
from .survdist import Family, SharedMoments, survival

__all__ = ["main", "read_dataset_csv", "write_dataset_csv", "build_parser"]

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 2, 3, 4
DEFAULT_FIT_SEED = 20240101
MANIFEST = "manifest.json"


# ---------------------------------------------------------------------------
# data files


def read_dataset_csv(path, families=LGW):
    """Read a ``time,event`` CSV into a :class:`Dataset`.

    Raises
    ------
    DataError
        On a bad header or malformed rows; ``lines`` lists the offending
        1-based line numbers.
    """
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
    except (OSError, UnicodeDecodeError) as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    if not rows or [c.strip() for c in rows[0]] != ["time", "event"]:
        raise DataError("first line must be the header 'time,event'", [1])
    times, events, bad = [], [], []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row or all(not c.strip() for c in row):
            continue
        try:
            if len(row) != 2:
                raise ValueError
            t = float(row[0])
            e = float(row[1])
            if not (math.isfinite(t) and t > 0 and e in (0.0, 1.0)):
                raise ValueError
        except ValueError:
            bad.append(lineno)
            continue
        times.append(t)
        events.append(int(e))
    if bad:
        shown = ", ".join(map(str, bad[:20])) + (" ..." if len(bad) > 20 else "")
        raise DataError(f"malformed rows at lines {shown}", bad)
    if not times:
        raise DataError("no observations")
    return Dataset(times, events, families)


def write_dataset_csv(dataset, path):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("time,event\n")
        for y, d in zip(dataset.time, dataset.event):
            fh.write(f"{float(y)!r},{int(d)}\n")


# ---------------------------------------------------------------------------
# manifest


def _sha256(path):
    with open(path, "rb") as fh:
        return hashlib.sha256(fh.read()).hexdigest()


def _write_manifest(outdir, command, argv, config, seed, started, outputs):
    manifest = {
        "command": command,
        "argv": list(argv),
        "config": config,
        "seed": seed,
        "version": __version__,
        "duration_seconds": time.perf_counter() - started,
        "outputs": {name: {"sha256": _sha256(os.path.join(outdir, name))} for name in outputs},
    }
    with open(os.path.join(outdir, MANIFEST), "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2)
        fh.write("\n")


def _sampler_config(args, seed):
    return SamplerConfig(
        iterations=args.iterations,
        burn_in=args.burn_in,
        thin=args.thin,
        initial_scale=args.initial_scale,
        adaptation_start=args.adaptation_start,
        seed=seed,
    )


# ---------------------------------------------------------------------------
# commands


def _posterior_summary_rows(draws):
    cols = [("mu", draws.mu), ("sigma2", draws.sigma2)]
    cols += [(f"p_{f.value}", draws.weights[:, k]) for k, f in enumerate(draws.families)]
    rows = []
    for name, x in cols:
        q = np.quantile(x, [0.025, 0.5, 0.975])
        rows.append([name, x.mean(), x.std(ddof=1), q[0], q[1], q[2]])
    return rows


def _curves(dataset, draws, chosen, n_grid):
    grid = np.linspace(0.0, float(dataset.time.max()), n_grid)
    pos = grid > 0
    moments = SharedMoments(float(draws.mu.mean()), float(draws.sigma2.mean()))
    weights = draws.weights.mean(axis=0)
    weights = weights / weights.sum()
    columns = {"t": grid}
    try:
        columns["pexe"] = survival_at(fit_pexe(dataset), grid)
    except PexeFitError:
        warnings.warn("all observations are censored; PEXE curve omitted", RuntimeWarning, stacklevel=2)

    def curve(family):
        s = np.ones_like(grid)
        s[pos] = survival(family, moments, grid[pos])
        return s

    per_family = {f: curve(f) for f in dataset.families}
    mixture = sum(w * per_family[f] for w, f in zip(weights, dataset.families))
    columns["mixture"] = np.minimum(mixture, 1.0)
    if chosen is not None:
        columns[chosen.value] = per_family[chosen]
    return columns


def cmd_fit(args, argv):
    started = time.perf_counter()
    families = tuple(Family.parse(f) for f in args.families.split(","))
    if len(families) < 2 or len(set(families)) != len(families):
        raise DomainError("--families needs at least two distinct families")
    seed = DEFAULT_FIT_SEED if args.seed is None else args.seed
    cfg = _sampler_config(args, seed)
    dataset = read_dataset_csv(args.input, families)
    os.makedirs(args.outdir, exist_ok=True)

    with warnings.catch_warnings():
        # acceptance-rate notes are kept on the draws and reported below
        warnings.simplefilter("ignore", RuntimeWarning)
        draws = run_chain(dataset, cfg)
    report = test_hypotheses(dataset, draws, n_starts=args.starts)

    payload = report.to_dict()
    payload["manifest"] = MANIFEST
    payload["seed"] = seed
    payload["n"] = dataset.n
    payload["n_censored"] = int(dataset.n - dataset.event.sum())
    payload["acceptance_rate"] = draws.acceptance_rate
    payload["warnings"] = list(draws.warnings)
    with open(os.path.join(args.outdir, "evidence-report.json"), "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")

    with open(os.path.join(args.outdir, "posterior-summary.csv"), "w", encoding="utf-8") as fh:
        fh.write("param,mean,sd,q2.5,median,q97.5\n")
        for row in _posterior_summary_rows(draws):
            fh.write(row[0] + "," + ",".join(repr(float(v)) for v in row[1:]) + "\n")

    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        columns = _curves(dataset, draws, report.chosen_family, args.grid_points)
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    for note in draws.warnings:
        print(f"warning: {note}", file=sys.stderr)
    np.savetxt(os.path.join(args.outdir, "curves.csv"), np.column_stack(list(columns.values())),
               delimiter=",", header=",".join(columns), comments="", fmt="%.17g")

    outputs = ["evidence-report.json", "posterior-summary.csv", "curves.csv"]
    config = {"input": os.path.abspath(args.input), "families": [f.value for f in families],
              "sampler": asdict(cfg), "starts": args.starts, "grid_points": args.grid_points}
    _write_manifest(args.outdir, "fit", argv, config, seed, started, outputs)
    chosen = report.chosen_family.value if report.chosen_family else "undecided"
    print(f"chosen family: {chosen}")
    return EXIT_OK


def cmd_simulate(args, argv):
    started = time.perf_counter()
    family = Family.parse(args.family)
    moments = SharedMoments(args.mu, args.sigma2)
    if args.n < 1:
        raise DomainError("--n must be >= 1")
    lam = calibrate_lambda(family, moments, args.pc)
    rng = np.random.default_rng(args.seed)
    dataset = generate_sample(family, moments, CensoringSpec(args.pc, lam), args.n, rng)
    os.makedirs(args.outdir, exist_ok=True)
    write_dataset_csv(dataset, os.path.join(args.outdir, "dataset.csv"))
    config = {"family": family.value, "mu": args.mu, "sigma2": args.sigma2, "n": args.n,
              "pc": args.pc, "lambda": lam}
    _write_manifest(args.outdir, "simulate", argv, config, args.seed, started, ["dataset.csv"])
    print(f"lambda={lam!r} censored={1 - dataset.event.mean():.4f}")
    return EXIT_OK


def cmd_study(args, argv):
    started = time.perf_counter()
    if args.jobs < 1:
        raise DomainError("--jobs must be >= 1")
    cfg = StudyConfig(
        generator=Family.parse(args.family),
        moments=SharedMoments(args.mu, args.sigma2),
        n=args.n,
        replicates=args.replicates,
        p_c=args.pc,
        sampler=_sampler_config(args, 0),
        seed=args.seed,
    )
    result = run_study(cfg, jobs=args.jobs)
    os.makedirs(args.outdir, exist_ok=True)
    with open(os.path.join(args.outdir, "study-results.csv"), "w", encoding="utf-8") as fh:
        fh.write(STUDY_CSV_HEADER + "\n" + result.csv_row() + "\n")
    with open(os.path.join(args.outdir, "study-replicates.csv"), "w", encoding="utf-8") as fh:
        fh.write("replicate,decision,censored_fraction,acceptance_rate,error\n")
        for r in result.replicates:
            decision = r.decision.value if r.decision else ("failed" if r.error else "undecided")
            err = (r.error or "").replace(",", ";").replace("\n", " ")
            fh.write(f"{r.index},{decision},{r.censored_fraction!r},{r.acceptance_rate!r},{err}\n")
    config = {"family": cfg.generator.value, "mu": args.mu, "sigma2": args.sigma2, "n": cfg.n,
              "replicates": cfg.replicates, "pc": cfg.p_c, "lambda": result.lam,
              "sampler": {k: v for k, v in asdict(cfg.sampler).items() if k != "seed"},
              "jobs": args.jobs}
    _write_manifest(args.outdir, "study", argv, config, args.seed, started,
                    ["study-results.csv", "study-replicates.csv"])
    failures = result.failures
    if failures:
        print(f"{len(failures)} of {cfg.replicates} replicates failed (counted as incorrect):", file=sys.stderr)
        for r in failures:
            print(f"  replicate {r.index}: {r.error}", file=sys.stderr)
    print(f"correct decisions: {result.pct_correct:g}%")
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


def _add_sampler_flags(p):
    d = SamplerConfig()
    p.add_argument("--iterations", type=int, default=d.iterations)
    p.add_argument("--burn-in", type=int, default=d.burn_in)
    p.add_argument("--thin", type=int, default=d.thin)
    p.add_argument("--initial-scale", type=float, default=d.initial_scale)
    p.add_argument("--adaptation-start", type=int, default=d.adaptation_start)


def build_parser():
    parser = argparse.ArgumentParser(prog="lgwfbst", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit", help="fit the mixture and test each family")
    p.add_argument("input", help="CSV with header time,event")
    p.add_argument("--families", default="lognormal,gamma,weibull")
    p.add_argument("--seed", type=int, default=None, help=f"default {DEFAULT_FIT_SEED} (recorded)")
    p.add_argument("--starts", type=int, default=10, help="optimizer starts per hypothesis")
    p.add_argument("--grid-points", type=int, default=201)
    p.add_argument("--outdir", default=".")
    _add_sampler_flags(p)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("simulate", help="simulate a censored dataset")
    p.add_argument("--family", required=True)
    p.add_argument("--mu", type=float, required=True)
    p.add_argument("--sigma2", type=float, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--pc", type=float, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--outdir", default=".")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("study", help="replicated simulate-fit-decide study")
    p.add_argument("--family", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--pc", type=float, required=True)
    p.add_argument("--replicates", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--mu", type=float, default=20.0)
    p.add_argument("--sigma2", type=float, default=50.0)
    p.add_argument("--outdir", default=".")
    _add_sampler_flags(p)
    p.set_defaults(func=cmd_study)
    return parser


def main(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        return args.func(args, argv)
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (DomainError, ValueError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (SolverError, CalibrationError, OptimizerError, InitializationError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
