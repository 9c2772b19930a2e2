"""Command line entry point: ``run``, ``lemma4`` and ``version``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .errors import ConfigError, DomainError, NumericError
from .harness.analysis import estimate_exponent, lemma4_check, lemma4_lambda
from .harness.config import load_config
from .harness.output import emit_csv, emit_summary
from .harness.runner import resolve_K, run_experiment

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3


def _cmd_run(args) -> int:
    config = load_config(args.config)
    out = Path(args.out)
    traces = run_experiment(config, workers=args.workers)
    emit_csv(traces, out / "traces.csv")
    finals = np.array([tr.final_regret for tr in traces])
    summary = {"algorithm": config.algorithm, "trials": config.trials}
    if config.algorithm == "kwsa_binning":
        summary["K"] = resolve_K(config)
    summary["mean_final_regret"] = float(finals.mean())
    status = EXIT_OK
    try:
        slope, stderr = estimate_exponent(traces)
    except NumericError as exc:
        print(f"error: {exc}", file=sys.stderr)
        slope = stderr = float("nan")
        status = EXIT_NUMERIC
    summary["slope"] = slope
    summary["stderr"] = stderr
    emit_summary(config, summary, out / "summary.txt")
    print(f"slope = {slope:.4f} +/- {stderr:.4f}  mean final regret = {finals.mean():.6g}")
    print(f"wrote {out / 'traces.csv'} and {out / 'summary.txt'}")
    return status


def _cmd_lemma4(args) -> int:
    try:
        lam = lemma4_lambda(args.alpha, args.beta, args.omega, args.b1)
        holds = lemma4_check(args.alpha, args.beta, args.omega, args.b1, args.n)
    except DomainError as exc:
        raise ConfigError(str(exc)) from exc
    print(f"lambda = {lam:.17g}")
    print(f"holds = {'true' if holds else 'false'}")
    return EXIT_OK


def _cmd_version(args) -> int:
    print(__version__)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kwbandit", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run an experiment from a config file")
    run.add_argument("--config", required=True)
    run.add_argument("--out", required=True, help="output directory")
    run.add_argument("--workers", type=int, default=1, help="parallel trial processes")
    run.set_defaults(func=_cmd_run)

    lem = sub.add_parser("lemma4", help="check the squared-error recursion bound numerically")
    lem.add_argument("--alpha", type=float, required=True)
    lem.add_argument("--beta", type=float, required=True)
    lem.add_argument("--omega", type=float, required=True)
    lem.add_argument("--b1", type=float, required=True)
    lem.add_argument("--n", type=int, required=True)
    lem.set_defaults(func=_cmd_lemma4)

    ver = sub.add_parser("version", help="print the package version")
    ver.set_defaults(func=_cmd_version)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericError as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
