"""Command line entry point.

Exit codes: 0 success, 2 outcome mismatch (an asserted scenario or sweep
deviated from its expected result), 3 input/usage errors, 4 numerical or
statistical failures. Unexpected internal errors propagate as tracebacks.
"""
from __future__ import annotations

import argparse
import csv
import json
import os
import sys

from . import __version__
from .exceptions import (
    BecausError,
    DataIntegrityError,
    DegenerateReferenceError,
    DegenerateVarianceError,
    DimensionMismatchError,
    GenerationExhaustedError,
    IdentifiabilityError,
    InputFormatError,
    LengthTooShortError,
    OutcomeMismatchError,
    RankDeficientRegressionError,
    SeriesTooShortError,
    SolverFailureError,
    UnobservableSystemError,
)
from .harness import (
    classify_csv,
    probe_csv,
    report_rows,
    run_example,
    run_montecarlo,
    run_probe_trials,
)
from .linalg import ToleranceConfig
from .probe import ProbeConfig

EXIT_OK = 0
EXIT_MISMATCH = 2
EXIT_INPUT = 3
EXIT_NUMERICAL = 4

_INPUT_ERRORS = (InputFormatError, LengthTooShortError, SeriesTooShortError,
                 DimensionMismatchError)
_NUMERICAL_ERRORS = (DataIntegrityError, UnobservableSystemError,
                     GenerationExhaustedError, IdentifiabilityError,
                     RankDeficientRegressionError, DegenerateVarianceError,
                     SolverFailureError, DegenerateReferenceError)

MODES = ("example1", "example2", "example3", "example4", "montecarlo",
         "classify", "nonlinear_probe")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="becaus",
        description="Hankel-rank causal discovery between two vector time "
                    "series, with an F-test baseline and a nonlinear "
                    "fictitious-control probe.")
    ap.add_argument("--version", action="version", version=f"becaus {__version__}")
    ap.add_argument("--mode", required=True, choices=MODES)
    ap.add_argument("--seed", type=int, default=None,
                    help="RNG seed; falls back to BECAUS_SEED, then a "
                         "mode-specific default")
    ap.add_argument("--trials", type=int, default=None,
                    help="trials per relation (montecarlo) or network "
                         "realizations (nonlinear_probe)")
    ap.add_argument("--T", type=int, default=50, help="trajectory length")
    ap.add_argument("--Tini", type=int, default=None,
                    help="past-window length; defaults per mode")
    ap.add_argument("--rank-rtol", type=float, default=None,
                    help="relative singular value threshold for rank decisions")
    ap.add_argument("--out", default=None, help="write the report here "
                    "instead of stdout")
    ap.add_argument("--format", choices=("json", "csv"), default="json")
    ap.add_argument("--input", default=None,
                    help="CSV dataset for classify / nonlinear_probe")
    ap.add_argument("--dims", default=None, metavar="M,P",
                    help="column split for headerless CSV input")
    ap.add_argument("--no-granger", action="store_true",
                    help="skip the F-test sweep in montecarlo mode")
    ap.add_argument("--negative-control", action="store_true",
                    help="montecarlo with full-row-rank feedthrough on the "
                         "directed relations; mismatches are only counted")
    return ap


def _resolve_seed(args) -> int | None:
    if args.seed is not None:
        return args.seed
    env = os.environ.get("BECAUS_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise InputFormatError(f"BECAUS_SEED must be an integer, got {env!r}")
    return None


def _parse_dims(text):
    if text is None:
        return None
    parts = text.split(",")
    if len(parts) != 2:
        raise InputFormatError(f"--dims wants M,P, got {text!r}")
    try:
        m, p = (int(s) for s in parts)
    except ValueError:
        raise InputFormatError(f"--dims wants integers, got {text!r}")
    if m < 1 or p < 1:
        raise InputFormatError(f"--dims must be positive, got {text!r}")
    return m, p


def _tolerances(args) -> ToleranceConfig:
    if args.rank_rtol is None:
        return ToleranceConfig()
    return ToleranceConfig(rank_rtol=args.rank_rtol)


def _dispatch(args) -> dict:
    seed = _resolve_seed(args)
    tol = _tolerances(args)
    if args.mode.startswith("example"):
        n = int(args.mode[-1])
        return run_example(n, seed=seed, T=args.T, tol=tol)
    if args.mode == "montecarlo":
        return run_montecarlo(trials=args.trials or 500,
                              seed=0 if seed is None else seed,
                              T_range=(50, max(50, args.T * 4)), tol=tol,
                              include_granger=not args.no_granger,
                              negative_control=args.negative_control)
    if args.mode == "classify":
        if args.input is None:
            raise InputFormatError("classify mode needs --input CSV")
        return classify_csv(args.input, T_ini=args.Tini,
                            dims=_parse_dims(args.dims), tol=tol)
    # nonlinear_probe
    T_ini = 4 if args.Tini is None else args.Tini
    if args.input is not None:
        return probe_csv(args.input, T_ini=T_ini, dims=_parse_dims(args.dims))
    return run_probe_trials(trials=args.trials or 50,
                            seed=0 if seed is None else seed,
                            T=args.T, T_ini=T_ini, config=ProbeConfig())


def _emit(report: dict, args) -> None:
    if args.format == "json":
        text = json.dumps(report, indent=2, sort_keys=True) + "\n"
        if args.out:
            with open(args.out, "w", encoding="utf-8") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
        return
    names, rows = report_rows(report)
    if args.out:
        fh = open(args.out, "w", encoding="utf-8", newline="")
    else:
        fh = sys.stdout
    try:
        writer = csv.DictWriter(fh, fieldnames=names, restval="",
                                lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
    finally:
        if args.out:
            fh.close()


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        report = _dispatch(args)
    except OutcomeMismatchError as exc:
        print(f"becaus: outcome mismatch: {exc}", file=sys.stderr)
        return EXIT_MISMATCH
    except _INPUT_ERRORS as exc:
        print(f"becaus: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except _NUMERICAL_ERRORS as exc:
        print(f"becaus: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except FileNotFoundError as exc:
        print(f"becaus: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except BecausError as exc:  # anything newly added defaults to numerical
        print(f"becaus: error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL

    _emit(report, args)
    if args.mode == "montecarlo" and not args.negative_control \
            and not report["summary"]["all_correct"]:
        print("becaus: outcome mismatch: montecarlo sweep has "
              "misclassifications", file=sys.stderr)
        return EXIT_MISMATCH
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
