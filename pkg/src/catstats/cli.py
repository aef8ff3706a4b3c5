"""Command-line interface: data in, JSON or CSV results out.

Subcommands: ``test independence``, ``test gof``, ``quadform``, and
``simulate calibration|power``.  Every command is deterministic given its
inputs, flags, and seed; the default seed is 0 and can be overridden with
the CATSTATS_SEED environment variable.  Exit codes: 0 success, 1
computation error, 2 usage error (including unreadable or malformed input
files).
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import __version__
from .baselines import (
    TestOutcome,
    fisher_exact_2x2,
    fisher_mc,
    g_test,
    pearson_independence_test,
    permutation_test,
)
from .dcov import IndependenceTestOutcome, dcov_independence_test
from .energy_gof import GofTestOutcome, energy_gof_test, pearson_gof_test
from .errors import CatstatsError, InputError
from .quadform import (
    WeightSpectrum,
    upper_tail,
    upper_tail_farebrother,
    upper_tail_imhof,
)
from .simulate import (
    INDEPENDENCE_METHODS,
    ExperimentReport,
    run_calibration,
    run_power,
)
from .tables import ProbabilityVector, read_samples_csv, read_table_csv, table_from_samples


def _default_seed() -> int:
    env = os.environ.get("CATSTATS_SEED")
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError:
        raise InputError(f"CATSTATS_SEED must be an integer, got {env!r}") from None


def _float_list(text: str) -> list[float]:
    try:
        return [float(tok) for tok in text.split(",") if tok.strip() != ""]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers: {text!r}")


def _eps_grid(text: str) -> list[float]:
    """Parse start:stop:count into an inclusive linear grid."""
    parts = text.split(":")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("--eps expects start:stop:count")
    try:
        start, stop = float(parts[0]), float(parts[1])
        count = int(parts[2])
    except ValueError:
        raise argparse.ArgumentTypeError("--eps expects start:stop:count")
    if count < 1:
        raise argparse.ArgumentTypeError("--eps count must be positive")
    return [float(v) for v in np.linspace(start, stop, count)]


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="catstats",
        description="Distance-covariance and energy tests for categorical data.",
    )
    parser.add_argument("--version", action="version",
                        version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    test = sub.add_parser("test", help="run a hypothesis test on a data file")
    test_sub = test.add_subparsers(dest="test_kind", required=True)

    indep = test_sub.add_parser("independence", help="two-variable independence test")
    indep.add_argument("--input", required=True, help="table or sample CSV")
    indep.add_argument("--input-format", choices=("auto", "table", "samples"),
                       default="auto")
    indep.add_argument("--method", choices=INDEPENDENCE_METHODS, default="dcov")
    indep.add_argument("--B", type=int, default=999, help="resample count")
    indep.add_argument("--seed", type=int, default=None)
    _output_flags(indep)

    gof = test_sub.add_parser("gof", help="goodness of fit to a fixed distribution")
    gof.add_argument("--input", required=True,
                     help="CSV with one row (or column) of counts")
    gof.add_argument("--null", required=True, type=_float_list,
                     help="null probabilities, e.g. 0.2,0.3,0.5")
    gof.add_argument("--method", choices=("energy", "pearson"), default="energy")
    _output_flags(gof)

    qf = sub.add_parser("quadform",
                        help="upper tail of a weighted chi-squared(1) sum")
    qf.add_argument("--weights", required=True, type=_float_list)
    qf.add_argument("--x", required=True, type=float)
    qf.add_argument("--method", choices=("auto", "farebrother", "imhof"),
                    default="auto")
    qf.add_argument("--tol", type=float, default=None)
    _output_flags(qf)

    sim = sub.add_parser("simulate", help="calibration and power studies")
    sim_sub = sim.add_subparsers(dest="study", required=True)
    for study in ("calibration", "power"):
        sp = sim_sub.add_parser(study)
        sp.add_argument("--methods", required=True,
                        help="comma-separated method names")
        sp.add_argument("--I", type=int, default=4)
        sp.add_argument("--J", type=int, default=8)
        sp.add_argument("--n", type=int, default=100)
        sp.add_argument("--M", type=int, default=2000)
        sp.add_argument("--B", type=int, default=999)
        sp.add_argument("--seed", type=int, default=None)
        sp.add_argument("--out", help="write the report as JSON to this path")
        sp.add_argument("--csv", help="write tidy CSV (method,eps_or_alpha,rate,se)")
        sp.add_argument("--timings", action="store_true",
                        help="print per-test timings (not written to files)")
        if study == "calibration":
            sp.add_argument("--alphas", type=_float_list,
                            default=[0.01, 0.05, 0.10])
        else:
            sp.add_argument("--eps", type=_eps_grid, required=True,
                            help="start:stop:count grid of perturbations")
            sp.add_argument("--alpha", type=float, default=0.05)
    return parser


def _output_flags(sp: argparse.ArgumentParser) -> None:
    sp.add_argument("--json", action="store_true",
                    help="print machine-readable JSON instead of a summary")
    sp.add_argument("--out", help="also write the JSON result to this path")


def _outcome_payload(out) -> dict:
    """Shared JSON envelope: method, statistic, p_value, calibration metadata."""
    if isinstance(out, IndependenceTestOutcome):
        if out.method == "asymptotic":
            calibration = {"kind": "spectrum",
                           "weights": [float(w) for w in out.spectrum.weights]}
        else:
            calibration = {"kind": "resampling", "B": out.B, "seed": out.seed}
        return {
            "method": "dcov" if out.method == "asymptotic" else "dcov-perm",
            "statistic": out.statistic,
            "vhat": out.vhat,
            "p_value": out.p_value,
            "calibration": calibration,
        }
    if isinstance(out, GofTestOutcome):
        if out.spectrum is not None:
            calibration = {"kind": "spectrum",
                           "weights": [float(w) for w in out.spectrum.weights]}
        else:
            calibration = {"kind": "df", "df": out.df}
        payload = {
            "method": out.method,
            "statistic": out.statistic,
            "p_value": out.p_value,
            "calibration": calibration,
        }
        if out.support_violation:
            payload["support_violation"] = True
        return payload
    if isinstance(out, TestOutcome):
        if out.df is not None:
            calibration = {"kind": "df", "df": out.df}
        elif out.B is not None:
            calibration = {"kind": "resampling", "B": out.B, "seed": out.seed}
            if out.mc_se is not None:
                calibration["mc_se"] = out.mc_se
        else:
            calibration = {"kind": "exact"}
        return {
            "method": out.method,
            "statistic": out.statistic,
            "p_value": out.p_value,
            "calibration": calibration,
        }
    raise TypeError(f"cannot serialise {type(out).__name__}")


def _emit(payload: dict, args) -> None:
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if getattr(args, "out", None):
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    if getattr(args, "json", False):
        sys.stdout.write(text)
    else:
        method = payload.get("method", "?")
        stat = payload.get("statistic")
        p = payload.get("p_value")
        sys.stdout.write(f"method={method} statistic={stat:.6g} p_value={p:.6g}\n")


def _read_independence_input(args):
    fmt = args.input_format
    if fmt == "auto":
        with open(args.input, encoding="utf-8") as fh:
            first = fh.readline().strip().replace(" ", "")
        fmt = "samples" if first in ("x,y", "x") else "table"
    if fmt == "samples":
        sample = read_samples_csv(args.input)
        if not sample.paired:
            raise InputError("independence testing needs paired x,y observations")
        return table_from_samples(sample, int(sample.labels_x.max()),
                                  int(sample.labels_y.max()))
    return read_table_csv(args.input)


def _run_independence(args) -> dict:
    table = _read_independence_input(args)
    seed = args.seed if args.seed is not None else _default_seed()
    method = args.method
    if method == "dcov":
        return _outcome_payload(dcov_independence_test(table))
    if method in ("dcov-perm", "usp-perm"):
        out = dcov_independence_test(table, method="permutation", B=args.B, rng=seed)
        payload = _outcome_payload(out)
        payload["method"] = method
        return payload
    if method == "pearson":
        return _outcome_payload(pearson_independence_test(table))
    if method == "pearson-perm":
        return _outcome_payload(
            permutation_test(table, statistic="pearson", B=args.B, rng=seed)
        )
    if method == "g":
        return _outcome_payload(g_test(table))
    if method == "fisher":
        if table.shape == (2, 2):
            return _outcome_payload(fisher_exact_2x2(table))
        return _outcome_payload(fisher_mc(table, B=args.B, rng=seed))
    if method == "fisher-mc":
        return _outcome_payload(fisher_mc(table, B=args.B, rng=seed))
    raise InputError(f"unknown method {method!r}")


def _run_gof(args) -> dict:
    table = read_table_csv(args.input)
    if table.shape[0] == 1:
        counts = table.counts[0]
    elif table.shape[1] == 1:
        counts = table.counts[:, 0]
    else:
        raise InputError("gof input must be a single row or column of counts")
    p0 = ProbabilityVector(np.asarray(args.null))
    if args.method == "energy":
        return _outcome_payload(energy_gof_test(counts, p0))
    return _outcome_payload(pearson_gof_test(counts, p0))


def _run_quadform(args) -> dict:
    spectrum = WeightSpectrum(np.asarray(args.weights))
    if args.method == "farebrother":
        tol = args.tol if args.tol is not None else 1e-9
        result = upper_tail_farebrother(spectrum, args.x, tol)
    elif args.method == "imhof":
        tol = args.tol if args.tol is not None else 1e-8
        result = upper_tail_imhof(spectrum, args.x, tol)
    else:
        result = upper_tail(spectrum, args.x)
    return {
        "method": result.method,
        "statistic": args.x,
        "p_value": result.p,
        "abs_error_bound": result.abs_error_bound,
        "terms_or_nodes": result.terms_or_nodes,
        "calibration": {"kind": "spectrum", "weights": list(args.weights)},
    }


def emit_report(report: ExperimentReport, format: str, path) -> None:
    """Serialise an experiment report to JSON or tidy CSV.

    Timings are never written: they vary run to run, and output files must
    be byte-identical for a fixed configuration and seed.
    """
    if format == "json":
        text = json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n"
    elif format == "csv":
        lines = ["method,eps_or_alpha,rate,se"]
        for method in report.methods:
            for value, rate, se in zip(report.grid, report.rates[method],
                                       report.ses[method]):
                lines.append(f"{method},{value!r},{rate!r},{se!r}")
        text = "\n".join(lines) + "\n"
    else:
        raise InputError(f"unknown report format {format!r}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


def _run_simulate(args) -> dict:
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    seed = args.seed if args.seed is not None else _default_seed()
    if args.study == "calibration":
        report = run_calibration(
            methods, I=args.I, J=args.J, n=args.n, M=args.M,
            alphas=args.alphas, B=args.B, seed=seed,
            collect_times=args.timings,
        )
    else:
        report = run_power(
            methods, eps_grid=args.eps, I=args.I, J=args.J, n=args.n,
            M=args.M, alpha=args.alpha, B=args.B, seed=seed,
            collect_times=args.timings,
        )
    if args.out:
        emit_report(report, "json", args.out)
    if args.csv:
        emit_report(report, "csv", args.csv)
    for method in report.methods:
        pairs = ", ".join(
            f"{g:.4g}:{r:.4f}" for g, r in zip(report.grid, report.rates[method])
        )
        sys.stdout.write(f"{method} [{report.grid_name}:rate] {pairs}\n")
    if args.timings and report.timings:
        for method, secs in report.timings.items():
            sys.stdout.write(f"{method} mean seconds/test {secs:.6f}\n")
    return report.to_dict()


def dispatch(argv) -> int:
    """Parse argv, run the requested command, and return the exit code."""
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse handles --help and usage errors
        return int(exc.code or 0)
    try:
        if args.command == "test":
            if args.test_kind == "independence":
                payload = _run_independence(args)
            else:
                payload = _run_gof(args)
            _emit(payload, args)
        elif args.command == "quadform":
            payload = _run_quadform(args)
            _emit(payload, args)
        elif args.command == "simulate":
            _run_simulate(args)
    except (InputError, FileNotFoundError, IsADirectoryError, PermissionError) as exc:
        # bad files, malformed data, or flag values failing a precondition
        sys.stderr.write(f"catstats: {exc}\n")
        return 2
    except CatstatsError as exc:
        sys.stderr.write(f"catstats: {exc}\n")
        return 1
    except OSError as exc:
        sys.stderr.write(f"catstats: {exc}\n")
        return 1
    return 0


def main() -> None:
    sys.exit(dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
