"""Command-line entry point: ``hubnet <subcommand> ...``.

Exit codes: 0 success, 1 identifiability conditions not met, 2 invalid
input, 3 infeasible instance, 4 enumeration cap exceeded.
"""

from __future__ import annotations

import argparse
import csv
import io as _io
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import io
from .estimate import INIT_STRATEGIES, FitConfig, InfeasibleInstanceError, hard_em_fit
from .evaluate import METRICS, ReplicateError, mislabel_fraction, rmse, run_replicates
from .identifiability import EnumerationLimitError, check_conditions, outcome_distribution
from .model import InvalidInputError, Variant, from_external, mle_given_labels, to_external
from .simulate import SimDesign, simulate

EXIT_OK, EXIT_CONDITIONS, EXIT_INVALID, EXIT_INFEASIBLE, EXIT_LIMIT = 0, 1, 2, 3, 4

T_GRID = (1000, 1500, 2000)
TABLE_CELLS = ((10, 100), (10, 1000), (20, 100), (20, 1000))
TABLE_VARIANT = {1: Variant.ASYMMETRIC, 2: Variant.NULL}

log = logging.getLogger("hubnet")


def default_seed() -> int:
    value = os.environ.get("HUBNET_SEED")
    if value is None:
        return 0
    try:
        return int(value)
    except ValueError:
        raise InvalidInputError(f"HUBNET_SEED={value!r} is not an integer") from None


# -- subcommands ----------------------------------------------------------------

def cmd_simulate(args) -> int:
    design = SimDesign(
        n_L=args.nL, n=args.n, T=args.T, variant=args.variant, rho0=args.rho0,
        pi_const=args.pi, in_range=tuple(args.in_range), out_range=tuple(args.out_range),
        seed=args.seed)
    params, data, z = simulate(design)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    io.write_params(out / "params.json", params)
    io.write_groups(out / "groups.csv", data)
    io.write_labels(out / "labels.csv", z, design.variant)
    print(f"simulated variant={design.variant.value} n={design.n} n_L={design.n_L} "
          f"T={design.T} seed={design.seed} -> {out}")
    return EXIT_OK


def fit_to_dict(result, config: FitConfig, data) -> dict:
    variant = result.variant
    return {
        "variant": variant.value,
        "n_L": result.n_L,
        "n": data.n,
        "T": data.T,
        "labels": to_external(result.labels, variant).tolist(),
        "A_hat": result.A_hat.tolist(),
        "rho_hat": result.rho_hat.tolist(),
        "log_profile_lik": result.log_profile_lik,
        "trace": result.trace,
        "iterations": result.iterations,
        "converged": result.converged,
        "empty_labels": to_external(np.flatnonzero(result.empty_rows), variant).tolist(),
        "restart_index": result.restart_index,
        "restart_logliks": result.restart_logliks,
        "restarts": config.restarts,
        "max_iterations": config.max_iterations,
        "clamp_eps": config.clamp_eps,
        "init_strategy": config.init_strategy,
        "seed": config.seed,
    }


def cmd_fit(args) -> int:
    data = io.read_groups(args.groups)
    variant = Variant.parse(args.variant)
    init_labels = None
    if args.init == "provided-labels":
        if not args.init_labels:
            raise InvalidInputError("--init provided-labels needs --init-labels")
        init_labels = io.read_labels(args.init_labels, variant)
    config = FitConfig(restarts=args.restarts, max_iterations=args.max_iterations,
                       variant=variant, clamp_eps=args.clamp_eps, seed=args.seed,
                       init_strategy=args.init, init_labels=init_labels)
    result = hard_em_fit(data, args.nL, config)
    io.write_json(args.out, fit_to_dict(result, config, data))
    if args.labels_out:
        io.write_labels(args.labels_out, result.labels, variant)
    print(f"fit variant={variant.value} n_L={args.nL} T={data.T} "
          f"log_profile_lik={result.log_profile_lik:.6f} restart={result.restart_index} "
          f"iterations={result.iterations} -> {args.out}")
    return EXIT_OK


def cmd_evaluate(args) -> int:
    fit = io.read_json(args.fit)
    params = io.read_params(args.params)
    data = io.read_groups(args.groups)
    true_z = io.read_labels(args.labels, params.variant)
    if fit.get("variant") != params.variant.value:
        raise InvalidInputError("fit and params disagree on the model variant")
    est_z = from_external(fit["labels"], params.variant)
    A_hat = np.asarray(fit["A_hat"], dtype=float)
    if data.n != params.n or len(true_z) != data.T:
        raise InvalidInputError("groups, labels and params disagree in shape")
    known = mle_given_labels(data, true_z, params.variant, params.n_L)
    metrics = {
        "variant": params.variant.value,
        "n_L": params.n_L, "n": params.n, "T": data.T,
        "mislabel": mislabel_fraction(est_z, true_z),
        "rmse": rmse(A_hat, params.A),
        "rmse_star": rmse(known.A, params.A),
        "rmse_includes_null_row": params.variant is Variant.NULL,
    }
    text = json.dumps(metrics, indent=2)
    print(text)
    if args.out:
        Path(args.out).write_text(text + "\n", encoding="utf-8", newline="\n")
    return EXIT_OK


def parse_cell(text: str) -> tuple[int, int]:
    """``nL=10,n=100`` -> (10, 100)."""
    fields = {}
    for part in text.split(","):
        key, sep, value = part.partition("=")
        if not sep:
            raise InvalidInputError(f"bad cell {text!r}; expected nL=..,n=..")
        fields[key.strip()] = int(value)
    if set(fields) != {"nL", "n"}:
        raise InvalidInputError(f"bad cell {text!r}; expected nL=..,n=..")
    return fields["nL"], fields["n"]


REPLICATE_COLUMNS = (
    ["variant", "n_L", "n", "T"]
    + [f"{m}_{s}" for m in METRICS for s in ("mean", "sd")]
    + list(METRICS)
    + ["R", "restarts", "seed", "rmse_includes_null_row", "error"]
)


def replicate_table(variant, cells, T_values, R, seed, fit, jobs, fail_fast=False):
    """Rows of the results table, one per (cell, T), in a fixed order.

    Returns ``(rows, first_error)``.  Cell errors are recorded and skipped
    unless ``fail_fast``.
    """
    rows, first_error = [], None
    for n_L, n in cells:
        for T in T_values:
            design = SimDesign(n_L=n_L, n=n, T=T, variant=variant, seed=seed)
            try:
                row = run_replicates(design, fit, R, jobs).row()
                row["error"] = ""
            except ReplicateError as exc:
                if fail_fast:
                    raise
                log.error("cell nL=%d n=%d T=%d failed: %s", n_L, n, T, exc)
                first_error = first_error or exc
                row = {"variant": variant.value, "n_L": n_L, "n": n, "T": T,
                       "R": R, "restarts": fit.restarts, "seed": seed, "error": str(exc)}
            rows.append(row)
    return rows, first_error


def rows_to_csv(rows) -> str:
    buf = _io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=REPLICATE_COLUMNS, lineterminator="\n",
                            extrasaction="ignore")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in row.items()})
    return buf.getvalue()


def cmd_replicate(args) -> int:
    variant = TABLE_VARIANT[args.table] if args.variant is None else Variant.parse(args.variant)
    cells = [parse_cell(c) for c in args.cells] if args.cells else list(TABLE_CELLS)
    T_values = [int(t) for t in str(args.T).split(",")]
    fit = FitConfig(restarts=args.restarts, max_iterations=args.max_iterations,
                    variant=variant, init_strategy=args.init)
    rows, error = replicate_table(variant, cells, T_values, args.R, args.seed, fit,
                                  args.jobs or None, args.fail_fast)
    text = rows_to_csv(rows)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8", newline="\n")
    else:
        sys.stdout.write(text)
    if args.json:
        io.write_json(args.json, rows)
    if error is not None:
        return _exit_code(error.cause)
    return EXIT_OK


def cmd_check(args) -> int:
    params = io.read_params(args.params)
    report = check_conditions(params, args.tol).to_dict()
    if args.enumerate:
        _, probs = outcome_distribution(params, args.cap)
        report["enumeration"] = {"outcomes": int(probs.size), "total_mass": float(probs.sum())}
    text = json.dumps(report, indent=2)
    print(text)
    if args.out:
        Path(args.out).write_text(text + "\n", encoding="utf-8", newline="\n")
    return EXIT_OK if report["passed"] else EXIT_CONDITIONS


# -- parser ---------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hubnet", description="Hub model simulation, hard EM fitting and checks.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help):
        p = sub.add_parser(name, help=help)
        p.add_argument("--config", help="JSON file of flag values; explicit flags win")
        p.set_defaults(func=func)
        return p

    p = add("simulate", cmd_simulate, "draw parameters and grouped data")
    p.add_argument("--variant", default="asymmetric", choices=["asymmetric", "null"])
    p.add_argument("--nL", type=int, default=10)
    p.add_argument("--n", type=int, default=100)
    p.add_argument("--T", type=int, default=1000)
    p.add_argument("--rho0", type=float, default=0.2)
    p.add_argument("--pi", type=float, default=0.05)
    p.add_argument("--in-range", type=float, nargs=2, default=[0.2, 0.4], metavar=("LO", "HI"))
    p.add_argument("--out-range", type=float, nargs=2, default=[0.0, 0.2], metavar=("LO", "HI"))
    p.add_argument("--seed", type=int)
    p.add_argument("--out-dir", default=".")

    p = add("fit", cmd_fit, "hard EM fit of groups.csv")
    p.add_argument("groups")
    p.add_argument("--nL", type=int, required=True)
    p.add_argument("--variant", default="asymmetric", choices=["asymmetric", "null"])
    p.add_argument("--restarts", type=int, default=20)
    p.add_argument("--max-iterations", type=int, default=200)
    p.add_argument("--clamp-eps", type=float, default=1e-9)
    p.add_argument("--init", default="mixed", choices=INIT_STRATEGIES)
    p.add_argument("--init-labels", help="labels.csv used with --init provided-labels")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", default="fit.json")
    p.add_argument("--labels-out")

    p = add("evaluate", cmd_evaluate, "mislabel fraction, RMSE and known-label RMSE")
    p.add_argument("fit")
    p.add_argument("--params", required=True)
    p.add_argument("--groups", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--out")

    p = add("replicate", cmd_replicate, "Monte-Carlo replication of the results tables")
    p.add_argument("--table", type=int, choices=[1, 2], default=1)
    p.add_argument("--variant", choices=["asymmetric", "null"],
                   help="overrides the variant implied by --table")
    p.add_argument("--cells", action="append", help="nL=..,n=..; repeatable")
    p.add_argument("--T", default=",".join(map(str, T_GRID)), help="comma-separated sample sizes")
    p.add_argument("--R", type=int, default=500)
    p.add_argument("--restarts", type=int, default=20)
    p.add_argument("--max-iterations", type=int, default=200)
    p.add_argument("--init", default="mixed", choices=[s for s in INIT_STRATEGIES
                                                       if s != "provided-labels"])
    p.add_argument("--seed", type=int)
    p.add_argument("--jobs", type=int, default=0, help="worker processes; 0 = all cores")
    p.add_argument("--fail-fast", action="store_true")
    p.add_argument("--out", help="CSV path (default stdout)")
    p.add_argument("--json", help="also write rows as JSON")

    p = add("check-identifiability", cmd_check, "check sufficient identifiability conditions")
    p.add_argument("params")
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--enumerate", action="store_true",
                   help="also enumerate all 2^n outcomes and report total mass")
    p.add_argument("--cap", type=int, default=14)
    p.add_argument("--out")
    return parser


def parse_args(argv=None):
    """Parse with config-file defaults: explicit flags > config > built-in."""
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "config", None):
        config = io.read_json(args.config)
        if not isinstance(config, dict):
            raise InvalidInputError("config file must hold a JSON object")
        subparser = parser._subparsers._group_actions[0].choices[args.command]
        known = {a.dest for a in subparser._actions}
        unknown = set(config) - known
        if unknown:
            raise InvalidInputError(f"unknown config keys: {sorted(unknown)}")
        subparser.set_defaults(**config)
        args = parser.parse_args(argv)
    if hasattr(args, "seed") and args.seed is None:
        args.seed = default_seed()
    return args


def _exit_code(exc: BaseException) -> int:
    if isinstance(exc, InfeasibleInstanceError):
        return EXIT_INFEASIBLE
    if isinstance(exc, EnumerationLimitError):
        return EXIT_LIMIT
    return EXIT_INVALID


def main(argv=None) -> int:
    try:
        args = parse_args(argv)
    except (InvalidInputError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ReplicateError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _exit_code(exc.cause)
    except InvalidInputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _exit_code(exc)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
