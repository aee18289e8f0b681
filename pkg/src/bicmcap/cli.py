"""Command-line front end.

Subcommands::

    bicmcap dmc-capacity CHANNEL          Blahut-Arimoto capacity of a matrix file
    bicmcap bicm-dmc CHANNEL              BICM capacity of a matrix file
    bicmcap bicm-awgn --m M --snr-db S    BICM capacity of Gray-labeled PAM over AWGN
    bicmcap sweep CONFIG                  bicm-awgn for every (m, snr_db) row of a CSV

Every run produces one record, written as a JSON object or as a CSV row
under a fixed, versioned header.  Floats are written with ``repr`` so they
read back bit for bit.  Exit status is 0 on success, 2 on bad input and 3
when a solver reports that it did not converge.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time
from pathlib import Path

import numpy as np

from .awgn import (
    DiscretizationRule,
    awgn_capacity,
    bicm_capacity_awgn,
    cm_capacity_awgn,
    db_to_linear,
    uniform_bicm_awgn,
)
from .bacm import BacmConfig, bacm_solve
from .baseline import MAX_EXHAUSTIVE_M, GridSpec, cm_capacity, exhaustive_bicm, uniform_bicm
from .dmc import ConvergenceError, blahut_arimoto, load_matrix

SCHEMA_VERSION = 1
CSV_HEADER_COMMENT = f"# bicmcap run record, schema version {SCHEMA_VERSION}"

COLUMNS = [
    "command",
    "m",
    "n_out",
    "snr_db",
    "value",
    "objective",
    "lam",
    "gamma",
    "realized_cost",
    "bits",
    "input_pmf",
    "uniform_bicm",
    "cm_capacity",
    "awgn_capacity",
    "gap_percent",
    "gap_percent_cm",
    "gap_percent_uniform",
    "exhaustive_value",
    "exhaustive_match",
    "outer_passes",
    "inner_iterations",
    "derivative_evaluations",
    "bisection_evaluations",
    "flags",
    "error",
    "config",
    "wall_time",
]
# columns holding lists of numbers (space separated in CSV)
_LIST_FLOAT = {"bits", "input_pmf"}
_LIST_INT = {"inner_iterations", "bisection_evaluations"}
_INT = {"m", "n_out", "outer_passes", "derivative_evaluations"}
_STR = {"command", "error"}

EXIT_OK, EXIT_INPUT, EXIT_NOT_CONVERGED = 0, 2, 3
NON_CONVERGENCE_FLAGS = {"not_converged", "cost_tolerance_missed", "cm_not_converged"}


class InputError(Exception):
    pass


def gap_percent(value, reference):
    return 100.0 * (1.0 - value / reference) if reference > 0 else None


def _telemetry(tel):
    if tel is None:
        return {}
    return {
        "outer_passes": tel.outer_passes,
        "inner_iterations": list(tel.inner_iterations),
        "derivative_evaluations": tel.derivative_evaluations,
        "bisection_evaluations": list(tel.bisection_evaluations),
    }


def new_record(command, config):
    rec = dict.fromkeys(COLUMNS)
    rec["command"] = command
    rec["config"] = config
    rec["flags"] = []
    return rec


# ---------------------------------------------------------------- serialization


def _float_text(x):
    return "" if x is None else repr(float(x))


def _cell(key, value):
    if value is None:
        return ""
    if key in _LIST_FLOAT:
        return " ".join(repr(float(v)) for v in value)
    if key in _LIST_INT:
        return " ".join(str(int(v)) for v in value)
    if key == "flags":
        return " ".join(value)
    if key == "config":
        return json.dumps(value, sort_keys=True)
    if key == "exhaustive_match":
        return "true" if value else "false"
    if key in _INT:
        return str(int(value))
    if key in _STR:
        return str(value)
    return _float_text(value)


def _parse_cell(key, text):
    if text == "":
        return [] if key == "flags" else None
    if key in _LIST_FLOAT:
        return [float(v) for v in text.split()]
    if key in _LIST_INT:
        return [int(v) for v in text.split()]
    if key == "flags":
        return text.split()
    if key == "config":
        return json.loads(text)
    if key == "exhaustive_match":
        return text == "true"
    if key in _INT:
        return int(text)
    if key in _STR:
        return text
    return float(text)


def _jsonable(rec):
    out = {"schema_version": SCHEMA_VERSION}
    for key in COLUMNS:
        value = rec.get(key)
        if isinstance(value, np.ndarray):
            value = value.tolist()
        if isinstance(value, float) and not math.isfinite(value):
            value = None
        out[key] = value
    return out


def records_to_json(records):
    """One object for a single record, a list otherwise; keys in fixed order."""
    data = [_jsonable(r) for r in records]
    return json.dumps(data[0] if len(data) == 1 else data, indent=2) + "\n"


def records_to_csv(records):
    buf = io.StringIO()
    buf.write(CSV_HEADER_COMMENT + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(COLUMNS)
    for rec in records:
        writer.writerow([_cell(k, rec.get(k)) for k in COLUMNS])
    return buf.getvalue()


def read_csv_records(text):
    """Parse the output of :func:`records_to_csv` back into records."""
    lines = [ln for ln in text.splitlines() if not ln.startswith("#")]
    reader = csv.DictReader(lines)
    return [{k: _parse_cell(k, row[k]) for k in COLUMNS} for row in reader]


def read_json_records(text):
    data = json.loads(text)
    data = data if isinstance(data, list) else [data]
    return [{k: d.get(k) for k in COLUMNS} for d in data]


# ---------------------------------------------------------------- commands


def _load_channel(path):
    try:
        return load_matrix(path)
    except FileNotFoundError:
        raise InputError(f"{path}: no such file") from None
    except ValueError as exc:
        raise InputError(str(exc)) from None


def _load_costs(path, M):
    if path is None:
        return None
    try:
        text = Path(path).read_text()
    except FileNotFoundError:
        raise InputError(f"{path}: no such file") from None
    costs = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        try:
            costs.append(float(body))
        except ValueError:
            raise InputError(f"{path}:{lineno}: cannot parse cost: {line!r}") from None
    if len(costs) != M:
        raise InputError(f"{path}: {len(costs)} costs given, the channel has {M} inputs")
    return np.array(costs)


def _parse_starts(text, m):
    if not text:
        return None
    starts = []
    for chunk in text.split(";"):
        try:
            start = [float(v) for v in chunk.split(",")]
        except ValueError:
            raise InputError(f"cannot parse start {chunk!r}") from None
        if len(start) != m:
            raise InputError(f"start {chunk!r} has {len(start)} entries, expected {m}")
        starts.append(start)
    return starts


def cmd_dmc_capacity(args):
    H = _load_channel(args.channel)
    w = _load_costs(args.cost_file, H.M)
    rec = new_record("dmc-capacity", {"channel": str(args.channel), "tol": args.tol,
                                       "lambda": args.lam})
    if args.lam and w is None:
        raise InputError("--lambda needs --cost-file")
    res = blahut_arimoto(H, w, args.lam if w is not None else None, tol=args.tol)
    rec.update(
        m=H.m, n_out=H.n, value=res.capacity, lam=res.lam, realized_cost=res.cost,
        input_pmf=res.input.tolist(),
        objective=res.capacity - res.lam * (res.cost or 0.0),
    )
    return [rec]


def cmd_bicm_dmc(args):
    H = _load_channel(args.channel)
    w = _load_costs(args.cost_file, H.M)
    if args.lam and w is None:
        raise InputError("--lambda needs --cost-file")
    starts = _parse_starts(args.starts, H.m)
    config = BacmConfig(precision_d=args.precision, starts=starts)
    rec = new_record("bicm-dmc", {
        "channel": str(args.channel), "lambda": args.lam, "precision": args.precision,
        "starts": starts, "cost_file": None if args.cost_file is None else str(args.cost_file),
        "exhaustive_check": args.exhaustive_check, "grid_step": args.grid_step,
    })
    try:
        res = bacm_solve(H, args.lam, w, config)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    rec.update(
        m=H.m, n_out=H.n, value=res.value, objective=res.objective, lam=res.lam,
        realized_cost=res.realized_cost, bits=res.bits.tolist(),
        uniform_bicm=uniform_bicm(H), cm_capacity=cm_capacity(H),
        flags=list(res.flags), **_telemetry(res.telemetry),
    )
    if args.exhaustive_check:
        if H.m > MAX_EXHAUSTIVE_M:
            raise InputError(f"--exhaustive-check supports m <= {MAX_EXHAUSTIVE_M}")
        grid = exhaustive_bicm(H, GridSpec(args.grid_step, 10), args.lam, w)
        rec["exhaustive_value"] = grid.objective
        diff = grid.objective - res.objective
        rec["exhaustive_match"] = abs(diff) <= 1e-3
        status = "match within 1e-3" if rec["exhaustive_match"] else "MISMATCH beyond 1e-3"
        print(f"exhaustive check: {status} (grid minus BACM = {diff:.3e} bits)",
              file=sys.stderr)
    return [rec]


def run_awgn(m, snr_db, n_out=200, sigma_span=6.0, precision=1e-5, gamma_grid=None):
    """One bicm-awgn record; shared by the subcommand and the sweep."""
    if not 1 <= m <= 6:
        raise InputError(f"m must lie in 1..6, got {m}")
    if not math.isfinite(snr_db):
        raise InputError("snr_db must be finite")
    rule = DiscretizationRule(n_out, sigma_span)
    config = BacmConfig(precision_d=precision)
    snr = db_to_linear(snr_db)
    rec = new_record("bicm-awgn", {
        "m": m, "snr_db": snr_db, "bins": n_out, "sigma_span": sigma_span,
        "precision": precision, "gamma_grid": gamma_grid,
    })
    best = bicm_capacity_awgn(m, snr, gamma_grid, rule, config)
    cm = cm_capacity_awgn(m, snr, rule, gamma_grid)
    uni = uniform_bicm_awgn(m, snr, rule)
    cap = awgn_capacity(snr)
    res = best.result
    rec.update(
        m=m, n_out=n_out, snr_db=snr_db, value=best.value, objective=res.objective,
        lam=best.lam, gamma=best.gamma, realized_cost=res.realized_cost,
        bits=res.bits.tolist(), uniform_bicm=uni, cm_capacity=cm.value,
        awgn_capacity=cap, gap_percent=gap_percent(best.value, cap),
        gap_percent_cm=gap_percent(cm.value, cap), gap_percent_uniform=gap_percent(uni, cap),
        flags=sorted(set(best.flags) | set(cm.flags)), **_telemetry(res.telemetry),
    )
    return rec


def _parse_gamma_grid(text):
    if text is None:
        return None
    try:
        grid = [float(v) for v in text.split(",")]
    except ValueError:
        raise InputError(f"cannot parse gamma grid {text!r}") from None
    if not grid or any(g <= 0 for g in grid):
        raise InputError("gamma grid must list positive values")
    return grid


def cmd_bicm_awgn(args):
    try:
        return [run_awgn(args.m, args.snr_db, args.bins, args.sigma_span, args.precision,
                         _parse_gamma_grid(args.gamma_grid))]
    except ValueError as exc:
        raise InputError(str(exc)) from None


def _sweep_rows(path):
    try:
        text = Path(path).read_text()
    except FileNotFoundError:
        raise InputError(f"{path}: no such file") from None
    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
    if not lines:
        return []
    reader = csv.DictReader(lines)
    missing = {"m", "snr_db"} - set(reader.fieldnames or ())
    if missing:
        raise InputError(f"{path}: missing column(s) {', '.join(sorted(missing))}")
    return list(reader)


def cmd_sweep(args):
    records = []
    for row in _sweep_rows(args.config):
        try:
            kwargs = {
                "m": int(row["m"]),
                "snr_db": float(row["snr_db"]),
                "n_out": int(row.get("bins") or args.bins),
                "sigma_span": float(row.get("sigma_span") or args.sigma_span),
                "precision": float(row.get("precision") or args.precision),
                "gamma_grid": _parse_gamma_grid(row.get("gamma_grid") or None),
            }
            rec = run_awgn(**kwargs)
        except (InputError, ValueError, ConvergenceError, RuntimeError) as exc:
            rec = new_record("bicm-awgn", dict(row))
            rec["error"] = f"{type(exc).__name__}: {exc}"
        rec["command"] = "sweep"
        records.append(rec)
    return records


# ---------------------------------------------------------------- entry point


def build_parser():
    parser = argparse.ArgumentParser(prog="bicmcap", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def output_flags(p, default="json"):
        p.add_argument("--format", choices=("json", "csv"), default=default)
        p.add_argument("--out", type=Path, help="write here instead of stdout")
        p.add_argument("--timing", action="store_true",
                       help="record wall time (output is then no longer reproducible)")

    p = sub.add_parser("dmc-capacity", help="Blahut-Arimoto capacity of a channel file")
    p.add_argument("channel", type=Path)
    p.add_argument("--cost-file", type=Path)
    p.add_argument("--lambda", dest="lam", type=float, default=0.0)
    p.add_argument("--tol", type=float, default=1e-9)
    output_flags(p)
    p.set_defaults(func=cmd_dmc_capacity)

    p = sub.add_parser("bicm-dmc", help="BICM capacity of a channel file")
    p.add_argument("channel", type=Path)
    p.add_argument("--lambda", dest="lam", type=float, default=0.0)
    p.add_argument("--cost-file", type=Path)
    p.add_argument("--precision", type=float, default=1e-5)
    p.add_argument("--starts", help="starting bit pmfs, e.g. '0.5,0.5;0.9,0.1'")
    p.add_argument("--exhaustive-check", action="store_true")
    p.add_argument("--grid-step", type=float, default=1e-3)
    output_flags(p)
    p.set_defaults(func=cmd_bicm_dmc)

    p = sub.add_parser("bicm-awgn", help="BICM capacity of 2^m-PAM over AWGN")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--snr-db", type=float, required=True)
    p.add_argument("--bins", type=int, default=200)
    p.add_argument("--sigma-span", type=float, default=6.0)
    grid = p.add_mutually_exclusive_group()
    grid.add_argument("--gamma-grid", help="comma-separated candidate scalings")
    grid.add_argument("--gamma-auto", action="store_true",
                      help="golden-section search over the scaling (default)")
    p.add_argument("--precision", type=float, default=1e-5)
    output_flags(p)
    p.set_defaults(func=cmd_bicm_awgn)

    p = sub.add_parser("sweep", help="bicm-awgn over a CSV of (m, snr_db) rows")
    p.add_argument("config", type=Path)
    p.add_argument("--bins", type=int, default=200)
    p.add_argument("--sigma-span", type=float, default=6.0)
    p.add_argument("--precision", type=float, default=1e-5)
    output_flags(p, default="csv")
    p.set_defaults(func=cmd_sweep)
    return parser


def exit_status(records):
    for rec in records:
        if rec.get("error") or NON_CONVERGENCE_FLAGS & set(rec.get("flags") or ()):
            return EXIT_NOT_CONVERGED
    return EXIT_OK


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    start = time.perf_counter()
    try:
        records = args.func(args)
    except InputError as exc:
        print(f"bicmcap: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ConvergenceError as exc:
        print(f"bicmcap: not converged: {exc}", file=sys.stderr)
        return EXIT_NOT_CONVERGED
    if args.timing:
        elapsed = time.perf_counter() - start
        for rec in records:
            rec["wall_time"] = elapsed
    text = records_to_csv(records) if args.format == "csv" else records_to_json(records)
    if args.out is None:
        sys.stdout.write(text)
    else:
        args.out.write_text(text)
    return exit_status(records)


if __name__ == "__main__":
    sys.exit(main())
