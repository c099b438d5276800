"""Command-line entry point: gen, select, reconstruct, eval, bench.

Exit codes: 0 on success, 1 on data or runtime errors, 2 on usage errors.
A JSON file passed via --config supplies defaults; explicit flags win.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

from .bench import run_sweep, sweep_spec_from_json_dict, emit_tables
from .distance import information_loss, relative_error
from .reconstruct import reconstruct_targets
from .selection import (
    SolverConfig,
    document_from_json,
    document_from_result,
    document_to_json,
    gsa,
    ssa,
)
from .tsd import (
    ParseError,
    SyntheticSpec,
    TsdMatrix,
    generate_synthetic,
    load_wide_csv,
    normalize,
    save_wide_csv,
)
from .affine import write_coefficients_csv


def _load_config(path):
    if path is None:
        return {}
    with open(path) as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise ParseError("config file must hold a JSON object")
    return data


def _pick(args_value, config, key, default):
    """Explicit flag > config file entry > hard default."""
    if args_value is not None:
        return args_value
    if key in config:
        return config[key]
    return default


def cmd_gen(args, parser) -> int:
    config = _load_config(args.config)
    fields = {
        "n_objects": _pick(args.objects, config, "n_objects", None),
        "n_times": _pick(args.times, config, "n_times", None),
        "n_groups": _pick(args.groups, config, "n_groups", None),
        "noise_level": float(_pick(args.noise, config, "noise_level", 0.0)),
        "independent_fraction": float(
            _pick(args.independent_fraction, config, "independent_fraction", 0.0)
        ),
        "seed": int(_pick(args.seed, config, "seed", 0)),
    }
    for key in ("n_objects", "n_times", "n_groups"):
        if fields[key] is None:
            parser.error(f"missing required value for {key}")
        fields[key] = int(fields[key])
    try:
        spec = SyntheticSpec(**fields)
    except ValueError as exc:
        parser.error(str(exc))
    matrix, labels = generate_synthetic(spec)
    save_wide_csv(args.output, matrix)
    truth_path = args.truth or str(Path(args.output).with_suffix(".truth.json"))
    truth = {
        "spec": fields,
        "labels": {i: g for i, g in zip(matrix.object_ids, labels)},
    }
    Path(truth_path).write_text(json.dumps(truth, indent=2) + "\n")
    print(f"wrote {args.output} ({matrix.n_times}x{matrix.n_objects}) and {truth_path}")
    return 0


def cmd_select(args, parser) -> int:
    config_file = _load_config(args.config)
    epsilon = float(_pick(args.epsilon, config_file, "epsilon", 0.05))
    delta = float(_pick(args.delta, config_file, "delta", 0.0))
    method = str(_pick(args.method, config_file, "method", "gsa")).lower()
    measure = str(_pick(args.measure, config_file, "measure", "aff")).lower()
    pivot = str(_pick(args.pivot, config_file, "pivot_policy", "max_variance"))
    ridge = float(_pick(args.ridge, config_file, "ridge", 0.0))
    if epsilon <= 0:
        parser.error("epsilon must be positive")
    if epsilon > 1:
        parser.error("epsilon must be at most 1")
    if not 0 <= delta <= 1:
        parser.error("delta must be in [0, 1]")
    if method not in ("ssa", "gsa"):
        parser.error("method must be ssa or gsa")
    if measure not in ("aff", "ls"):
        parser.error("measure must be aff or ls")

    matrix = load_wide_csv(args.input)
    scaled, norm = normalize(matrix)
    solver_config = SolverConfig(
        epsilon=epsilon, delta=delta, measure=measure,
        pivot_policy=pivot, ridge=ridge,
    )
    engine = ssa if method == "ssa" else gsa
    result = engine(scaled, solver_config)
    document = document_from_result(scaled, result, norm)

    out = Path(args.output)
    out.write_text(document_to_json(document))
    coeff_path = args.coefficients or str(out.with_suffix(".coefficients.csv"))
    write_coefficients_csv(
        coeff_path,
        [
            (t, document.central_id(t), document.assignments[t].coeffs)
            for t in document.target_ids()
        ],
    )
    dominant_path = args.dominant or str(out.with_suffix(".dominant.csv"))
    dominant = TsdMatrix(
        matrix.values[:, list(result.dominant)],
        [matrix.object_ids[p] for p in result.dominant],
        matrix.timestamps,
        matrix.unit,
    )
    save_wide_csv(dominant_path, dominant)
    print(f"dsn_ratio={result.dsn_ratio:.6f} budget_used={result.budget_used}")
    return 0


def cmd_reconstruct(args, parser) -> int:
    document = document_from_json(Path(args.selection).read_text())
    dominant = load_wide_csv(args.dominant, unit=document.unit, min_cols=1)
    report = reconstruct_targets(dominant, document)
    if report.reconstructed is None:
        Path(args.output).write_text("time\n")
        print("no targets to reconstruct; wrote empty panel")
        return 0
    save_wide_csv(args.output, report.reconstructed)
    print(f"wrote {args.output} ({report.reconstructed.n_objects} targets)")
    return 0


def cmd_eval(args, parser) -> int:
    if args.epsilon is not None and args.epsilon <= 0:
        parser.error("epsilon must be positive")
    original = load_wide_csv(args.original, min_cols=1)
    recon = load_wide_csv(args.recon, min_cols=1)
    index = {i: k for k, i in enumerate(original.object_ids)}
    missing = [i for i in recon.object_ids if i not in index]
    if missing:
        raise ParseError(f"original panel lacks columns: {', '.join(missing)}")
    orig_values = original.values[:, [index[i] for i in recon.object_ids]]
    if orig_values.shape[0] != recon.n_times:
        raise ParseError("original and reconstructed panels disagree on rows")
    loss = information_loss(orig_values, recon.values)
    payload = {
        "n_columns": recon.n_objects,
        "rmse": {i: float(v) for i, v in zip(recon.object_ids, loss.rmse)},
        "mean_rmse": loss.mean_rmse,
        "max_abs_error": float(loss.loss_matrix.max()) if loss.loss_matrix.size else 0.0,
    }
    if args.epsilon is not None:
        violations = [
            i
            for k, i in enumerate(recon.object_ids)
            if relative_error(orig_values[:, k], recon.values[:, k]) > args.epsilon
        ]
        payload["epsilon"] = args.epsilon
        payload["violations"] = violations
        payload["violation_fraction"] = len(violations) / max(1, recon.n_objects)
    text = json.dumps(payload, indent=2) + "\n"
    if args.output:
        Path(args.output).write_text(text)
        print(f"mean_rmse={loss.mean_rmse:.6g}")
    else:
        sys.stdout.write(text)
    return 0


def cmd_bench(args, parser) -> int:
    threads = args.threads
    if threads is None:
        threads = int(os.environ.get("DOMTS_THREADS", "1"))
    if threads < 1:
        parser.error("threads must be >= 1")
    with open(args.sweep) as fh:
        spec = sweep_spec_from_json_dict(json.load(fh))
    report = run_sweep(spec, threads=threads)
    written = emit_tables(report, args.output)
    if not args.no_figures:
        from .figures import render_figures

        written += render_figures(report, args.output)
    failures = [r for r in report.rows if r.error is not None]
    print(f"ran {len(report.rows)} cells ({len(failures)} failed); wrote {len(written)} files to {args.output}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="domts",
        description="Dominant-subset selection and affine reconstruction for time-series panels",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("gen", help="generate a synthetic panel with planted groups")
    p.add_argument("--objects", type=int, help="number of object columns")
    p.add_argument("--times", type=int, help="number of observation rows")
    p.add_argument("--groups", type=int, help="number of planted groups")
    p.add_argument("--noise", type=float, help="relative noise level")
    p.add_argument("--independent-fraction", type=float, help="fraction of unrelated columns")
    p.add_argument("--seed", type=int, help="random seed")
    p.add_argument("--config", help="JSON config with SyntheticSpec field names")
    p.add_argument("--truth", help="path for the ground-truth JSON (default: <output>.truth.json)")
    p.add_argument("-o", "--output", required=True, help="wide CSV output path")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("select", help="select a dominant column subset")
    p.add_argument("input", help="wide CSV panel")
    p.add_argument("--method", choices=["ssa", "gsa"], help="selection algorithm")
    p.add_argument("--measure", choices=["aff", "ls"], help="distance measure")
    p.add_argument("--epsilon", type=float, help="relative error bound")
    p.add_argument("--delta", type=float, help="budget fraction for over-bound targets")
    p.add_argument("--pivot", help="pivot policy: first_column | max_variance | index:K | random:SEED")
    p.add_argument("--ridge", type=float, help="ridge added to pair fits")
    p.add_argument("--config", help="JSON config merged under explicit flags")
    p.add_argument("--coefficients", help="coefficients CSV path (default: <output>.coefficients.csv)")
    p.add_argument("--dominant", help="dominant-columns CSV path (default: <output>.dominant.csv)")
    p.add_argument("-o", "--output", required=True, help="selection JSON output path")
    p.set_defaults(func=cmd_select)

    p = sub.add_parser("reconstruct", help="rebuild targets from dominant columns")
    p.add_argument("selection", help="selection JSON from `select`")
    p.add_argument("dominant", help="dominant-columns wide CSV")
    p.add_argument("-o", "--output", required=True, help="reconstructed wide CSV path")
    p.set_defaults(func=cmd_reconstruct)

    p = sub.add_parser("eval", help="compare a reconstruction against the originals")
    p.add_argument("original", help="original wide CSV panel")
    p.add_argument("recon", help="reconstructed wide CSV panel")
    p.add_argument("--epsilon", type=float, help="report violations above this relative error")
    p.add_argument("-o", "--output", help="report JSON path (default: stdout)")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("bench", help="run a sweep grid and emit tables and figures")
    p.add_argument("sweep", help="sweep spec JSON")
    p.add_argument("--threads", type=int, help="parallel cells (default: DOMTS_THREADS or 1)")
    p.add_argument("--no-figures", action="store_true", help="skip figure rendering")
    p.add_argument("-o", "--output", required=True, help="results directory")
    p.set_defaults(func=cmd_bench)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args, parser)
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (OSError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
