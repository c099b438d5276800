"""Sweep harness: run method x epsilon x delta x dataset grids end to end.

Each cell loads or generates a panel, normalizes it, selects, reconstructs
against the originals, and records the dominant-set ratio, the mean RMSE in
original units, wall time, budget use, and the per-central target counts.
Cell failures are recorded in the row and never abort the sweep.  Absolute
numbers depend on the data and the machine; sweeps are meant to expose
shapes and orderings, and the emitted tables say so in their captions.
"""

from __future__ import annotations

import csv
import importlib.resources
import json
import math
import statistics
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

from .distance import MEASURES
from .reconstruct import reconstruct_targets
from .selection import (
    SolverConfig,
    document_from_result,
    gsa,
    ssa,
)
from .tsd import SyntheticSpec, TsdMatrix, generate_synthetic, load_wide_csv, normalize

METHODS = ("ssa_aff", "ssa_ls", "gsa_aff", "gsa_ls")


def split_method(method: str) -> tuple[str, str]:
    algorithm, _, measure = method.lower().partition("_")
    if algorithm not in ("ssa", "gsa") or measure not in MEASURES:
        raise ValueError(f"unknown method {method!r}; expected one of {METHODS}")
    return algorithm, measure


@dataclass(frozen=True)
class DatasetSpec:
    """One sweep data source: a wide CSV path or a synthetic recipe."""

    name: str
    path: str | None = None
    synthetic: SyntheticSpec | None = None

    def __post_init__(self):
        if (self.path is None) == (self.synthetic is None):
            raise ValueError("dataset needs exactly one of path or synthetic")

    def load(self, repetition: int) -> TsdMatrix:
        if self.path is not None:
            return load_wide_csv(self.path)
        spec = replace(self.synthetic, seed=self.synthetic.seed + repetition)
        matrix, _ = generate_synthetic(spec)
        return matrix


@dataclass(frozen=True)
class SweepSpec:
    """The full grid to run; repetitions shift each synthetic dataset's seed."""

    methods: tuple[str, ...]
    epsilons: tuple[float, ...]
    deltas: tuple[float, ...]
    datasets: tuple[DatasetSpec, ...]
    repetitions: int = 1
    seed: int = 0
    pivot_policy: str = "max_variance"
    ridge: float = 0.0

    def __post_init__(self):
        if not (self.methods and self.epsilons and self.deltas and self.datasets):
            raise ValueError("methods, epsilons, deltas and datasets must be non-empty")
        if self.repetitions < 1:
            raise ValueError("repetitions must be >= 1")
        for method in self.methods:
            split_method(method)


@dataclass(frozen=True)
class SweepRow:
    """One executed cell of the sweep grid."""

    method: str
    epsilon: float
    delta: float
    dataset: str
    repetition: int
    n: int
    m: int
    dsn_ratio: float
    mean_rmse: float
    wall_time_seconds: float
    budget_used: int
    target_counts: tuple[int, ...]
    error: str | None = None


@dataclass(frozen=True)
class SweepReport:
    rows: tuple[SweepRow, ...]


def sweep_spec_from_json_dict(data: dict) -> SweepSpec:
    datasets = []
    for entry in data["datasets"]:
        if "path" in entry:
            datasets.append(DatasetSpec(name=entry.get("name", entry["path"]), path=entry["path"]))
        else:
            syn = SyntheticSpec(**entry["synthetic"])
            datasets.append(DatasetSpec(name=entry.get("name", "synthetic"), synthetic=syn))
    return SweepSpec(
        methods=tuple(data["methods"]),
        epsilons=tuple(float(e) for e in data["epsilons"]),
        deltas=tuple(float(d) for d in data["deltas"]),
        datasets=tuple(datasets),
        repetitions=int(data.get("repetitions", 1)),
        seed=int(data.get("seed", 0)),
        pivot_policy=data.get("pivot_policy", "max_variance"),
        ridge=float(data.get("ridge", 0.0)),
    )


def _run_cell(spec: SweepSpec, dataset: DatasetSpec, repetition: int,
              method: str, epsilon: float, delta: float) -> SweepRow:
    try:
        matrix = dataset.load(spec.seed + repetition)
        scaled, norm = normalize(matrix)
        algorithm, measure = split_method(method)
        config = SolverConfig(
            epsilon=epsilon, delta=delta, measure=measure,
            pivot_policy=spec.pivot_policy, ridge=spec.ridge,
        )
        engine = ssa if algorithm == "ssa" else gsa
        start = time.perf_counter()
        result = engine(scaled, config)
        wall = time.perf_counter() - start
        document = document_from_result(scaled, result, norm)
        dominant = TsdMatrix(
            matrix.values[:, list(result.dominant)],
            [matrix.object_ids[p] for p in result.dominant],
            matrix.timestamps,
            matrix.unit,
        )
        report = reconstruct_targets(dominant, document, originals=matrix)
        mean_rmse = report.loss.mean_rmse if report.loss is not None else 0.0
        return SweepRow(
            method=method, epsilon=epsilon, delta=delta, dataset=dataset.name,
            repetition=repetition, n=matrix.n_objects, m=matrix.n_times,
            dsn_ratio=result.dsn_ratio, mean_rmse=mean_rmse,
            wall_time_seconds=wall, budget_used=result.budget_used,
            target_counts=result.target_counts(),
        )
    except Exception as exc:  # cell failures are data, not crashes
        return SweepRow(
            method=method, epsilon=epsilon, delta=delta, dataset=dataset.name,
            repetition=repetition, n=0, m=0, dsn_ratio=math.nan,
            mean_rmse=math.nan, wall_time_seconds=math.nan, budget_used=0,
            target_counts=(), error=f"{type(exc).__name__}: {exc}",
        )


def run_sweep(spec: SweepSpec, threads: int = 1) -> SweepReport:
    """Execute every cell; rows come back in a fixed grid order."""
    cells = [
        (dataset, rep, method, epsilon, delta)
        for dataset in spec.datasets
        for rep in range(spec.repetitions)
        for method in spec.methods
        for epsilon in spec.epsilons
        for delta in spec.deltas
    ]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(lambda c: _run_cell(spec, *c), cells))
    else:
        rows = [_run_cell(spec, *cell) for cell in cells]
    return SweepReport(tuple(rows))


# ---------------------------------------------------------------------------
# Emission

_CAPTION = (
    "Values depend on the dataset and machine; compare shapes and orderings, "
    "not absolute numbers."
)


def report_to_json_dict(report: SweepReport) -> dict:
    return {
        "caption": _CAPTION,
        "rows": [
            {
                "method": r.method,
                "epsilon": r.epsilon,
                "delta": r.delta,
                "dataset": r.dataset,
                "repetition": r.repetition,
                "n": r.n,
                "m": r.m,
                "dsn_ratio": None if math.isnan(r.dsn_ratio) else r.dsn_ratio,
                "mean_rmse": None if math.isnan(r.mean_rmse) else r.mean_rmse,
                "wall_time_seconds": (
                    None if math.isnan(r.wall_time_seconds) else r.wall_time_seconds
                ),
                "budget_used": r.budget_used,
                "target_counts": list(r.target_counts),
                "error": r.error,
            }
            for r in report.rows
        ],
    }


def validate_report_json(data: dict) -> None:
    """Check a report dict against the shipped JSON schema."""
    import jsonschema

    schema = json.loads(
        importlib.resources.files("domts.schemas")
        .joinpath("sweep_report.schema.json")
        .read_text()
    )
    jsonschema.validate(data, schema)


ROWS_HEADER = (
    "method", "epsilon", "delta", "dataset", "repetition", "n", "m",
    "dsn_ratio", "mean_rmse", "wall_time_seconds", "budget_used",
    "target_counts", "error",
)


def write_rows_csv(path, report: SweepReport) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(ROWS_HEADER)
        for r in report.rows:
            writer.writerow([
                r.method, f"{r.epsilon:.17g}", f"{r.delta:.17g}", r.dataset,
                r.repetition, r.n, r.m, f"{r.dsn_ratio:.17g}",
                f"{r.mean_rmse:.17g}", f"{r.wall_time_seconds:.17g}",
                r.budget_used, "|".join(str(c) for c in r.target_counts),
                r.error or "",
            ])


def read_rows_csv(path) -> SweepReport:
    rows = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if tuple(header) != ROWS_HEADER:
            raise ValueError("unrecognized rows CSV header")
        for rec in reader:
            (method, epsilon, delta, dataset, repetition, n, m, dsn, rmse,
             wall, budget, counts, error) = rec
            rows.append(SweepRow(
                method=method, epsilon=float(epsilon), delta=float(delta),
                dataset=dataset, repetition=int(repetition), n=int(n), m=int(m),
                dsn_ratio=float(dsn), mean_rmse=float(rmse),
                wall_time_seconds=float(wall), budget_used=int(budget),
                target_counts=tuple(int(c) for c in counts.split("|")) if counts else (),
                error=error or None,
            ))
    return SweepReport(tuple(rows))


def _median_table(report: SweepReport, x_field: str, y_field: str):
    """Median y per (x value, method) over datasets and repetitions."""
    methods = sorted({r.method for r in report.rows}, key=METHODS.index)
    xs = sorted({getattr(r, x_field) for r in report.rows})
    table = {}
    for x in xs:
        for method in methods:
            values = [
                getattr(r, y_field)
                for r in report.rows
                if getattr(r, x_field) == x and r.method == method
                and r.error is None and not math.isnan(getattr(r, y_field))
            ]
            table[(x, method)] = statistics.median(values) if values else math.nan
    return xs, methods, table


def _write_pivot_csv(path, xs, methods, table, x_name):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([x_name, *methods])
        for x in xs:
            writer.writerow([f"{x:.17g}", *(f"{table[(x, m)]:.17g}" for m in methods)])


def _write_pivot_markdown(path, xs, methods, table, x_name, title):
    lines = [f"### {title}", "", f"_{_CAPTION}_", ""]
    lines.append("| " + " | ".join([x_name, *methods]) + " |")
    lines.append("|" + "---|" * (len(methods) + 1))
    for x in xs:
        cells = [f"{x:g}"] + [f"{table[(x, m)]:.4g}" for m in methods]
        lines.append("| " + " | ".join(cells) + " |")
    lines.append("")
    with open(path, "w") as fh:
        fh.write("\n".join(lines))


def emit_tables(report: SweepReport, outdir, formats=("csv", "json", "markdown")) -> list[str]:
    """Write the report and its pivot-table analogues; returns written paths."""
    from pathlib import Path

    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    written: list[str] = []

    if "json" in formats:
        data = report_to_json_dict(report)
        validate_report_json(data)
        path = outdir / "report.json"
        path.write_text(json.dumps(data, indent=2) + "\n")
        written.append(str(path))
    if "csv" in formats:
        path = outdir / "rows.csv"
        write_rows_csv(path, report)
        written.append(str(path))

    pivots = [
        ("epsilon", "dsn_ratio", "dsn_by_epsilon", "Dominant-set ratio by epsilon"),
        ("epsilon", "mean_rmse", "rmse_by_epsilon", "Mean RMSE by epsilon"),
        ("delta", "dsn_ratio", "dsn_by_delta", "Dominant-set ratio by delta"),
        ("delta", "mean_rmse", "rmse_by_delta", "Mean RMSE by delta"),
        ("epsilon", "wall_time_seconds", "wall_time_by_epsilon", "Wall time by epsilon"),
    ]
    for x_field, y_field, stem, title in pivots:
        xs, methods, table = _median_table(report, x_field, y_field)
        if "csv" in formats:
            path = outdir / f"table_{stem}.csv"
            _write_pivot_csv(path, xs, methods, table, x_field)
            written.append(str(path))
        if "markdown" in formats:
            path = outdir / f"table_{stem}.md"
            _write_pivot_markdown(path, xs, methods, table, x_field, title)
            written.append(str(path))

    if "csv" in formats:
        path = outdir / "target_counts.csv"
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["method", "epsilon", "delta", "dataset", "repetition", "rank", "count"])
            for r in report.rows:
                for rank, count in enumerate(r.target_counts):
                    writer.writerow([
                        r.method, f"{r.epsilon:.17g}", f"{r.delta:.17g}",
                        r.dataset, r.repetition, rank, count,
                    ])
        written.append(str(path))
    return written
