"""Sweep harness: execution, emission, figures, trend plumbing."""

from __future__ import annotations

import json
import statistics

import pytest

from domts import (
    DatasetSpec,
    SolverConfig,
    SweepSpec,
    SyntheticSpec,
    build_dominance_graph,
    generate_synthetic,
    run_sweep,
)
from domts.bench import (
    read_rows_csv,
    report_to_json_dict,
    sweep_spec_from_json_dict,
    validate_report_json,
    emit_tables,
)
from domts.figures import render_figures


def _tiny_synth(seed=0, n=16, m=10):
    return DatasetSpec(
        name="tiny",
        synthetic=SyntheticSpec(
            n_objects=n, n_times=m, n_groups=2,
            noise_level=0.05, independent_fraction=0.2, seed=seed,
        ),
    )


def test_smallest_sweep_has_one_row():
    spec = SweepSpec(
        methods=("gsa_aff",), epsilons=(0.05,), deltas=(0.0,),
        datasets=(_tiny_synth(),), repetitions=1,
    )
    report = run_sweep(spec)
    assert len(report.rows) == 1
    row = report.rows[0]
    assert row.error is None
    assert 0 < row.dsn_ratio <= 1
    assert row.n == 16 and row.m == 10


def test_gsa_histogram_is_descending():
    spec = SweepSpec(
        methods=("gsa_aff", "gsa_ls"), epsilons=(0.03, 0.08), deltas=(0.0,),
        datasets=(_tiny_synth(n=24),), repetitions=3,
    )
    report = run_sweep(spec)
    for row in report.rows:
        assert row.error is None
        counts = row.target_counts
        assert all(a >= b for a, b in zip(counts, counts[1:]))


def test_gsa_dsn_not_above_ssa_on_planted_family():
    spec = SweepSpec(
        methods=("ssa_aff", "gsa_aff"), epsilons=(0.05,), deltas=(0.0,),
        datasets=(_tiny_synth(n=30),), repetitions=10,
    )
    report = run_sweep(spec)
    med = {
        method: statistics.median(
            r.dsn_ratio for r in report.rows if r.method == method
        )
        for method in ("ssa_aff", "gsa_aff")
    }
    assert med["gsa_aff"] <= med["ssa_aff"]


def test_rows_csv_roundtrip(tmp_path):
    spec = SweepSpec(
        methods=("ssa_ls", "gsa_aff"), epsilons=(0.03, 0.1), deltas=(0.0, 0.05),
        datasets=(_tiny_synth(),), repetitions=2,
    )
    report = run_sweep(spec)
    emit_tables(report, tmp_path, formats=("csv",))
    again = read_rows_csv(tmp_path / "rows.csv")
    assert again == report


def test_markdown_table_shape(tmp_path):
    spec = SweepSpec(
        methods=("ssa_aff", "ssa_ls", "gsa_aff", "gsa_ls"),
        epsilons=(0.01, 0.03, 0.05, 0.08, 0.10),
        deltas=(0.0,),
        datasets=(_tiny_synth(),),
        repetitions=1,
    )
    report = run_sweep(spec)
    emit_tables(report, tmp_path, formats=("markdown",))
    lines = (tmp_path / "table_dsn_by_epsilon.md").read_text().splitlines()
    table = [l for l in lines if l.startswith("|")]
    header = [c.strip() for c in table[0].strip("|").split("|")]
    assert header == ["epsilon", "ssa_aff", "ssa_ls", "gsa_aff", "gsa_ls"]
    assert len(table) - 2 == 5  # header + separator + 5 epsilon rows


def test_report_json_validates_against_schema(tmp_path):
    spec = SweepSpec(
        methods=("gsa_aff",), epsilons=(0.05,), deltas=(0.0,),
        datasets=(_tiny_synth(),), repetitions=1,
    )
    report = run_sweep(spec)
    emit_tables(report, tmp_path, formats=("json",))
    data = json.loads((tmp_path / "report.json").read_text())
    validate_report_json(data)
    import jsonschema

    data["rows"][0]["method"] = "bogus"
    with pytest.raises(jsonschema.ValidationError):
        validate_report_json(data)


def test_failed_cell_is_recorded_not_raised(tmp_path):
    spec = SweepSpec(
        methods=("gsa_aff",), epsilons=(0.05,), deltas=(0.0,),
        datasets=(DatasetSpec(name="missing", path=str(tmp_path / "nope.csv")),),
    )
    report = run_sweep(spec)
    assert len(report.rows) == 1
    assert report.rows[0].error is not None
    data = report_to_json_dict(report)
    validate_report_json(data)


def test_threaded_sweep_matches_serial_values():
    spec = SweepSpec(
        methods=("ssa_aff", "gsa_ls"), epsilons=(0.03, 0.08), deltas=(0.0,),
        datasets=(_tiny_synth(),), repetitions=2,
    )
    serial = run_sweep(spec, threads=1)
    threaded = run_sweep(spec, threads=4)
    for a, b in zip(serial.rows, threaded.rows):
        assert (a.method, a.epsilon, a.delta, a.repetition) == (
            b.method, b.epsilon, b.delta, b.repetition
        )
        assert a.dsn_ratio == b.dsn_ratio
        assert a.mean_rmse == b.mean_rmse
        assert a.target_counts == b.target_counts


def test_graph_edges_grow_with_epsilon():
    spec = SyntheticSpec(
        n_objects=18, n_times=10, n_groups=2,
        noise_level=0.08, independent_fraction=0.2, seed=3,
    )
    panel, _ = generate_synthetic(spec)
    previous = set()
    for epsilon in (0.01, 0.03, 0.05, 0.08, 0.10):
        graph = build_dominance_graph(panel, SolverConfig(epsilon=epsilon))
        edges = {(e.central, e.target) for e in graph.edges}
        assert previous <= edges
        previous = edges


def test_sweep_spec_json_parsing(tmp_path):
    data = {
        "methods": ["gsa_aff", "ssa_ls"],
        "epsilons": [0.01, 0.05],
        "deltas": [0.0],
        "datasets": [
            {"name": "syn", "synthetic": {
                "n_objects": 10, "n_times": 8, "n_groups": 2, "seed": 1,
            }},
        ],
        "repetitions": 2,
        "seed": 5,
    }
    spec = sweep_spec_from_json_dict(data)
    assert spec.methods == ("gsa_aff", "ssa_ls")
    assert spec.datasets[0].synthetic.n_objects == 10
    with pytest.raises(ValueError, match="unknown method"):
        sweep_spec_from_json_dict({**data, "methods": ["abc"]})


def test_figures_are_rendered(tmp_path):
    spec = SweepSpec(
        methods=("ssa_aff", "gsa_aff"), epsilons=(0.03, 0.08), deltas=(0.0, 0.05),
        datasets=(_tiny_synth(),), repetitions=2,
    )
    report = run_sweep(spec)
    written = render_figures(report, tmp_path)
    assert len(written) == 5
    for path in written:
        assert (tmp_path / path.split("/")[-1]).stat().st_size > 0
