"""Rebuild discarded target columns from the kept dominant columns.

Reconstruction needs only the dominant columns (which include the pivot),
the per-target pair maps, and the normalization scales -- all of which live
in a SelectionDocument.  In evaluation mode the originals are supplied as
well and the report carries the loss metrics and per-target violations; in
pure decompression mode they are not, which is what enforces that no target
data leaks into the rebuild.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .distance import LossReport, information_loss, relative_error
from .selection import SelectionDocument, SelectionResult
from .tsd import TsdMatrix


@dataclass(frozen=True)
class ReconstructionReport:
    """Rebuilt targets (original units) plus fidelity metrics when available.

    reconstructed is None when the selection kept every column.  loss and
    violations are only populated in evaluation mode.
    """

    reconstructed: TsdMatrix | None
    loss: LossReport | None
    violations: tuple[str, ...]
    violation_fraction: float


def reconstruct_targets(
    dominant: TsdMatrix,
    document: SelectionDocument,
    originals: TsdMatrix | None = None,
) -> ReconstructionReport:
    """Rebuild every assigned target from the dominant columns.

    `dominant` must contain all central columns and the pivot column, in
    original units.  Targets come back in original units, ordered as in the
    source panel.  With `originals` supplied the report also carries the
    loss metrics and the ids of targets whose relative error exceeds the
    run's epsilon.
    """
    have = {i: k for k, i in enumerate(dominant.object_ids)}
    needed = set(document.dominant_ids) | {document.pivot_id}
    missing_cols = sorted(needed - set(have), key=document.object_ids.index)
    if missing_cols:
        raise ValueError(f"dominant data is missing columns: {', '.join(missing_cols)}")

    target_ids = document.target_ids()
    missing_maps = [t for t in target_ids if t not in document.assignments]
    if missing_maps:
        raise ValueError(f"missing coefficients for targets: {', '.join(missing_maps)}")

    scales = document.scales
    u = dominant.values[:, have[document.pivot_id]] / scales[document.pivot_id]
    columns = []
    for t in target_ids:
        a = document.assignments[t]
        central_id = document.central_id(t)
        p = dominant.values[:, have[central_id]] / scales[central_id]
        pair = np.column_stack([u, p])
        predicted = (pair @ a.coeffs.a + a.coeffs.b)[:, 1]
        columns.append(predicted * scales[t])

    if not columns:
        return ReconstructionReport(None, None, (), 0.0)

    rebuilt = np.column_stack(columns)
    reconstructed = TsdMatrix(rebuilt, target_ids, dominant.timestamps, dominant.unit)

    if originals is None:
        return ReconstructionReport(reconstructed, None, (), 0.0)

    orig_index = {i: k for k, i in enumerate(originals.object_ids)}
    absent = [t for t in target_ids if t not in orig_index]
    if absent:
        raise ValueError(f"originals are missing target columns: {', '.join(absent)}")
    orig_values = originals.values[:, [orig_index[t] for t in target_ids]]
    if orig_values.shape[0] != rebuilt.shape[0]:
        raise ValueError("originals and dominant data disagree on row count")
    loss = information_loss(orig_values, rebuilt)
    epsilon = document.config.epsilon
    violations = tuple(
        t
        for k, t in enumerate(target_ids)
        if relative_error(orig_values[:, k], rebuilt[:, k]) > epsilon
    )
    fraction = len(violations) / max(1, len(target_ids))
    return ReconstructionReport(reconstructed, loss, violations, fraction)


# Cells needed to persist one target's pair map (2x2 matrix + bias pair).
COEFF_CELLS_PER_TARGET = 6


@dataclass(frozen=True)
class StorageSavings:
    """Raw vs reduced cell counts for one selection outcome."""

    raw_cells: int
    stored_cells: int
    ratio: float
    dominant_cells: int
    coefficient_cells: int
    pivot_cells: int


def storage_savings(result: SelectionResult | SelectionDocument, m: int, n: int) -> StorageSavings:
    """Account the cells kept by a selection against the full m x n panel.

    Stored cells are the dominant columns, six coefficients per target, and
    the pivot column when it is not already one of the dominant columns
    (with the engines in this package it always is).
    """
    if isinstance(result, SelectionDocument):
        k = len(result.dominant_ids)
        pivot_kept = result.pivot_id in result.dominant_ids
        n_targets = len(result.assignments)
    else:
        k = len(result.dominant)
        pivot_kept = result.pivot_index in result.dominant
        n_targets = len(result.assignments)
    raw = m * n
    dominant_cells = m * k
    coefficient_cells = COEFF_CELLS_PER_TARGET * n_targets
    pivot_cells = 0 if pivot_kept else m
    stored = dominant_cells + coefficient_cells + pivot_cells
    return StorageSavings(raw, stored, stored / raw, dominant_cells, coefficient_cells, pivot_cells)
