"""Affine relation model over column pairs.

A pair matrix couples a shared public column u with either a central column
p or a candidate target column v.  The map fitted between the pivot pair
(u, p) and a target pair (u, v) is v' = (u, p) @ A + b with A a 2x2 matrix
and b a broadcast bias row, which is what the streaming transform state
updates row by row.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .linalg import (
    TransformState,
    append_row_update,
    batch_transform_state,
    solve_least_squares,
)

PIVOT_PAIR = "pivot_pair"
TARGET_PAIR = "target_pair"

# A pair fit has 3 unknowns per response column (two coefficients + bias).
MIN_FIT_ROWS = 3


@dataclass(frozen=True)
class PairMatrix:
    """m x 2 pairing of the public column with a central or target column."""

    left: np.ndarray
    right: np.ndarray
    kind: str = PIVOT_PAIR

    def __post_init__(self):
        left = np.asarray(self.left, dtype=float).reshape(-1)
        right = np.asarray(self.right, dtype=float).reshape(-1)
        if left.shape != right.shape:
            raise ValueError("pair columns must have equal length")
        if not (np.all(np.isfinite(left)) and np.all(np.isfinite(right))):
            raise ValueError("pair columns must be finite")
        if self.kind not in (PIVOT_PAIR, TARGET_PAIR):
            raise ValueError(f"unknown pair kind {self.kind!r}")
        object.__setattr__(self, "left", left)
        object.__setattr__(self, "right", right)

    @property
    def values(self) -> np.ndarray:
        return np.column_stack([self.left, self.right])

    @property
    def n_rows(self) -> int:
        return self.left.shape[0]


@dataclass(frozen=True)
class AffineCoefficients:
    """Fitted (A, b) of one pair map; rank_deficient marks a degenerate fit."""

    a: np.ndarray
    b: np.ndarray
    rank_deficient: bool = False

    def __post_init__(self):
        a = np.asarray(self.a, dtype=float)
        b = np.asarray(self.b, dtype=float).reshape(-1)
        if a.shape != (2, 2) or b.shape != (2,):
            raise ValueError("coefficients must be a 2x2 matrix and a 2-vector")
        if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
            raise ValueError("coefficients must be finite")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    def flat(self) -> tuple[float, ...]:
        """(a11, a12, a21, a22, b1, b2) in row-major order."""
        return (*self.a[0], *self.a[1], *self.b)

    @classmethod
    def from_flat(cls, flat, rank_deficient: bool = False) -> "AffineCoefficients":
        a11, a12, a21, a22, b1, b2 = (float(v) for v in flat)
        return cls(np.array([[a11, a12], [a21, a22]]), np.array([b1, b2]), rank_deficient)


def fit_pair_affine(
    pivot: PairMatrix, target: PairMatrix, ridge: float = 0.0
) -> tuple[AffineCoefficients, np.ndarray]:
    """Fit target ~ pivot @ A + b jointly over both target columns.

    Returns the coefficients and the m x 2 residual matrix target - fitted.
    A collinear pivot pair comes back with rank_deficient set on the
    coefficients; callers decide what to do with it.
    """
    if pivot.n_rows != target.n_rows:
        raise ValueError("pivot and target pairs must share the same rows")
    m = pivot.n_rows
    if m < MIN_FIT_ROWS:
        raise ValueError(f"pair fit needs at least {MIN_FIT_ROWS} rows, got {m}")
    design = np.column_stack([pivot.left, pivot.right, np.ones(m)])
    sol = solve_least_squares(design, target.values, ridge)
    coeffs = AffineCoefficients(
        sol.coefficients[:2, :], sol.coefficients[2, :], sol.rank_deficient
    )
    residual = target.values - apply_affine(coeffs, pivot)
    return coeffs, residual


def apply_affine(coeffs: AffineCoefficients, pivot: PairMatrix) -> np.ndarray:
    """Evaluate the fitted map on a pivot pair: pivot @ A + b, shape m x 2."""
    return pivot.values @ coeffs.a + coeffs.b


def augment_ones(design) -> np.ndarray:
    """Append the all-ones bias column to a design matrix."""
    design = np.asarray(design, dtype=float)
    return np.column_stack([design, np.ones(design.shape[0])])


def init_transform(design, response, ridge: float = 0.0) -> TransformState:
    """Batch-solve response ~ design (ones column already appended by caller)."""
    design = np.asarray(design, dtype=float)
    if design.ndim != 2 or design.shape[0] < design.shape[1]:
        raise ValueError("design must have at least as many rows as columns")
    return batch_transform_state(design, response, ridge)


def stream_append(state: TransformState, new_observation) -> TransformState:
    """Fold one (design_row, response_row) observation into the state."""
    design_row, response_row = new_observation
    return append_row_update(state, design_row, response_row)


COEFFICIENTS_HEADER = ("target_id", "central_id", "a11", "a12", "a21", "a22", "b1", "b2")


def write_coefficients_csv(path, rows) -> None:
    """Write (target_id, central_id, AffineCoefficients) rows with full precision."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(COEFFICIENTS_HEADER)
        for target_id, central_id, coeffs in rows:
            writer.writerow(
                [target_id, central_id, *(f"{v:.17g}" for v in coeffs.flat())]
            )


def read_coefficients_csv(path) -> list[tuple[str, str, AffineCoefficients]]:
    """Inverse of write_coefficients_csv."""
    out = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(header) != COEFFICIENTS_HEADER:
            raise ValueError(f"expected header {','.join(COEFFICIENTS_HEADER)}")
        for record in reader:
            if not record:
                continue
            target_id, central_id, *flat = record
            out.append((target_id, central_id, AffineCoefficients.from_flat(flat)))
    return out
