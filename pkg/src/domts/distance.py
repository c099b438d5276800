"""Linear correlation distances and information-loss metrics.

A distance scores how well a candidate target column v is reproduced from a
central column p, in the presence of a shared public column u.  Two
variants are supported:

* AFF -- the affine pair model: v is fitted from the design (u, p, 1), the
  same map the pair-matrix machinery stores and reconstruction replays.
* LS  -- plain least-squares regression of the target on the central alone,
  design (p, 1); the public column takes no part.

Both return the relative residual ||v - v'|| / ||v||, dimensionless and
invariant to per-column scaling, so error thresholds read as percentages.
AFF never exceeds LS on the same pair (its design strictly contains the LS
design); the two measures genuinely rank pairs differently whenever the
public column carries explanatory weight.

When the central column is the public column itself the two design columns
coincide, so the pair collapses to the reduced design (u, 1) for either
measure.  A collinear (degenerate) design yields an infinite sentinel: such
a central never dominates anything.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .affine import AffineCoefficients, PairMatrix, MIN_FIT_ROWS
from .linalg import solve_least_squares

AFF = "aff"
LS = "ls"
MEASURES = (AFF, LS)

INFINITE_DISTANCE = float("inf")
# Absolute residual below which a zero-norm target counts as exactly reproduced.
ZERO_RESIDUAL_TOL = 1e-12


def _check_measure(measure: str) -> str:
    measure = measure.lower()
    if measure not in MEASURES:
        raise ValueError(f"unknown distance measure {measure!r}; expected one of {MEASURES}")
    return measure


@dataclass(frozen=True)
class TargetFit:
    """One central->target fit: its distance, replayable coefficients, flags."""

    distance: float
    coeffs: AffineCoefficients
    degenerate: bool


def design_columns(u: np.ndarray, p: np.ndarray, measure: str, central_is_pivot: bool) -> np.ndarray:
    """Design matrix for fitting targets from central p with public column u."""
    m = u.shape[0]
    ones = np.ones(m)
    if central_is_pivot:
        return np.column_stack([u, ones])
    if measure == AFF:
        return np.column_stack([u, p, ones])
    return np.column_stack([p, ones])


def embed_coefficients(raw: np.ndarray, measure: str, central_is_pivot: bool,
                       rank_deficient: bool = False) -> AffineCoefficients:
    """Lift raw design coefficients into the 2x2 + bias pair-map form.

    The stored map is always applied to the pair (u, central); the left
    output column reproduces u exactly, the right one is the target fit.
    """
    if central_is_pivot:
        c_u, c_b = raw
        a = np.array([[1.0, c_u], [0.0, 0.0]])
    elif measure == AFF:
        c_u, c_p, c_b = raw
        a = np.array([[1.0, c_u], [0.0, c_p]])
    else:
        c_p, c_b = raw
        a = np.array([[1.0, 0.0], [0.0, c_p]])
    return AffineCoefficients(a, np.array([0.0, c_b]), rank_deficient)


def fit_targets(
    u: np.ndarray,
    p: np.ndarray,
    targets: np.ndarray,
    measure: str,
    ridge: float = 0.0,
    central_is_pivot: bool = False,
) -> tuple[np.ndarray, np.ndarray, bool]:
    """Fit every column of `targets` from central p in one solve.

    Returns (distances, raw coefficient matrix with one column per target,
    degenerate flag).  Distances are relative residual norms; a degenerate
    design sends every distance to the infinite sentinel.
    """
    measure = _check_measure(measure)
    m = u.shape[0]
    if m < MIN_FIT_ROWS:
        raise ValueError(f"distance needs at least {MIN_FIT_ROWS} shared rows, got {m}")
    targets = np.atleast_2d(np.asarray(targets, dtype=float))
    if targets.shape[0] != m:
        targets = targets.T
    design = design_columns(u, p, measure, central_is_pivot)
    sol = solve_least_squares(design, targets, ridge)
    residual = design @ sol.coefficients - targets
    resid_norms = np.linalg.norm(residual, axis=0)
    target_norms = np.linalg.norm(targets, axis=0)
    if sol.rank_deficient:
        distances = np.full(targets.shape[1], INFINITE_DISTANCE)
        return distances, sol.coefficients, True
    with np.errstate(divide="ignore", invalid="ignore"):
        distances = resid_norms / target_norms
    zero = target_norms == 0.0
    if np.any(zero):
        distances[zero] = np.where(
            resid_norms[zero] <= ZERO_RESIDUAL_TOL, 0.0, INFINITE_DISTANCE
        )
    return distances, sol.coefficients, False


def fit_target(
    u: np.ndarray,
    p: np.ndarray,
    v: np.ndarray,
    measure: str,
    ridge: float = 0.0,
    central_is_pivot: bool = False,
) -> TargetFit:
    """Single-target version of fit_targets, with embedded pair coefficients."""
    distances, raw, degenerate = fit_targets(
        u, p, v.reshape(-1, 1), measure, ridge, central_is_pivot
    )
    coeffs = embed_coefficients(raw[:, 0], measure, central_is_pivot, degenerate)
    return TargetFit(float(distances[0]), coeffs, degenerate)


def lcd(measure: str, pivot: PairMatrix, target: PairMatrix, ridge: float = 0.0) -> float:
    """Linear correlation distance between a pivot pair and a target pair.

    Both pairs must share the same public (left) column.  Returns the
    relative residual of the target's right column under the measure's fit;
    infinite for degenerate designs.
    """
    if pivot.n_rows != target.n_rows:
        raise ValueError("pivot and target pairs must share the same rows")
    if not np.array_equal(pivot.left, target.left):
        raise ValueError("pivot and target pairs must share the same public column")
    return fit_target(pivot.left, pivot.right, target.right, measure, ridge).distance


def relative_error(v: np.ndarray, v_hat: np.ndarray) -> float:
    """||v - v'|| / ||v|| with the zero-column convention used by lcd."""
    denom = float(np.linalg.norm(v))
    diff = float(np.linalg.norm(v - v_hat))
    if denom == 0.0:
        return 0.0 if diff <= ZERO_RESIDUAL_TOL else INFINITE_DISTANCE
    return diff / denom


@dataclass(frozen=True)
class LossReport:
    """Element-wise loss |S - S'|, the per-column RMSE vector, and its mean."""

    loss_matrix: np.ndarray
    rmse: np.ndarray
    mean_rmse: float


def information_loss(original, reconstructed, scales=None) -> LossReport:
    """Element-wise absolute loss and per-column RMSE between two matrices.

    If per-column `scales` are given both matrices are rescaled by them
    first, so the report reads in original units even for normalized input.
    An empty matrix (zero columns) yields an empty report with mean 0.
    """
    original = np.asarray(original, dtype=float)
    reconstructed = np.asarray(reconstructed, dtype=float)
    if original.shape != reconstructed.shape:
        raise ValueError(
            f"shape mismatch: {original.shape} vs {reconstructed.shape}"
        )
    if scales is not None:
        scales = np.asarray(scales, dtype=float)
        if scales.shape[0] != original.shape[1]:
            raise ValueError("scales must have one entry per column")
        original = original * scales
        reconstructed = reconstructed * scales
    loss = np.abs(original - reconstructed)
    if original.size == 0:
        return LossReport(loss, np.zeros(original.shape[1]), 0.0)
    rmse = np.sqrt(np.mean((original - reconstructed) ** 2, axis=0))
    mean_rmse = float(np.mean(rmse)) if rmse.size else 0.0
    return LossReport(loss, rmse, mean_rmse)
