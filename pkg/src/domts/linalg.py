"""Dense least-squares kernel: normal-equation solves and recursive row updates.

Everything here works on plain float64 numpy arrays.  The designs fed to
these routines are tall and thin (a handful of columns), so the Gram matrix
is solved with a Cholesky factorisation and a ridge retry rather than an
SVD.  All functions are pure: inputs are never mutated and the returned
states are safe to share across threads.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

# Relative pivot tolerance below which the Gram matrix counts as rank deficient.
GRAM_PIVOT_RTOL = 1e-12
# Scale of the automatic ridge applied when the plain solve is rank deficient.
RIDGE_FALLBACK_SCALE = 1e-10
# Guard for the rank-one update denominator.
UPDATE_DENOM_TOL = 1e-12


class SingularUpdateError(ValueError):
    """Raised when a rank-one update is numerically unsafe."""


def as_matrix(values, name: str = "matrix") -> np.ndarray:
    """Validate and return a finite 2-D float64 array."""
    a = np.asarray(values, dtype=float)
    if a.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {a.shape}")
    if a.shape[0] < 1 or a.shape[1] < 1:
        raise ValueError(f"{name} must have at least one row and column")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} contains non-finite entries")
    return a


@dataclass(frozen=True)
class LeastSquaresSolution:
    """Result of a normal-equation least-squares solve.

    coefficients has one row per design column and one column per response
    column.  rank_deficient is set when the Gram pivot check failed and the
    fallback ridge had to be engaged; the coefficients are then the ridged
    minimum-norm-ish solution rather than the exact minimiser.
    """

    coefficients: np.ndarray
    residual_norm: float
    rank_deficient: bool


def _solve_gram(gram: np.ndarray, rhs: np.ndarray) -> tuple[np.ndarray, bool]:
    """Solve gram @ x = rhs by Cholesky, retrying with a small ridge."""
    k = gram.shape[0]
    try:
        factor = cho_factor(gram, lower=True, check_finite=False)
        pivots = np.diag(factor[0]) ** 2
        if pivots.min() > GRAM_PIVOT_RTOL * max(pivots.max(), 1.0):
            return cho_solve(factor, rhs, check_finite=False), False
    except LinAlgError:
        pass
    # Rank-deficient or indefinite-looking Gram: retry with a trace-scaled ridge.
    ridge = max(RIDGE_FALLBACK_SCALE * np.trace(gram) / k, np.finfo(float).tiny)
    factor = cho_factor(gram + ridge * np.eye(k), lower=True, check_finite=False)
    return cho_solve(factor, rhs, check_finite=False), True


def solve_least_squares(design, response, ridge: float = 0.0) -> LeastSquaresSolution:
    """Minimise ||design @ R - response||_F via the normal equations.

    A caller-supplied ridge is added to the Gram diagonal before solving.
    Under-determined designs are allowed; they come back flagged
    rank_deficient because the automatic fallback ridge engaged.
    """
    design = as_matrix(design, "design")
    response = as_matrix(response, "response")
    if design.shape[0] != response.shape[0]:
        raise ValueError(
            f"row mismatch: design has {design.shape[0]} rows, "
            f"response has {response.shape[0]}"
        )
    if ridge < 0:
        raise ValueError("ridge must be nonnegative")
    gram = design.T @ design
    if ridge > 0:
        gram = gram + ridge * np.eye(gram.shape[0])
    coeffs, deficient = _solve_gram(gram, design.T @ response)
    residual = design @ coeffs - response
    return LeastSquaresSolution(coeffs, float(np.linalg.norm(residual)), deficient)


@dataclass(frozen=True)
class TransformState:
    """Streaming least-squares state: the transform and its cached Gram inverse.

    r is the (design_cols x response_cols) solution over all rows seen so
    far; gram_inverse is the inverse of the (ridged) Gram matrix.  States
    are immutable; append_row_update returns a new one.
    """

    r: np.ndarray
    gram_inverse: np.ndarray
    rows_seen: int


def batch_transform_state(design, response, ridge: float = 0.0) -> TransformState:
    """Solve the batch problem and cache the Gram inverse for streaming updates.

    Raises if the design is rank deficient: a streaming state built on the
    fallback ridge would silently drift from the batch solution.
    """
    design = as_matrix(design, "design")
    response = as_matrix(response, "response")
    sol = solve_least_squares(design, response, ridge)
    if sol.rank_deficient:
        raise ValueError(
            "design is rank deficient even after ridge; cannot build a "
            "streaming transform state"
        )
    k = design.shape[1]
    gram = design.T @ design
    if ridge > 0:
        gram = gram + ridge * np.eye(k)
    factor = cho_factor(gram, lower=True, check_finite=False)
    gram_inv = cho_solve(factor, np.eye(k), check_finite=False)
    gram_inv = 0.5 * (gram_inv + gram_inv.T)
    return TransformState(sol.coefficients, gram_inv, design.shape[0])


def append_row_update(state: TransformState, new_design_row, new_response_row) -> TransformState:
    """Fold one new observation row into the transform state.

    Uses the Sherman-Morrison rank-one identity so the cost is O(k^2) per
    row instead of a fresh O(k^3) solve; the result matches re-solving the
    batch problem on the extended matrices.
    """
    x = np.asarray(new_design_row, dtype=float).reshape(-1)
    s = np.asarray(new_response_row, dtype=float).reshape(-1)
    k, q = state.r.shape
    if x.shape[0] != k:
        raise ValueError(f"design row has length {x.shape[0]}, expected {k}")
    if s.shape[0] != q:
        raise ValueError(f"response row has length {s.shape[0]}, expected {q}")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(s))):
        raise ValueError("new observation contains non-finite entries")

    g = state.gram_inverse @ x
    denom = 1.0 + float(x @ g)
    if denom < UPDATE_DENOM_TOL:
        raise SingularUpdateError(
            "rank-one update denominator is numerically singular; "
            "refit the transform in batch instead"
        )
    gain = g / denom
    gram_inv = state.gram_inverse - np.outer(gain, g)
    gram_inv = 0.5 * (gram_inv + gram_inv.T)
    r = state.r + np.outer(gain, s - x @ state.r)
    return TransformState(r, gram_inv, state.rows_seen + 1)
