"""Dominant-subset selection under an (epsilon, delta) error contract.

Both engines partition the panel's columns into central (kept) objects and
target (discarded) objects.  Every non-budgeted target is assigned to a
central whose fitted pair map reproduces it within relative error epsilon;
at most floor(delta * n) targets may be admitted past the epsilon test on a
spent budget, and those assignments are flagged.

The public column u is chosen once per run by pivot_policy.  It is stored
with the result regardless (reconstruction replays fits against it), so it
is never offered as a target and always ends up central.  When u itself is
scanned as a central its pair collapses to the reduced design (u, 1); every
other fit a run stores therefore references only kept columns, which keeps
decompression closed.

Scanning selection walks the columns in index order and makes the first
unassigned column a central.  Greedy selection precomputes the full
dominance digraph, then repeatedly takes the column that currently covers
the most remaining columns; while budget remains after a pick, the
uncovered column with the cheapest reconstruction error is attached to its
best current central.  Ties everywhere resolve to the lowest index, so both
engines are deterministic functions of (matrix, config).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .affine import AffineCoefficients, MIN_FIT_ROWS
from .distance import (
    AFF,
    INFINITE_DISTANCE,
    MEASURES,
    embed_coefficients,
    fit_targets,
    relative_error,
)
from .tsd import NormalizationInfo, TsdMatrix

FIRST_COLUMN = "first_column"
MAX_VARIANCE = "max_variance"


@dataclass(frozen=True)
class SolverConfig:
    """Knobs shared by both selection engines.

    legacy_budget switches the delta budget from the fixed floor(delta * n)
    to the running (centrals + assignments) * delta form, kept only for
    compatibility experiments.
    """

    epsilon: float
    delta: float = 0.0
    measure: str = AFF
    pivot_policy: str = MAX_VARIANCE
    ridge: float = 0.0
    legacy_budget: bool = False

    def __post_init__(self):
        if not 0.0 < self.epsilon <= 1.0:
            raise ValueError("epsilon must be in (0, 1]")
        if not 0.0 <= self.delta <= 1.0:
            raise ValueError("delta must be in [0, 1]")
        if self.measure not in MEASURES:
            raise ValueError(f"measure must be one of {MEASURES}")
        if self.ridge < 0:
            raise ValueError("ridge must be nonnegative")


def select_pivot(matrix: TsdMatrix, policy: str) -> int:
    """Resolve a pivot policy to a column index.

    Policies: "first_column", "max_variance" (ties to the lowest index),
    "index:K", and "random:SEED" (reproducible for a fixed seed).
    """
    n = matrix.n_objects
    if policy == FIRST_COLUMN:
        return 0
    if policy == MAX_VARIANCE:
        variances = np.var(matrix.values, axis=0)
        return int(np.argmax(variances))
    if policy.startswith("index:"):
        k = int(policy.split(":", 1)[1])
        if not 0 <= k < n:
            raise ValueError(f"pivot index {k} out of range for {n} columns")
        return k
    if policy.startswith("random:"):
        seed = int(policy.split(":", 1)[1])
        return int(np.random.default_rng(seed).integers(n))
    raise ValueError(f"unknown pivot policy {policy!r}")


@dataclass(frozen=True)
class Assignment:
    """One target's record: its central, the replayable map, and flags."""

    central: int
    coeffs: AffineCoefficients
    distance: float
    budgeted: bool


@dataclass(frozen=True)
class Edge:
    """Directed central -> target relation admitted by the epsilon test."""

    central: int
    target: int
    distance: float
    coeffs: AffineCoefficients


@dataclass(frozen=True)
class DominanceGraph:
    """All epsilon-admissible ordered relations over a panel's columns."""

    n: int
    pivot_index: int
    edges: tuple[Edge, ...]

    def out_neighbors(self, central: int) -> list[int]:
        return [e.target for e in self.edges if e.central == central]


@dataclass(frozen=True)
class SelectionResult:
    """Partition of the columns plus everything needed to replay the maps."""

    dominant: tuple[int, ...]
    assignments: dict[int, Assignment]
    pivot_index: int
    budget_used: int
    dsn_ratio: float
    config: SolverConfig

    def target_counts(self) -> tuple[int, ...]:
        """Assigned-target counts per central, in selection order."""
        counts = {p: 0 for p in self.dominant}
        for a in self.assignments.values():
            counts[a.central] += 1
        return tuple(counts[p] for p in self.dominant)


class PairwiseCache:
    """Precomputed distances and raw fit coefficients for all ordered pairs.

    Row p of `distances` scores every column as a target of central p;
    self-pairs and the pivot-as-target column are infinite.  Raw rows are
    kept unembedded (one solve per central) to stay compact.
    """

    def __init__(self, matrix: TsdMatrix, config: SolverConfig, pivot_index: int):
        values = matrix.values
        n = matrix.n_objects
        self.n = n
        self.pivot_index = pivot_index
        self.measure = config.measure
        self.distances = np.empty((n, n))
        self.raw = [None] * n
        self.degenerate = np.zeros(n, dtype=bool)
        u = values[:, pivot_index]
        for p in range(n):
            dist, raw, degenerate = fit_targets(
                u,
                values[:, p],
                values,
                config.measure,
                config.ridge,
                central_is_pivot=(p == pivot_index),
            )
            dist[p] = INFINITE_DISTANCE
            dist[pivot_index] = INFINITE_DISTANCE
            self.distances[p] = dist
            self.raw[p] = raw
            self.degenerate[p] = degenerate

    def coeffs(self, central: int, target: int) -> AffineCoefficients:
        return embed_coefficients(
            self.raw[central][:, target],
            self.measure,
            central == self.pivot_index,
            bool(self.degenerate[central]),
        )


def _prepare(matrix: TsdMatrix, config: SolverConfig) -> int:
    if matrix.n_objects < 2:
        raise ValueError("selection needs at least 2 columns")
    if matrix.n_times < MIN_FIT_ROWS:
        raise ValueError(f"selection needs at least {MIN_FIT_ROWS} rows")
    pivot = select_pivot(matrix, config.pivot_policy)
    if np.var(matrix.values[:, pivot]) == 0.0:
        raise ValueError(
            "pivot column is constant and cannot anchor pair fits; "
            "choose a different pivot_policy"
        )
    return pivot


def _budget_limit(config: SolverConfig, n: int, n_central: int, n_assigned: int) -> int:
    if config.legacy_budget:
        return math.floor((n_central + n_assigned) * config.delta)
    return math.floor(config.delta * n)


def build_dominance_graph(matrix: TsdMatrix, config: SolverConfig) -> DominanceGraph:
    """Materialise every ordered pair relation with distance <= epsilon."""
    pivot = _prepare(matrix, config)
    cache = PairwiseCache(matrix, config, pivot)
    edges = []
    for p in range(cache.n):
        row = cache.distances[p]
        for v in np.nonzero(row <= config.epsilon)[0]:
            edges.append(Edge(p, int(v), float(row[v]), cache.coeffs(p, int(v))))
    return DominanceGraph(cache.n, pivot, tuple(edges))


def ssa(matrix: TsdMatrix, config: SolverConfig, cache: PairwiseCache | None = None) -> SelectionResult:
    """Scanning selection: index-order centrals, first-come target capture.

    Constant columns are deferred as centrals (they fit from any central's
    bias term but cannot anchor fits themselves) and only become centrals
    once no non-constant column remains unassigned.  The delta budget is
    consumed in scan order; candidates with a non-finite distance are never
    budget-admitted because their maps are not replayable.
    """
    pivot = _prepare(matrix, config)
    if cache is not None and cache.pivot_index != pivot:
        raise ValueError("cache was computed for a different pivot")
    values = matrix.values
    n = matrix.n_objects
    u = values[:, pivot]
    is_constant = np.var(values, axis=0) == 0.0

    dominant: list[int] = []
    assignments: dict[int, Assignment] = {}
    budget_used = 0
    unassigned = set(range(n))

    def next_central() -> int | None:
        candidates = [i for i in sorted(unassigned) if not is_constant[i]]
        if candidates:
            return candidates[0]
        return min(unassigned) if unassigned else None

    while unassigned:
        p = next_central()
        unassigned.discard(p)
        dominant.append(p)
        if cache is not None:
            dist_row, raw, degenerate = (
                cache.distances[p],
                cache.raw[p],
                bool(cache.degenerate[p]),
            )
        else:
            dist_row, raw, degenerate = fit_targets(
                u, values[:, p], values, config.measure, config.ridge,
                central_is_pivot=(p == pivot),
            )
            dist_row = dist_row.copy()
            dist_row[p] = INFINITE_DISTANCE
            dist_row[pivot] = INFINITE_DISTANCE
        for v in range(n):
            if v not in unassigned:
                continue
            d = float(dist_row[v])
            budgeted = False
            if d > config.epsilon:
                limit = _budget_limit(config, n, len(dominant), len(assignments))
                if budget_used >= limit or not math.isfinite(d):
                    continue
                budgeted = True
            coeffs = embed_coefficients(
                raw[:, v], config.measure, p == pivot, degenerate
            )
            assignments[v] = Assignment(p, coeffs, d, budgeted)
            unassigned.discard(v)
            if budgeted:
                budget_used += 1

    return SelectionResult(
        tuple(dominant), assignments, pivot, budget_used,
        len(dominant) / n, config,
    )


def gsa(matrix: TsdMatrix, config: SolverConfig, cache: PairwiseCache | None = None) -> SelectionResult:
    """Greedy selection: max-coverage centrals over the dominance digraph.

    Each round picks the unremoved column with the most unremoved
    out-neighbors (ties to the lowest index), assigns and removes them,
    then, while budget remains, attaches the cheapest uncovered column to
    whichever current central reconstructs it best.  On normalized columns
    that cheapest-reconstruction order coincides with the distance order,
    so the cached distances drive it directly.
    """
    pivot = _prepare(matrix, config)
    if cache is None:
        cache = PairwiseCache(matrix, config, pivot)
    elif cache.pivot_index != pivot:
        raise ValueError("cache was computed for a different pivot")
    n = cache.n
    admissible = cache.distances <= config.epsilon

    dominant: list[int] = []
    assignments: dict[int, Assignment] = {}
    budget_used = 0
    removed = np.zeros(n, dtype=bool)

    while not removed.all():
        alive = ~removed
        degrees = (admissible & alive).sum(axis=1)
        degrees[removed] = -1
        p = int(np.argmax(degrees))
        removed[p] = True
        dominant.append(p)
        for v in np.nonzero(admissible[p] & ~removed)[0]:
            v = int(v)
            assignments[v] = Assignment(
                p, cache.coeffs(p, v), float(cache.distances[p, v]), False
            )
            removed[v] = True

        while not removed.all():
            limit = _budget_limit(config, n, len(dominant), len(assignments))
            if budget_used >= limit:
                break
            sub = cache.distances[np.ix_(dominant, np.nonzero(~removed)[0])]
            best = sub.min()
            if not math.isfinite(best):
                break
            # Lowest target index first, then lowest central index.
            alive_idx = np.nonzero(~removed)[0]
            pos = np.argwhere(sub == best)
            pos = sorted(pos.tolist(), key=lambda ij: (alive_idx[ij[1]], dominant[ij[0]]))
            ci, vi = pos[0]
            central, v = dominant[ci], int(alive_idx[vi])
            assignments[v] = Assignment(
                central, cache.coeffs(central, v), float(best), True
            )
            removed[v] = True
            budget_used += 1

    return SelectionResult(
        tuple(dominant), assignments, pivot, budget_used,
        len(dominant) / n, config,
    )


def assignment_error(matrix: TsdMatrix, result: SelectionResult, target: int) -> float:
    """Replay a stored assignment and measure its relative error.

    This is the contract check: it uses only the stored coefficients, the
    pivot column and the central column.
    """
    a = result.assignments[target]
    u = matrix.values[:, result.pivot_index]
    p = matrix.values[:, a.central]
    pair = np.column_stack([u, p])
    predicted = (pair @ a.coeffs.a + a.coeffs.b)[:, 1]
    return relative_error(matrix.values[:, target], predicted)


@dataclass(frozen=True)
class SelectionDocument:
    """Id-keyed, serialisable form of a selection run.

    This is the persisted artifact: together with the dominant columns it
    is sufficient to reconstruct every target (scales carry the per-column
    normalization applied before selection).
    """

    config: SolverConfig
    object_ids: tuple[str, ...]
    timestamps: tuple[str, ...]
    unit: str
    pivot_id: str
    dominant_ids: tuple[str, ...]
    assignments: dict[str, Assignment]  # keyed by target id; Assignment.central is a column index
    scales: dict[str, float]
    dsn_ratio: float
    budget_used: int

    def central_id(self, target_id: str) -> str:
        return self.object_ids[self.assignments[target_id].central]

    def target_ids(self) -> tuple[str, ...]:
        return tuple(i for i in self.object_ids if i in self.assignments)


def document_from_result(
    matrix: TsdMatrix, result: SelectionResult, norm: NormalizationInfo | None = None
) -> SelectionDocument:
    """Bind a selection result to the panel's ids and normalization scales."""
    ids = matrix.object_ids
    scales = (
        {i: float(s) for i, s in zip(ids, norm.scales)}
        if norm is not None
        else {i: 1.0 for i in ids}
    )
    return SelectionDocument(
        config=result.config,
        object_ids=ids,
        timestamps=matrix.timestamps,
        unit=matrix.unit,
        pivot_id=ids[result.pivot_index],
        dominant_ids=tuple(ids[p] for p in result.dominant),
        assignments={ids[t]: a for t, a in result.assignments.items()},
        scales=scales,
        dsn_ratio=result.dsn_ratio,
        budget_used=result.budget_used,
    )


def document_to_json_dict(doc: SelectionDocument) -> dict:
    """JSON-ready form of a selection document."""
    cfg = doc.config
    return {
        "config": {
            "epsilon": cfg.epsilon,
            "delta": cfg.delta,
            "measure": cfg.measure,
            "pivot_policy": cfg.pivot_policy,
            "ridge": cfg.ridge,
            "legacy_budget": cfg.legacy_budget,
        },
        "object_ids": list(doc.object_ids),
        "timestamps": list(doc.timestamps),
        "unit": doc.unit,
        "pivot_index": doc.object_ids.index(doc.pivot_id),
        "pivot_id": doc.pivot_id,
        "dominant": list(doc.dominant_ids),
        "assignments": [
            {
                "target": t,
                "central": doc.central_id(t),
                **dict(zip(("a11", "a12", "a21", "a22", "b1", "b2"), a.coeffs.flat())),
                "distance": a.distance if math.isfinite(a.distance) else None,
                "budgeted": a.budgeted,
            }
            for t, a in sorted(
                doc.assignments.items(), key=lambda kv: doc.object_ids.index(kv[0])
            )
        ],
        "normalization": {"mode": "per-column-scale", "scales": dict(doc.scales)},
        "dsn_ratio": doc.dsn_ratio,
        "budget_used": doc.budget_used,
    }


def document_from_json_dict(data: dict) -> SelectionDocument:
    """Inverse of document_to_json_dict."""
    cfg = SolverConfig(**data["config"])
    ids = tuple(data["object_ids"])
    index = {i: k for k, i in enumerate(ids)}
    assignments = {}
    for rec in data["assignments"]:
        coeffs = AffineCoefficients.from_flat(
            [rec[k] for k in ("a11", "a12", "a21", "a22", "b1", "b2")]
        )
        distance = rec["distance"]
        assignments[rec["target"]] = Assignment(
            index[rec["central"]],
            coeffs,
            float(distance) if distance is not None else INFINITE_DISTANCE,
            bool(rec["budgeted"]),
        )
    return SelectionDocument(
        config=cfg,
        object_ids=ids,
        timestamps=tuple(data["timestamps"]),
        unit=data["unit"],
        pivot_id=data["pivot_id"],
        dominant_ids=tuple(data["dominant"]),
        assignments=assignments,
        scales={k: float(v) for k, v in data["normalization"]["scales"].items()},
        dsn_ratio=float(data["dsn_ratio"]),
        budget_used=int(data["budget_used"]),
    )


def document_to_json(doc: SelectionDocument, indent: int = 2) -> str:
    return json.dumps(document_to_json_dict(doc), indent=indent) + "\n"


def document_from_json(text: str) -> SelectionDocument:
    return document_from_json_dict(json.loads(text))
