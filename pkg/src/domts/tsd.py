"""Time-series panel model: CSV ingestion, normalization, synthetic data.

A panel is an m x n matrix of n object columns observed at m ordered times.
Timestamps are opaque ordered labels: numeric-looking labels compare
numerically, anything else compares by length then lexicographically, which
sorts clock-style labels ("1:00" < "10:00") and fixed-width datetimes the
natural way.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .linalg import as_matrix


class ParseError(ValueError):
    """Structured ingestion error carrying the offending 1-based line number."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


def _label_key(label: str):
    """Ordering key for time/object labels: numeric if possible, else shortlex."""
    try:
        return (0, float(label), "")
    except ValueError:
        return (1, float(len(label)), label)


@dataclass(frozen=True)
class TsdMatrix:
    """Immutable m x n panel with object ids and ordered time labels."""

    values: np.ndarray
    object_ids: tuple[str, ...]
    timestamps: tuple[str, ...]
    unit: str = "kWh"

    def __post_init__(self):
        values = as_matrix(self.values, "values")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "object_ids", tuple(self.object_ids))
        object.__setattr__(self, "timestamps", tuple(self.timestamps))
        m, n = values.shape
        if m < 2:
            raise ValueError("a panel needs at least 2 observation rows")
        if len(self.object_ids) != n:
            raise ValueError(f"{len(self.object_ids)} object ids for {n} columns")
        if len(self.timestamps) != m:
            raise ValueError(f"{len(self.timestamps)} timestamps for {m} rows")
        if len(set(self.object_ids)) != n:
            raise ValueError("object ids must be unique")
        keys = [_label_key(t) for t in self.timestamps]
        if any(b <= a for a, b in zip(keys, keys[1:])):
            raise ValueError("timestamps must be strictly increasing")
        values.setflags(write=False)

    @property
    def n_times(self) -> int:
        return self.values.shape[0]

    @property
    def n_objects(self) -> int:
        return self.values.shape[1]

    def column(self, index: int) -> np.ndarray:
        return self.values[:, index]


@dataclass(frozen=True)
class NormalizationInfo:
    """Per-column scaling record; constant marks zero-norm columns left as-is."""

    mode: str
    scales: np.ndarray
    constant: np.ndarray

    def __post_init__(self):
        if self.mode not in ("none", "per-column-scale"):
            raise ValueError(f"unknown normalization mode {self.mode!r}")
        object.__setattr__(self, "scales", np.asarray(self.scales, dtype=float))
        object.__setattr__(self, "constant", np.asarray(self.constant, dtype=bool))
        if np.any(self.scales <= 0):
            raise ValueError("scales must be positive")


def normalize(matrix: TsdMatrix, mode: str = "per-column-scale") -> tuple[TsdMatrix, NormalizationInfo]:
    """Divide each column by its Frobenius norm (zero columns stay, flagged).

    Returns the scaled panel and the info needed to invert the transform.
    """
    n = matrix.n_objects
    if mode == "none":
        info = NormalizationInfo("none", np.ones(n), np.zeros(n, dtype=bool))
        return matrix, info
    if mode != "per-column-scale":
        raise ValueError(f"unknown normalization mode {mode!r}")
    norms = np.linalg.norm(matrix.values, axis=0)
    constant = norms == 0.0
    scales = np.where(constant, 1.0, norms)
    scaled = matrix.values / scales
    out = TsdMatrix(scaled, matrix.object_ids, matrix.timestamps, matrix.unit)
    return out, NormalizationInfo("per-column-scale", scales, constant)


def denormalize(matrix: TsdMatrix, info: NormalizationInfo) -> TsdMatrix:
    """Invert normalize(); scales must align with the matrix columns."""
    if info.scales.shape[0] != matrix.n_objects:
        raise ValueError("normalization info does not match the matrix width")
    values = matrix.values * info.scales
    return TsdMatrix(values, matrix.object_ids, matrix.timestamps, matrix.unit)


def load_wide_csv(path, unit: str = "kWh", min_cols: int = 2) -> TsdMatrix:
    """Load a wide panel CSV: header `time,<id1>,...,<idn>`, one row per time."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError("empty file") from None
        if len(header) < 1 + min_cols:
            raise ParseError(f"header needs a time column and at least {min_cols} object ids", line=1)
        object_ids = [c.strip() for c in header[1:]]
        if len(set(object_ids)) != len(object_ids):
            raise ParseError("duplicate object ids in header", line=1)
        n = len(object_ids)
        timestamps: list[str] = []
        rows: list[list[float]] = []
        for lineno, record in enumerate(reader, start=2):
            if not record:
                continue
            if len(record) != n + 1:
                raise ParseError(f"expected {n + 1} cells, got {len(record)}", line=lineno)
            timestamps.append(record[0].strip())
            try:
                row = [float(cell) for cell in record[1:]]
            except ValueError as exc:
                raise ParseError(f"non-numeric cell: {exc}", line=lineno) from None
            if not all(math.isfinite(v) for v in row):
                raise ParseError("non-finite value", line=lineno)
            rows.append(row)
    if not rows:
        raise ParseError("no data rows")
    if len(rows) < 2:
        raise ParseError("fewer than 2 data rows")
    keys = [_label_key(t) for t in timestamps]
    for i in range(1, len(keys)):
        if keys[i] <= keys[i - 1]:
            raise ParseError(
                f"timestamps not strictly increasing at {timestamps[i]!r}", line=i + 2
            )
    return TsdMatrix(np.array(rows, dtype=float), object_ids, timestamps, unit)


def save_wide_csv(path, matrix: TsdMatrix, time_column: str = "time") -> None:
    """Write a wide panel CSV with 17-significant-digit floats (exact roundtrip)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([time_column, *matrix.object_ids])
        for t, row in zip(matrix.timestamps, matrix.values):
            writer.writerow([t, *(f"{v:.17g}" for v in row)])


LONG_HEADER = ("time", "user_id", "consumption")


def load_long_csv(path, unit: str = "kWh") -> TsdMatrix:
    """Pivot a record-per-row CSV (`time,user_id,consumption`) into a panel.

    The complete time x user grid must be present; gaps are an error (no
    imputation).  Row order in the file never affects the result.
    """
    cells: dict[tuple[str, str], float] = {}
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError("empty file") from None
        if tuple(c.strip() for c in header) != LONG_HEADER:
            raise ParseError(f"expected header {','.join(LONG_HEADER)}", line=1)
        for lineno, record in enumerate(reader, start=2):
            if not record:
                continue
            if len(record) != 3:
                raise ParseError(f"expected 3 cells, got {len(record)}", line=lineno)
            t, user, raw = (c.strip() for c in record)
            key = (t, user)
            if key in cells:
                raise ParseError(f"duplicate (time,user) pair ({t},{user})", line=lineno)
            try:
                value = float(raw)
            except ValueError:
                raise ParseError(f"non-numeric consumption {raw!r}", line=lineno) from None
            if not math.isfinite(value):
                raise ParseError("non-finite consumption", line=lineno)
            cells[key] = value
    if not cells:
        raise ParseError("no data rows")
    times = sorted({t for t, _ in cells}, key=_label_key)
    users = sorted({u for _, u in cells}, key=_label_key)
    missing = [(t, u) for t in times for u in users if (t, u) not in cells]
    if missing:
        listed = ", ".join(f"({t},{u})" for t, u in missing[:10])
        raise ParseError(f"{len(missing)} missing cell(s), first: {listed}")
    if len(times) < 2 or len(users) < 2:
        raise ParseError("need at least 2 times and 2 users")
    values = np.array([[cells[(t, u)] for u in users] for t in times], dtype=float)
    return TsdMatrix(values, users, times, unit)


@dataclass(frozen=True)
class SyntheticSpec:
    """Recipe for a panel with planted affine groups.

    n_groups base columns come first; group members are a*base + b plus
    relative noise; the last round(independent_fraction * n_objects) columns
    are unrelated.  Everything is a deterministic function of seed.
    """

    n_objects: int
    n_times: int
    n_groups: int
    noise_level: float = 0.0
    independent_fraction: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.n_objects < 2 or self.n_times < 2 or self.n_groups < 1:
            raise ValueError("n_objects and n_times must be >= 2, n_groups >= 1")
        if self.n_groups > self.n_objects:
            raise ValueError("n_groups cannot exceed n_objects")
        if self.noise_level < 0:
            raise ValueError("noise_level must be nonnegative")
        if not 0.0 <= self.independent_fraction <= 1.0:
            raise ValueError("independent_fraction must be in [0, 1]")
        if self.n_groups + self.n_independent > self.n_objects:
            raise ValueError("independent_fraction leaves no room for the group bases")

    @property
    def n_independent(self) -> int:
        return int(round(self.independent_fraction * self.n_objects))


def generate_synthetic(spec: SyntheticSpec) -> tuple[TsdMatrix, list[int]]:
    """Generate a planted-group panel and its ground-truth labels.

    Labels give the group index per column, -1 for independent columns.
    Member noise is scaled by the member's own RMS level and additionally
    attenuated by a log-uniform factor in [0.1, 1] so a population of
    members spans a decade of fit errors around noise_level.
    """
    rng = np.random.default_rng(spec.seed)
    m, n, g = spec.n_times, spec.n_objects, spec.n_groups
    n_indep = spec.n_independent
    n_members = n - g - n_indep

    def fresh_column() -> np.ndarray:
        offset = rng.uniform(3.0, 10.0)
        amplitude = rng.uniform(0.5, 2.5)
        return offset + amplitude * rng.standard_normal(m)

    bases = np.column_stack([fresh_column() for _ in range(g)])
    columns = [bases[:, k] for k in range(g)]
    labels = list(range(g))
    for _ in range(n_members):
        group = int(rng.integers(0, g))
        a = rng.uniform(0.5, 2.0)
        b = rng.uniform(-1.0, 1.0)
        clean = a * bases[:, group] + b
        col = clean
        if spec.noise_level > 0:
            attenuation = 10.0 ** rng.uniform(-1.0, 0.0)
            scale = np.linalg.norm(clean) / math.sqrt(m)
            col = clean + rng.normal(0.0, spec.noise_level * attenuation * scale, m)
        columns.append(col)
        labels.append(group)
    for _ in range(n_indep):
        columns.append(fresh_column())
        labels.append(-1)

    values = np.column_stack(columns)
    object_ids = [f"x{i + 1}" for i in range(n)]
    timestamps = [f"t{i + 1}" for i in range(m)]
    return TsdMatrix(values, object_ids, timestamps), labels
