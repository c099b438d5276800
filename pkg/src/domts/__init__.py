"""domts: dominant-subset selection and affine reconstruction for time-series panels."""

from .affine import (
    AffineCoefficients,
    PairMatrix,
    apply_affine,
    augment_ones,
    fit_pair_affine,
    init_transform,
    stream_append,
)
from .bench import DatasetSpec, SweepReport, SweepSpec, run_sweep, emit_tables
from .distance import AFF, LS, LossReport, information_loss, lcd
from .linalg import (
    LeastSquaresSolution,
    SingularUpdateError,
    TransformState,
    append_row_update,
    solve_least_squares,
)
from .reconstruct import (
    ReconstructionReport,
    StorageSavings,
    reconstruct_targets,
    storage_savings,
)
from .selection import (
    Assignment,
    DominanceGraph,
    SelectionDocument,
    SelectionResult,
    SolverConfig,
    build_dominance_graph,
    document_from_result,
    gsa,
    select_pivot,
    ssa,
)
from .tsd import (
    NormalizationInfo,
    ParseError,
    SyntheticSpec,
    TsdMatrix,
    denormalize,
    generate_synthetic,
    load_long_csv,
    load_wide_csv,
    normalize,
    save_wide_csv,
)

__version__ = "0.1.0"

__all__ = [
    "AFF",
    "LS",
    "AffineCoefficients",
    "Assignment",
    "DatasetSpec",
    "DominanceGraph",
    "LeastSquaresSolution",
    "LossReport",
    "NormalizationInfo",
    "PairMatrix",
    "ParseError",
    "ReconstructionReport",
    "SelectionDocument",
    "SelectionResult",
    "SingularUpdateError",
    "SolverConfig",
    "StorageSavings",
    "SweepReport",
    "SweepSpec",
    "SyntheticSpec",
    "TransformState",
    "TsdMatrix",
    "append_row_update",
    "apply_affine",
    "augment_ones",
    "build_dominance_graph",
    "denormalize",
    "document_from_result",
    "emit_tables",
    "fit_pair_affine",
    "generate_synthetic",
    "gsa",
    "information_loss",
    "init_transform",
    "lcd",
    "load_long_csv",
    "load_wide_csv",
    "normalize",
    "reconstruct_targets",
    "run_sweep",
    "save_wide_csv",
    "select_pivot",
    "solve_least_squares",
    "ssa",
    "storage_savings",
    "stream_append",
]
