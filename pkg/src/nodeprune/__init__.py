"""Hidden-node selection for one-hidden-layer tanh networks.

Train an oversized network, prune whole node groups with a two-step
Group Lasso / Adaptive Group Lasso proximal-gradient procedure, pick the
regularizers by AIC, and verify that the surviving network is minimal.
"""

from .datasets import (
    CsvFormatError,
    SimSpec,
    SplitSpec,
    Standardizer,
    UnknownTargetError,
    load_csv,
    save_csv,
    simulate_dataset,
    split_standardize,
)
from .network import (
    Dataset,
    NetworkParams,
    empirical_risk,
    forward,
    predict,
    risk_gradient,
)
from .optimizer import (
    FitReport,
    TrainConfig,
    prox_gradient_fit,
    project_linf,
    random_init,
)
from .penalty import (
    PenaltyKind,
    PenaltySpec,
    adaptive_weights,
    block_soft_threshold,
    group_norms,
    penalty_value,
)
from .selection import (
    DEFAULT_REG_GRID,
    GridSpec,
    PipelineError,
    SelectionResult,
    aic,
    two_step_fit,
)
from .structure import (
    MinimalityReport,
    NodeCounts,
    StructureTolerances,
    Violation,
    ViolationKind,
    canonical_reduce,
    check_minimal,
    count_nodes,
    distance_to_embedded_reference,
    drop_zero_nodes,
)

__version__ = "0.1.0"

__all__ = [
    "CsvFormatError",
    "Dataset",
    "DEFAULT_REG_GRID",
    "FitReport",
    "GridSpec",
    "MinimalityReport",
    "NetworkParams",
    "NodeCounts",
    "PenaltyKind",
    "PenaltySpec",
    "PipelineError",
    "SelectionResult",
    "SimSpec",
    "SplitSpec",
    "Standardizer",
    "StructureTolerances",
    "TrainConfig",
    "UnknownTargetError",
    "Violation",
    "ViolationKind",
    "adaptive_weights",
    "aic",
    "block_soft_threshold",
    "canonical_reduce",
    "check_minimal",
    "count_nodes",
    "distance_to_embedded_reference",
    "drop_zero_nodes",
    "empirical_risk",
    "forward",
    "group_norms",
    "load_csv",
    "penalty_value",
    "predict",
    "project_linf",
    "prox_gradient_fit",
    "random_init",
    "risk_gradient",
    "save_csv",
    "simulate_dataset",
    "split_standardize",
    "two_step_fit",
    "__version__",
]
