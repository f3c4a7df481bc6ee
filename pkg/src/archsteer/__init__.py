"""archsteer: interactive multi-objective optimization of architecture refactorings."""

from .evaluation import (
    AntipatternReport,
    Evaluator,
    ObjectiveVector,
    PerfIndices,
    detect_antipatterns,
    perf_q,
    solve_mva,
    system_reliability,
)
from .model import (
    ArchitectureModel,
    ModelParseError,
    ModelValidationError,
    derive_demands,
    load_model,
    load_model_file,
    serialize,
    validate,
)
from .optimizer import (
    ConfigError,
    Individual,
    RunArchive,
    SearchConfig,
    dominates,
    evolve_segment,
    fast_nondominated_sort,
    segment_plan,
)
from .refactoring import (
    CostParams,
    RefactoringAction,
    RefactoringSequence,
    apply_action,
    apply_sequence,
    architectural_weight,
    random_feasible_action,
    sequence_cost,
)

__version__ = "0.1.0"

__all__ = [
    "AntipatternReport",
    "ArchitectureModel",
    "ConfigError",
    "CostParams",
    "Evaluator",
    "Individual",
    "ModelParseError",
    "ModelValidationError",
    "ObjectiveVector",
    "PerfIndices",
    "RefactoringAction",
    "RefactoringSequence",
    "RunArchive",
    "SearchConfig",
    "apply_action",
    "apply_sequence",
    "architectural_weight",
    "derive_demands",
    "detect_antipatterns",
    "dominates",
    "evolve_segment",
    "fast_nondominated_sort",
    "load_model",
    "load_model_file",
    "perf_q",
    "random_feasible_action",
    "segment_plan",
    "sequence_cost",
    "serialize",
    "solve_mva",
    "system_reliability",
    "validate",
]
