"""K-means clustering under cardinality and pairwise constraints, solved by ADMM."""

from .admm import SolveResult, SolverConfig, SolverState, best_of, run, run_sweep
from .constraints import ConstraintSet, ValidationReport, satisfies, validate
from .errors import DimensionError, IngestionError, OracleSizeError, ValidationError
from .kernels import BACKEND
from .kmeans import KmeansResult, lloyd
from .metrics import metric_accuracy, metric_nmi
from .objective import compute_B, coupling_weights, kmeans_objective, objective_value
from .operators import Shape
from .oracle import OracleResult, brute_force_solve

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "ConstraintSet", "DimensionError", "IngestionError", "KmeansResult",
    "OracleResult", "OracleSizeError", "Shape", "SolveResult", "SolverConfig",
    "SolverState", "ValidationError", "ValidationReport", "best_of", "brute_force_solve",
    "compute_B", "coupling_weights", "kmeans_objective", "lloyd", "metric_accuracy",
    "metric_nmi", "objective_value", "run", "run_sweep", "satisfies", "validate",
]
