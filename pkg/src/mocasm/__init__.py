"""MOCA-SM: multi-objective clustering with singleton congestion games."""

from .data import Dataset, ParameterError, build_distance_matrix, knn_table, min_max_normalize
from .estimator import MOCASM
from .metrics import MetricsReport, evaluate
from .objectives import Cluster, Clustering
from .pipeline import PipelineConfig, run_moca

__all__ = [
    "Cluster",
    "Clustering",
    "Dataset",
    "MOCASM",
    "MetricsReport",
    "ParameterError",
    "PipelineConfig",
    "build_distance_matrix",
    "evaluate",
    "knn_table",
    "min_max_normalize",
    "run_moca",
]

__version__ = "0.1.0"
