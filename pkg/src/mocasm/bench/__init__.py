"""Benchmark harness: dataset I/O, generators, a k-means baseline and the CLI."""

from .datasets import BlobSpec, DATASET_3_2, SPHERICAL_3_4, generate_gaussian_blobs, load_builtin
from .io import DataError, parse_csv, read_assignments, write_assignments, write_csv
from .kmeans import KMeansBaseline, kmeans_baseline
from .report import BenchConfig, RunReport, comparison_table, report_document, run_benchmark

__all__ = [
    "BenchConfig",
    "BlobSpec",
    "DATASET_3_2",
    "DataError",
    "KMeansBaseline",
    "RunReport",
    "SPHERICAL_3_4",
    "comparison_table",
    "generate_gaussian_blobs",
    "kmeans_baseline",
    "load_builtin",
    "parse_csv",
    "read_assignments",
    "report_document",
    "run_benchmark",
    "write_assignments",
    "write_csv",
]
