"""Run several algorithms on one dataset and score them side by side."""

from __future__ import annotations

import json
import logging
import time
from dataclasses import dataclass, field

import numpy as np

from ..data import Dataset
from ..metrics import MetricsReport, evaluate
from ..pipeline import AUTO, PipelineConfig, run_moca
from .io import read_assignments
from .kmeans import kmeans_baseline

logger = logging.getLogger(__name__)

SCHEMA = "moca-sm.report/1"

# the six indices of the comparison figures, in table order
TABLE_METRICS = (
    ("purity", "purity"),
    ("rand_index", "RI"),
    ("f_measure", "F"),
    ("adjusted_rand_index", "ARI"),
    ("precision", "precision"),
    ("entropy", "entropy"),
)


@dataclass
class BenchConfig:
    final_clusters: int
    L: object = AUTO
    normalize: bool = False
    seed: int = 0
    linkage: str = "complete"
    refresh_dissimilarity: bool = True

    def as_dict(self) -> dict:
        return {
            "final_clusters": int(self.final_clusters),
            "L": self.L if self.L == AUTO else int(self.L),
            "normalize": bool(self.normalize),
            "seed": int(self.seed),
            "linkage": self.linkage,
            "refresh_dissimilarity": bool(self.refresh_dissimilarity),
        }


@dataclass
class RunReport:
    algorithm: str
    config: dict
    assignments: np.ndarray | None = None
    metrics: MetricsReport | None = None
    trace: dict = field(default_factory=dict)
    duration: float = 0.0
    error: str | None = None

    @property
    def failed(self) -> bool:
        return self.error is not None

    def as_dict(self, timings: bool = False) -> dict:
        out = {"algorithm": self.algorithm, "status": "FAILED" if self.failed else "ok"}
        out["config"] = self.config
        if self.failed:
            out["error"] = self.error
            return out
        out["n_clusters"] = int(len(np.unique(self.assignments)))
        if self.metrics is not None:
            out["metrics"] = {k: round(float(v), 12) for k, v in self.metrics.as_dict().items()}
        out["trace"] = self.trace
        if timings:
            out["duration_s"] = round(self.duration, 6)
        out["assignments"] = [int(v) for v in self.assignments]
        return out


def _moca(data: Dataset, config: BenchConfig):
    result = run_moca(
        data,
        PipelineConfig(
            final_clusters=config.final_clusters,
            L=config.L,
            normalize=config.normalize,
            linkage=config.linkage,
            refresh_dissimilarity=config.refresh_dissimilarity,
        ),
    )
    st = result.state
    trace = {
        "L": result.L,
        "n0": result.n0,
        "initial_heads": [int(h) for h in result.heads],
        "initial_clusters": result.initial_clusters,
        "rounds": len(st.trace),
        "allocations": sum(len(r.allocations) for r in st.trace),
        "dropouts": sum(len(r.dropouts) for r in st.trace),
        "merges": len(st.merges),
        "final_heads": [int(h) for h in st.heads],
        "warnings": list(result.warnings),
    }
    return result.labels, trace


def _kmeans(data: Dataset, config: BenchConfig):
    from ..data import min_max_normalize

    if config.normalize:
        data = min_max_normalize(data)
    return kmeans_baseline(data, config.final_clusters, seed=config.seed), {}


ALGORITHMS = {"moca": _moca, "kmeans": _kmeans}


def run_one(name: str, data: Dataset, config: BenchConfig, path: str | None = None) -> RunReport:
    """Run (or, for an external assignment file, load) one algorithm and score it."""
    start = time.perf_counter()
    report = RunReport(name, config.as_dict() if path is None else {"source": str(path)})
    try:
        if path is not None:
            labels, trace = read_assignments(path), {}
            if labels.size != data.m:
                raise ValueError(f"{path} assigns {labels.size} objects, dataset has {data.m}")
        else:
            labels, trace = ALGORITHMS[name](data, config)
        report.assignments = np.asarray(labels)
        report.trace = trace
        if data.labels is not None:
            report.metrics = evaluate(report.assignments, data.labels)
    except Exception as exc:  # a failing run is reported, not raised
        logger.warning("%s failed: %s", name, exc)
        report.error = f"{type(exc).__name__}: {exc}"
    report.duration = time.perf_counter() - start
    return report


def run_benchmark(data: Dataset, algorithms, config: BenchConfig, external: dict | None = None):
    """Run every algorithm, then every external assignment file, in order."""
    reports = [run_one(name, data, config) for name in algorithms]
    for name, path in (external or {}).items():
        reports.append(run_one(name, data, config, path=path))
    return reports


def report_document(reports, dataset_info: dict, timings: bool = False) -> str:
    doc = {
        "schema": SCHEMA,
        "dataset": dataset_info,
        "runs": [r.as_dict(timings) for r in reports],
    }
    return json.dumps(doc, indent=2) + "\n"


def comparison_table(reports) -> str:
    headers = ["algorithm"] + [label for _, label in TABLE_METRICS]
    rows = []
    for r in reports:
        if r.failed:
            rows.append([r.algorithm, "FAILED"] + [""] * (len(TABLE_METRICS) - 1))
        elif r.metrics is None:
            rows.append([r.algorithm] + ["-"] * len(TABLE_METRICS))
        else:
            m = r.metrics.as_dict()
            rows.append([r.algorithm] + [f"{m[key]:.4f}" for key, _ in TABLE_METRICS])
    widths = [max(len(str(row[i])) for row in [headers] + rows) for i in range(len(headers))]
    lines = []
    for row in [headers] + rows:
        cells = [str(c).ljust(w) if i == 0 else str(c).rjust(w) for i, (c, w) in enumerate(zip(row, widths))]
        lines.append("  ".join(cells).rstrip())
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"
