"""Downstream-result ingestion, improvement deltas, and correlation analysis.

The dependent variable is the per-repeat improvement of a domain-specific
model over the baseline model's per-task mean score. Improvements are
correlated (Pearson) against source-target similarity values; because two of
the measures are dissimilarities, the matrix can be computed either on raw
values or after orienting every measure so that larger means more similar.
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from .errors import DataError
from .metrics import MEASURE_NAMES

RESULTS_HEADER = ("task", "model", "repeat", "score")
SIMILARITY_HEADER = ("source", "target", "measure", "value")

DIRECTION_RAW = "raw"
DIRECTION_SIMILARITY = "similarity"

RANK_KEYS = ("ppl", "jsd", "tvc", "composite")
_COMPOSITE_MEASURES = ("ppl", "jsd_pooled", "tvc")


@dataclass
class ResultsTable:
    """Rows of (task, model, repeat, score in percentage points).

    ``task_targets``/``model_sources`` map task and model names onto corpus
    ids used by similarity profiles; both default to the identity.
    """

    rows: list[tuple[str, str, int, float]]
    task_targets: dict[str, str] = field(default_factory=dict)
    model_sources: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        seen = set()
        for task, model, repeat, _score in self.rows:
            key = (task, model, repeat)
            if key in seen:
                raise DataError(f"duplicate result row for {key}")
            seen.add(key)

    def target_of(self, task: str) -> str:
        return self.task_targets.get(task, task)

    def source_of(self, model: str) -> str:
        return self.model_sources.get(model, model)


def read_results_csv(path) -> ResultsTable:
    """Read a ``task,model,repeat,score`` CSV."""
    rows = []
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(h.strip() for h in header) != RESULTS_HEADER:
            raise DataError(f"{path}: expected header {','.join(RESULTS_HEADER)}")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 4:
                raise DataError(f"{path}: line {lineno}: expected 4 fields")
            try:
                rows.append((row[0], row[1], int(row[2]), float(row[3])))
            except ValueError as exc:
                raise DataError(f"{path}: line {lineno}: {exc}") from exc
    return ResultsTable(rows)


def bundled_results_path():
    """Path context manager for the packaged downstream-results table."""
    ref = resources.files("corpus_affinity").joinpath("data/downstream_means.csv")
    return resources.as_file(ref)


def load_bundled_results() -> ResultsTable:
    """The packaged mean scores of six models on twelve tasks."""
    with bundled_results_path() as path:
        return read_results_csv(path)


@dataclass
class DeltaPoint:
    """One non-baseline result row paired with similarity values."""

    task: str
    model: str
    repeat: int
    delta: float
    similarity: dict[str, float] = field(default_factory=dict)


def compute_deltas(results: ResultsTable, baseline_model: str) -> list[DeltaPoint]:
    """Improvement of every non-baseline row over the per-task baseline mean."""
    baseline_scores: dict[str, list[float]] = {}
    for task, model, _repeat, score in results.rows:
        if model == baseline_model:
            baseline_scores.setdefault(task, []).append(score)
    points = []
    for task, model, repeat, score in results.rows:
        if model == baseline_model:
            continue
        base = baseline_scores.get(task)
        if not base:
            raise DataError(f"no baseline ({baseline_model!r}) rows for task {task!r}")
        points.append(DeltaPoint(task, model, repeat, score - sum(base) / len(base)))
    return points


def read_similarity_csv(path) -> dict[tuple[str, str], dict[str, float]]:
    """Read ``source,target,measure,value`` rows into a (source, target) map."""
    out: dict[tuple[str, str], dict[str, float]] = {}
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(h.strip() for h in header) != SIMILARITY_HEADER:
            raise DataError(f"{path}: expected header {','.join(SIMILARITY_HEADER)}")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 4:
                raise DataError(f"{path}: line {lineno}: expected 4 fields")
            try:
                value = float(row[3])
            except ValueError as exc:
                raise DataError(f"{path}: line {lineno}: {exc}") from exc
            out.setdefault((row[0], row[1]), {})[row[2]] = value
    return out


def attach_similarities(
    points: list[DeltaPoint],
    similarities: dict[tuple[str, str], dict[str, float]],
    results: ResultsTable | None = None,
) -> None:
    """Fill each point's similarity values from a (source, target) lookup."""
    for point in points:
        source = results.source_of(point.model) if results else point.model
        target = results.target_of(point.task) if results else point.task
        values = similarities.get((source, target))
        if values is None:
            raise DataError(f"no similarity values for source {source!r} / target {target!r}")
        point.similarity = dict(values)


def pearson_r(x, y) -> float:
    """Pearson product-moment correlation coefficient."""
    xa = np.asarray(x, dtype=np.float64)
    ya = np.asarray(y, dtype=np.float64)
    if xa.ndim != 1 or ya.ndim != 1 or xa.size != ya.size:
        raise ValueError(f"length mismatch: {xa.size} vs {ya.size}")
    if xa.size < 2:
        raise ValueError("need at least two points")
    dx = xa - xa.mean()
    dy = ya - ya.mean()
    sx = float(dx @ dx)
    sy = float(dy @ dy)
    if sx == 0.0 or sy == 0.0:
        raise ZeroDivisionError("undefined correlation: an input has zero variance")
    r = float(dx @ dy) / math.sqrt(sx * sy)
    return min(max(r, -1.0), 1.0)


def _oriented(measure: str, value: float) -> tuple[str, float]:
    """Transform a measure so larger always means more similar."""
    if measure == "ppl":
        return "ppl_sim", -math.log(value)
    if measure.startswith("jsd"):
        return f"{measure}_sim", 1.0 - value
    return measure, value


@dataclass
class CorrelationReport:
    """Pairwise Pearson matrix over the delta and similarity variables."""

    variables: list[str]
    matrix: list[list[float | None]]
    n_points: int
    directionality: str

    def to_json_dict(self) -> dict:
        return {
            "directionality": self.directionality,
            "n_points": self.n_points,
            "variables": self.variables,
            "matrix": self.matrix,
        }

    def to_long_rows(self) -> list[tuple[str, str, float | None, int]]:
        rows = []
        for i, a in enumerate(self.variables):
            for j, b in enumerate(self.variables):
                rows.append((a, b, self.matrix[i][j], self.n_points))
        return rows

    def value(self, a: str, b: str) -> float | None:
        return self.matrix[self.variables.index(a)][self.variables.index(b)]


def correlation_matrix(
    points: list[DeltaPoint], directionality: str = DIRECTION_SIMILARITY
) -> CorrelationReport:
    """Correlate deltas with every attached similarity measure, pairwise.

    ``similarity`` orientation maps ppl to ``-ln(ppl)`` and every jsd to
    ``1 - jsd`` before correlating, so a positive coefficient reads "more
    similar, more improvement"; ``raw`` correlates the values untouched.
    Constant columns yield null entries (with a warning) instead of failing.
    """
    if directionality not in (DIRECTION_RAW, DIRECTION_SIMILARITY):
        raise ValueError(f"unknown directionality: {directionality!r}")
    if len(points) < 2:
        raise ValueError("need at least two delta points")
    present = set(points[0].similarity)
    for point in points:
        if set(point.similarity) != present:
            raise ValueError("every point must carry the same similarity measures")
    # Canonical variable order: the measure registry first, extras sorted.
    measure_names = [m for m in MEASURE_NAMES if m in present]
    measure_names += sorted(present - set(measure_names))

    columns: dict[str, list[float]] = {"delta": [p.delta for p in points]}
    for name in measure_names:
        if directionality == DIRECTION_SIMILARITY:
            oriented_name = _oriented(name, 0.0)[0]
            columns[oriented_name] = [_oriented(name, p.similarity[name])[1] for p in points]
        else:
            columns[name] = [p.similarity[name] for p in points]

    variables = list(columns)
    size = len(variables)
    matrix: list[list[float | None]] = [[None] * size for _ in range(size)]
    for i in range(size):
        matrix[i][i] = 1.0
        for j in range(i + 1, size):
            try:
                r = pearson_r(columns[variables[i]], columns[variables[j]])
            except ZeroDivisionError:
                warnings.warn(
                    f"constant column: correlation of {variables[i]!r} and "
                    f"{variables[j]!r} is undefined"
                )
                r = None
            matrix[i][j] = matrix[j][i] = r
    return CorrelationReport(variables, matrix, len(points), directionality)


def rank_sources(profiles, key: str = "composite") -> list[str]:
    """Order candidate source corpora for one target, most similar first.

    ``key`` picks a single measure (``ppl``, ``jsd``, ``tvc``) or
    ``composite`` (mean of the per-measure ranks over those three; ttr never
    participates). Ties break on lexicographic source id.
    """
    if key not in RANK_KEYS:
        raise ValueError(f"unknown ranking key: {key!r} (choose from {RANK_KEYS})")
    if not profiles:
        raise ValueError("no profiles to rank")
    targets = {p.target_id for p in profiles}
    if len(targets) != 1:
        raise ValueError(f"profiles mix targets: {sorted(targets)}")

    def oriented_mean(profile, measure: str) -> float:
        name = "jsd_pooled" if measure == "jsd" else measure
        return _oriented(name, profile.measures[name].mean)[1]

    if key != "composite":
        ordered = sorted(profiles, key=lambda p: (-oriented_mean(p, key), p.source_id))
        return [p.source_id for p in ordered]

    rank_positions: dict[str, list[int]] = {p.source_id: [] for p in profiles}
    for measure in _COMPOSITE_MEASURES:
        by_measure = sorted(
            profiles, key=lambda p: (-_oriented(measure, p.measures[measure].mean)[1], p.source_id)
        )
        for position, profile in enumerate(by_measure):
            rank_positions[profile.source_id].append(position)
    mean_rank = {sid: sum(r) / len(r) for sid, r in rank_positions.items()}
    ordered = sorted(profiles, key=lambda p: (mean_rank[p.source_id], p.source_id))
    return [p.source_id for p in ordered]
