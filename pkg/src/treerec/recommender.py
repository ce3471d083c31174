"""Performance table construction, budget-constrained top-k queries, and
ranking evaluation against measured oracles.

The table is built once offline: every layout in the design space gets its
estimated per-task scores, ranking score, and compute costs.  Queries only
filter and sort the stored records, so changing the budget never triggers
re-estimation.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .costmodel import CostProfile, layout_cost, models_equivalent, relative_reduction
from .enumerator import DEFAULT_SPACE_CAP, enumerate_layouts
from .estimator import (
    TaskWeights,
    TwoTaskTable,
    estimate_task_scores,
    ranking_score,
    task_weights,
    uniform_weights,
)

TABLE_FORMAT_VERSION = 1
BUDGET_KINDS = ("none", "flops-pct", "models")


@dataclass(frozen=True)
class PerformanceRecord:
    """One layout's estimates and costs, as persisted in the table."""

    index: int
    layout: str
    estimates: tuple[float, ...]
    score: float
    flops: float
    params: float
    flops_pct: float
    params_pct: float
    models_equivalent: float

    def to_json(self) -> str:
        doc = {
            "index": self.index,
            "layout": self.layout,
            "estimates": list(self.estimates),
            "score": self.score,
            "flops": self.flops,
            "params": self.params,
            "flops_pct": self.flops_pct,
            "params_pct": self.params_pct,
            "models_equivalent": self.models_equivalent,
        }
        return json.dumps(doc, sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_json(cls, text: str) -> "PerformanceRecord":
        doc = json.loads(text)
        return cls(
            index=int(doc["index"]),
            layout=doc["layout"],
            estimates=tuple(float(v) for v in doc["estimates"]),
            score=float(doc["score"]),
            flops=float(doc["flops"]),
            params=float(doc["params"]),
            flops_pct=float(doc["flops_pct"]),
            params_pct=float(doc["params_pct"]),
            models_equivalent=float(doc["models_equivalent"]),
        )


@dataclass(frozen=True)
class TableMeta:
    num_tasks: int
    num_points: int
    embed_dim: int
    delay: int
    normalization: str
    raw_weights: tuple[float, ...]
    weights: tuple[float, ...]
    inputs_digest: str
    version: int = TABLE_FORMAT_VERSION


@dataclass(frozen=True)
class PerformanceTable:
    meta: TableMeta
    records: tuple[PerformanceRecord, ...]

    def to_bytes(self) -> bytes:
        header = {
            "kind": "performance-table",
            "version": self.meta.version,
            "num_tasks": self.meta.num_tasks,
            "num_points": self.meta.num_points,
            "embed_dim": self.meta.embed_dim,
            "delay": self.meta.delay,
            "normalization": self.meta.normalization,
            "raw_weights": list(self.meta.raw_weights),
            "weights": list(self.meta.weights),
            "inputs_digest": self.meta.inputs_digest,
        }
        lines = [json.dumps(header, sort_keys=True, separators=(",", ":"))]
        lines.extend(record.to_json() for record in self.records)
        return ("\n".join(lines) + "\n").encode("ascii")

    @classmethod
    def from_bytes(cls, data: bytes) -> "PerformanceTable":
        lines = data.decode("ascii").splitlines()
        if not lines:
            raise ValueError("empty performance table")
        header = json.loads(lines[0])
        if header.get("kind") != "performance-table":
            raise ValueError("not a performance table file")
        if header.get("version") != TABLE_FORMAT_VERSION:
            raise ValueError(f"unsupported table version {header.get('version')}")
        meta = TableMeta(
            num_tasks=int(header["num_tasks"]),
            num_points=int(header["num_points"]),
            embed_dim=int(header["embed_dim"]),
            delay=int(header["delay"]),
            normalization=header["normalization"],
            raw_weights=tuple(float(v) for v in header["raw_weights"]),
            weights=tuple(float(v) for v in header["weights"]),
            inputs_digest=header["inputs_digest"],
        )
        records = tuple(PerformanceRecord.from_json(line) for line in lines[1:] if line)
        indices = [r.index for r in records]
        if indices != list(range(len(records))):
            raise ValueError("table records must be dense and ordered from index 0")
        return cls(meta, records)

    def save(self, path) -> None:
        Path(path).write_bytes(self.to_bytes())

    @classmethod
    def load(cls, path) -> "PerformanceTable":
        return cls.from_bytes(Path(path).read_bytes())

    def digest(self) -> str:
        return hashlib.sha256(self.to_bytes()).hexdigest()


def _inputs_digest(num_tasks, num_points, two_task: TwoTaskTable, profile: CostProfile,
                   embed_dim, delay, normalization) -> str:
    doc = {
        "num_tasks": num_tasks,
        "num_points": num_points,
        "two_task": two_task.rows(),
        "blocks": list(profile.blocks),
        "heads": list(profile.heads),
        "embed_dim": embed_dim,
        "delay": delay,
        "normalization": normalization,
    }
    blob = json.dumps(doc, sort_keys=True, separators=(",", ":")).encode("ascii")
    return hashlib.sha256(blob).hexdigest()


def build_table(num_tasks: int, num_points: int, two_task: TwoTaskTable,
                profile: CostProfile, embed_dim: int = 2, delay: int = 1,
                normalization: str = "softmax", cap: int = DEFAULT_SPACE_CAP) -> PerformanceTable:
    """Enumerate the whole design space and estimate every layout once.

    Task weights are computed a single time from the two-task table.  When
    the accuracy sequences are too short for the configured delay embedding
    (fewer than embed_dim * delay + 1 points) the weights fall back to
    uniform, recorded as normalization scheme "uniform".
    """
    if two_task.num_tasks != num_tasks:
        raise ValueError(f"two-task table covers {two_task.num_tasks} tasks, expected {num_tasks}")
    if two_task.num_points != num_points:
        raise ValueError(f"two-task table covers {two_task.num_points} points, expected {num_points}")
    if profile.num_blocks != num_points:
        raise ValueError(f"cost profile has {profile.num_blocks} blocks, expected {num_points}")
    profile.head_costs(num_tasks)  # fail early on unusable head rows
    two_task.require_complete()

    if num_points + 1 >= embed_dim * delay + 1:
        weights = task_weights(two_task, embed_dim, delay, normalization)
    else:
        weights = uniform_weights(num_tasks)

    records = []
    for index, layout in enumerate(enumerate_layouts(num_tasks, num_points, cap)):
        estimates = estimate_task_scores(layout, two_task)
        score = ranking_score(estimates, weights)
        cost = layout_cost(layout, profile)
        flops_pct, params_pct = relative_reduction(cost, profile, num_tasks)
        records.append(PerformanceRecord(
            index=index,
            layout=layout.to_text(),
            estimates=estimates,
            score=score,
            flops=cost[0],
            params=cost[1],
            flops_pct=flops_pct,
            params_pct=params_pct,
            models_equivalent=models_equivalent(cost, profile, num_tasks),
        ))
    meta = TableMeta(
        num_tasks=num_tasks,
        num_points=num_points,
        embed_dim=embed_dim,
        delay=delay,
        normalization=weights.scheme,
        raw_weights=weights.raw,
        weights=weights.normalized,
        inputs_digest=_inputs_digest(num_tasks, num_points, two_task, profile,
                                     embed_dim, delay, normalization),
    )
    return PerformanceTable(meta, tuple(records))


@dataclass(frozen=True)
class Budget:
    """Feasibility constraint plus result count for a top-k query."""

    kind: str = "none"
    limit: float = math.inf
    k: int = 5

    def __post_init__(self) -> None:
        if self.kind not in BUDGET_KINDS:
            raise ValueError(f"budget kind must be one of {BUDGET_KINDS}, got {self.kind!r}")
        if self.k < 1:
            raise ValueError("k must be at least 1")
        if self.kind != "none" and not math.isfinite(self.limit):
            raise ValueError(f"budget kind {self.kind!r} needs a finite limit")

    def admits(self, record: PerformanceRecord) -> bool:
        if self.kind == "none":
            return True
        if self.kind == "flops-pct":
            return record.flops_pct <= self.limit
        return record.models_equivalent <= self.limit


@dataclass(frozen=True)
class Recommendation:
    records: tuple[PerformanceRecord, ...]
    status: str  # "ok", or "empty" when the budget excludes every layout


def recommend(table: PerformanceTable, budget: Budget) -> Recommendation:
    """Top-k records satisfying the budget, best ranking score first.

    Ties break toward lower flops, then the layout's canonical key.  Pure
    read over the stored records; no re-estimation happens.
    """
    feasible = [r for r in table.records if budget.admits(r)]
    feasible.sort(key=lambda r: (-r.score, r.flops, r.layout))
    top = tuple(feasible[: budget.k])
    return Recommendation(top, "ok" if top else "empty")


def pearson(xs, ys) -> float:
    """Sample correlation coefficient of two equal-length vectors."""
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    if x.ndim != 1 or x.shape != y.shape:
        raise ValueError("inputs must be equal-length vectors")
    if x.size < 2:
        raise ValueError("correlation needs at least two points")
    dx = x - x.mean()
    dy = y - y.mean()
    sxx = float(np.dot(dx, dx))
    syy = float(np.dot(dy, dy))
    if sxx == 0.0 or syy == 0.0:
        raise ValueError("zero variance input")
    return float(np.dot(dx, dy) / math.sqrt(sxx * syy))


def rank_vector(values) -> tuple[float, ...]:
    """Ranks starting at 1; ties receive the average of their positions."""
    arr = np.asarray(values, dtype=float)
    order = np.argsort(arr, kind="stable")
    ranks = np.empty(arr.size, dtype=float)
    i = 0
    while i < arr.size:
        j = i
        while j + 1 < arr.size and arr[order[j + 1]] == arr[order[i]]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2 + 1
        i = j + 1
    return tuple(float(r) for r in ranks)


@dataclass(frozen=True)
class RankingReport:
    """Correlation of predicted scores with an oracle, raw and rank-level."""

    score_pearson: float
    rank_pearson: float
    num_layouts: int


def load_oracle(path) -> dict[int, float]:
    """Read ``index,value`` rows; a header row is tolerated."""
    values: dict[int, float] = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        text = line.strip()
        if not text or text.startswith("#"):
            continue
        fields = text.split(",")
        if len(fields) != 2:
            raise ValueError(f"{path}:{lineno}: expected 'index,value'")
        try:
            index, value = int(fields[0]), float(fields[1])
        except ValueError:
            if lineno == 1:
                continue  # header row
            raise ValueError(f"{path}:{lineno}: expected 'index,value'") from None
        if index in values:
            raise ValueError(f"{path}:{lineno}: duplicate index {index}")
        values[index] = value
    if not values:
        raise ValueError(f"no oracle values in {path}")
    return values


def evaluate_ranking(table: PerformanceTable, oracle) -> RankingReport:
    """Correlate the table's predicted scores with measured oracle values.

    ``oracle`` maps layout index to measured performance, or is a path to
    ``index,value`` rows.  Both the raw-score correlation and the rank-vector
    correlation are reported.
    """
    values = oracle if isinstance(oracle, dict) else load_oracle(oracle)
    missing = [r.index for r in table.records if r.index not in values]
    if missing:
        shown = ", ".join(str(i) for i in missing[:10])
        more = "" if len(missing) <= 10 else f" and {len(missing) - 10} more"
        raise ValueError(f"oracle is missing layout indices {shown}{more}")
    predicted = [r.score for r in table.records]
    actual = [values[r.index] for r in table.records]
    return RankingReport(
        score_pearson=pearson(predicted, actual),
        rank_pearson=pearson(rank_vector(predicted), rank_vector(actual)),
        num_layouts=len(predicted),
    )
