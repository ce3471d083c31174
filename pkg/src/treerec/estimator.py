"""Training-free task performance estimation for tree-structured layouts.

Per-task scores of a candidate layout are averages of measured two-task
results matched by pairwise branch depth.  Tasks are weighted by the
regularity of their two-task accuracy sequences, quantified as singular
value decomposition entropy (SVDE); the ranking score is the weighted sum.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from itertools import combinations
from pathlib import Path

import numpy as np

from .layout import Layout, branch_depth, is_valid

CSV_HEADER = ("task_i", "task_j", "branch", "delta_i", "delta_j")
NORMALIZATION_SCHEMES = ("softmax", "division", "minmax")


class TwoTaskTable:
    """Per-pair, per-depth relative performance of trained two-task models.

    Entry (i, j, b) holds both tasks' percent deltas for the model in which
    i and j share the first b blocks, b in [0, num_points].  Pairs are
    unordered: a lookup with the tasks swapped returns the components
    swapped.
    """

    def __init__(self, num_tasks: int, num_points: int):
        if num_tasks < 2:
            raise ValueError("a two-task table needs at least two tasks")
        if num_points < 1:
            raise ValueError("a two-task table needs at least one branching point")
        self.num_tasks = num_tasks
        self.num_points = num_points
        self._entries: dict[tuple[int, int, int], tuple[float, float]] = {}

    def _key(self, i: int, j: int, b: int) -> tuple[int, int, int]:
        if i == j:
            raise ValueError("two-task entries need two distinct tasks")
        for t in (i, j):
            if not 0 <= t < self.num_tasks:
                raise ValueError(f"task index {t} outside [0, {self.num_tasks})")
        if not 0 <= b <= self.num_points:
            raise ValueError(f"branch depth {b} outside [0, {self.num_points}]")
        return (min(i, j), max(i, j), b)

    def set_entry(self, i: int, j: int, b: int, delta_i: float, delta_j: float) -> None:
        key = self._key(i, j, b)
        if key in self._entries:
            raise ValueError(f"duplicate entry for pair ({key[0]}, {key[1]}) at depth {b}")
        if i > j:
            delta_i, delta_j = delta_j, delta_i
        self._entries[key] = (float(delta_i), float(delta_j))

    def get(self, i: int, j: int, b: int) -> float:
        """Task i's percent delta when paired with j at shared depth b."""
        key = self._key(i, j, b)
        try:
            both = self._entries[key]
        except KeyError:
            raise KeyError(f"missing two-task entry ({key[0]}, {key[1]}, {b})") from None
        return both[0] if i < j else both[1]

    def sequence(self, i: int, j: int) -> tuple[float, ...]:
        """Task i's deltas with partner j over shared depths 0..num_points."""
        return tuple(self.get(i, j, b) for b in range(self.num_points + 1))

    def missing(self) -> list[tuple[int, int, int]]:
        return [
            (i, j, b)
            for i, j in combinations(range(self.num_tasks), 2)
            for b in range(self.num_points + 1)
            if (i, j, b) not in self._entries
        ]

    def require_complete(self) -> None:
        gaps = self.missing()
        if gaps:
            shown = ", ".join(f"({i},{j},{b})" for i, j, b in gaps[:8])
            more = "" if len(gaps) <= 8 else f" and {len(gaps) - 8} more"
            raise ValueError(f"two-task table incomplete; missing {shown}{more}")

    @property
    def complete(self) -> bool:
        return not self.missing()

    def rows(self) -> list[tuple[int, int, int, float, float]]:
        return [(i, j, b, d[0], d[1]) for (i, j, b), d in sorted(self._entries.items())]

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(CSV_HEADER)
            writer.writerows(self.rows())

    @classmethod
    def from_csv(cls, path, num_tasks: int | None = None, num_points: int | None = None) -> "TwoTaskTable":
        """Load from ``task_i,task_j,branch,delta_i,delta_j`` rows.

        Unspecified dimensions are inferred from the data (largest task
        index plus one, largest branch depth).
        """
        rows = []
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header is None or tuple(h.strip() for h in header) != CSV_HEADER:
                raise ValueError(f"expected header {','.join(CSV_HEADER)!r} in {path}")
            for lineno, row in enumerate(reader, start=2):
                if not row:
                    continue
                if len(row) != 5:
                    raise ValueError(f"{path}:{lineno}: expected 5 fields, got {len(row)}")
                try:
                    rows.append((int(row[0]), int(row[1]), int(row[2]), float(row[3]), float(row[4])))
                except ValueError as exc:
                    raise ValueError(f"{path}:{lineno}: {exc}") from None
        if not rows:
            raise ValueError(f"no two-task entries in {path}")
        if num_tasks is None:
            num_tasks = max(max(i, j) for i, j, *_ in rows) + 1
        if num_points is None:
            num_points = max(b for _, _, b, *_ in rows)
        table = cls(num_tasks, num_points)
        for i, j, b, di, dj in rows:
            table.set_entry(i, j, b, di, dj)
        return table


def svde(sequence, embed_dim: int = 2, delay: int = 1) -> float:
    """Singular value decomposition entropy of a sequence.

    The sequence is delay-embedded into a matrix with ``embed_dim`` rows
    (row k is the sequence shifted by k * delay) and the Shannon entropy of
    its singular values, normalized to sum one, is returned.  Zero singular
    values contribute nothing.  The result is invariant under positive
    rescaling of the sequence but sensitive to the order of its items.
    """
    x = np.asarray(sequence, dtype=float)
    if x.ndim != 1:
        raise ValueError("sequence must be one-dimensional")
    if embed_dim < 1 or delay < 1:
        raise ValueError("embed_dim and delay must be positive")
    if x.size < embed_dim * delay + 1:
        raise ValueError(
            f"sequence of length {x.size} too short for embed_dim={embed_dim}, "
            f"delay={delay}; need at least {embed_dim * delay + 1} points"
        )
    width = x.size - (embed_dim - 1) * delay
    embedded = np.stack([x[k * delay : k * delay + width] for k in range(embed_dim)])
    spectrum = np.linalg.svd(embedded, compute_uv=False)
    total = float(spectrum.sum())
    if total == 0.0:
        raise ValueError("all-zero sequence has no singular spectrum")
    shares = spectrum / total
    shares = shares[shares > 0.0]
    return float(-(shares * np.log(shares)).sum())


@dataclass(frozen=True)
class TaskWeights:
    """Raw (negated mean entropy) and normalized per-task weights."""

    raw: tuple[float, ...]
    normalized: tuple[float, ...]
    scheme: str


def normalize_weights(raw, scheme: str = "softmax") -> tuple[float, ...]:
    """Map raw weights to a vector summing to one.

    softmax preserves the raw ordering and stays positive even though raw
    weights are negative.  Plain division flips the ordering whenever the
    raw sum is negative, and minmax pins the smallest weight to zero; both
    remain selectable for comparison.
    """
    w = np.asarray(raw, dtype=float)
    if w.ndim != 1 or w.size == 0:
        raise ValueError("weights must be a non-empty vector")
    if scheme == "softmax":
        z = np.exp(w - w.max())
        out = z / z.sum()
    elif scheme == "division":
        total = w.sum()
        if total == 0.0:
            raise ValueError("weights sum to zero; cannot normalize by division")
        out = w / total
    elif scheme == "minmax":
        span = w.max() - w.min()
        if span == 0.0:
            out = np.full(w.size, 1.0 / w.size)
        else:
            shifted = (w - w.min()) / span
            out = shifted / shifted.sum()
    else:
        raise ValueError(f"unknown normalization scheme {scheme!r}; pick one of {NORMALIZATION_SCHEMES}")
    return tuple(float(v) for v in out)


def task_weights(table: TwoTaskTable, embed_dim: int = 2, delay: int = 1,
                 scheme: str = "softmax") -> TaskWeights:
    """Per-task weights from the regularity of two-task accuracy sequences.

    Each task's raw weight is the negated mean SVDE of its sequences across
    all partners, so tasks with noisier (higher-entropy) accuracy curves
    weigh less in the ranking score.
    """
    table.require_complete()
    if table.num_points + 1 < embed_dim * delay + 1:
        raise ValueError(
            f"sequences of length {table.num_points + 1} are too short for "
            f"embed_dim={embed_dim}, delay={delay}"
        )
    raw = []
    for i in range(table.num_tasks):
        entropies = [
            svde(table.sequence(i, j), embed_dim, delay)
            for j in range(table.num_tasks)
            if j != i
        ]
        raw.append(-sum(entropies) / len(entropies))
    return TaskWeights(tuple(raw), normalize_weights(raw, scheme), scheme)


def uniform_weights(num_tasks: int) -> TaskWeights:
    """Equal weights; the fallback when sequences are too short to embed."""
    if num_tasks < 1:
        raise ValueError("need at least one task")
    return TaskWeights((0.0,) * num_tasks, (1.0 / num_tasks,) * num_tasks, "uniform")


def estimate_task_scores(layout: Layout, table: TwoTaskTable) -> tuple[float, ...]:
    """Per-task percent deltas predicted for ``layout``.

    Each task's estimate averages its measured deltas over the two-task
    models that branch at exactly the layout's pairwise branch depth.
    """
    if layout.num_tasks != table.num_tasks:
        raise ValueError(f"layout has {layout.num_tasks} tasks but table has {table.num_tasks}")
    if layout.num_points != table.num_points:
        raise ValueError(f"layout has {layout.num_points} points but table has {table.num_points}")
    if not is_valid(layout):
        raise ValueError("cannot estimate an invalid layout")
    table.require_complete()
    scores = []
    for i in range(layout.num_tasks):
        deltas = [
            table.get(i, j, branch_depth(layout, i, j))
            for j in range(layout.num_tasks)
            if j != i
        ]
        scores.append(sum(deltas) / len(deltas))
    return tuple(scores)


def ranking_score(scores, weights) -> float:
    """Dot product of normalized task weights with per-task scores."""
    norm = weights.normalized if isinstance(weights, TaskWeights) else tuple(float(w) for w in weights)
    values = tuple(float(s) for s in scores)
    if len(norm) != len(values):
        raise ValueError(f"{len(norm)} weights for {len(values)} scores")
    return float(np.dot(norm, values))


@dataclass(frozen=True)
class Metric:
    """One evaluation metric with its single-task baseline."""

    name: str
    higher_better: bool
    baseline: float

    def __post_init__(self) -> None:
        if self.baseline == 0:
            raise ValueError(f"metric {self.name!r} has a zero baseline")


@dataclass(frozen=True)
class MetricSpec:
    """Per-task metric names, directions, and single-task baselines."""

    task_names: tuple[str, ...]
    task_metrics: tuple[tuple[Metric, ...], ...]

    def __post_init__(self) -> None:
        if len(self.task_names) != len(self.task_metrics):
            raise ValueError("one metric list per task name required")
        for name, metrics in zip(self.task_names, self.task_metrics):
            if not metrics:
                raise ValueError(f"task {name!r} has no metrics")

    @property
    def num_tasks(self) -> int:
        return len(self.task_names)

    @classmethod
    def from_dict(cls, doc: dict) -> "MetricSpec":
        names = []
        per_task = []
        for task in doc["tasks"]:
            names.append(task["name"])
            metrics = []
            for m in task["metrics"]:
                direction = m["direction"]
                if direction not in ("higher", "lower"):
                    raise ValueError(f"metric {m['name']!r}: direction must be 'higher' or 'lower'")
                metrics.append(Metric(m["name"], direction == "higher", float(m["baseline"])))
            per_task.append(tuple(metrics))
        return cls(tuple(names), tuple(per_task))

    @classmethod
    def load(cls, path) -> "MetricSpec":
        return cls.from_dict(json.loads(Path(path).read_text()))


def relative_performance(measured, spec: MetricSpec, task: int) -> float:
    """Mean signed percent delta of one task's metrics against baselines.

    Higher-is-better metrics contribute (value - baseline) / baseline and
    lower-is-better ones the negation, averaged and scaled to percent.
    """
    if not 0 <= task < spec.num_tasks:
        raise ValueError(f"task index {task} outside [0, {spec.num_tasks})")
    metrics = spec.task_metrics[task]
    values = tuple(float(v) for v in measured)
    if len(values) != len(metrics):
        raise ValueError(
            f"task {spec.task_names[task]!r} needs {len(metrics)} metric values "
            f"({', '.join(m.name for m in metrics)}), got {len(values)}"
        )
    total = 0.0
    for value, metric in zip(values, metrics):
        sign = 1.0 if metric.higher_better else -1.0
        total += sign * (value - metric.baseline) / metric.baseline
    return 100.0 * total / len(metrics)


def overall_relative_performance(per_task_deltas) -> float:
    """Average percent delta across tasks."""
    values = [float(v) for v in per_task_deltas]
    if not values:
        raise ValueError("no per-task deltas")
    return sum(values) / len(values)
