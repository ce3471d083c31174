"""Symbolic representation of tree-structured multi-task architectures.

A backbone with B branching points is shared by T tasks.  A layout records,
for every branching point, how the tasks are grouped at that depth: one set
partition of {0..T-1} per point, each partition refining the previous one so
that branches never merge back.  Layouts are immutable values and every
operation here is a pure function returning a new layout.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from itertools import combinations
from typing import Iterable

MAX_TASKS = 16
MAX_POINTS = 16

TaskSet = frozenset  # task indices in [0, num_tasks)


def _as_level(sets: Iterable[Iterable[int]]) -> tuple[TaskSet, ...]:
    """Coerce one level to frozensets sorted by smallest member."""
    return tuple(sorted((frozenset(s) for s in sets), key=lambda s: min(s) if s else -1))


@dataclass(frozen=True)
class Layout:
    """Per-branching-point task partitions of a tree-structured model.

    ``levels[i]`` lists the task groups sharing block ``i + 1``.  Groups
    within a level are kept sorted by smallest member, so equality and
    hashing are insensitive to the order sets were supplied in.
    Construction does not check validity; see :func:`is_valid`.
    """

    num_tasks: int
    levels: tuple[tuple[TaskSet, ...], ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "levels", tuple(_as_level(lv) for lv in self.levels))

    @property
    def num_points(self) -> int:
        return len(self.levels)

    def to_text(self) -> str:
        """Serialize as nested lists of sorted task-index lists."""
        nested = [[sorted(s) for s in level] for level in self.levels]
        return json.dumps(nested, separators=(",", ":"))

    @classmethod
    def from_text(cls, text: str, num_tasks: int | None = None) -> "Layout":
        nested = json.loads(text)
        levels = tuple(_as_level(level) for level in nested)
        if num_tasks is None:
            members = {t for level in levels for group in level for t in group}
            num_tasks = max(members) + 1 if members else 0
        return cls(num_tasks, levels)


@dataclass(frozen=True)
class CutSpec:
    """Split ``target`` into ``left``/``right`` from branching point
    ``level`` (1-based) through the last one."""

    level: int
    target: TaskSet
    left: TaskSet
    right: TaskSet

    def __post_init__(self) -> None:
        target = frozenset(self.target)
        left = frozenset(self.left)
        right = frozenset(self.right)
        if self.level < 1:
            raise ValueError("branching points are 1-based")
        if not left or not right:
            raise ValueError("both sides of a cut must be non-empty")
        if left & right:
            raise ValueError("the two sides of a cut must be disjoint")
        if left | right != target:
            raise ValueError("the two sides of a cut must cover the target set")
        if min(right) == min(target):
            left, right = right, left
        object.__setattr__(self, "target", target)
        object.__setattr__(self, "left", left)
        object.__setattr__(self, "right", right)


def initial_layout(num_tasks: int, num_points: int) -> Layout:
    """Fully shared layout: every task shares every block."""
    if not 1 <= num_tasks <= MAX_TASKS:
        raise ValueError(f"num_tasks must be in [1, {MAX_TASKS}], got {num_tasks}")
    if not 1 <= num_points <= MAX_POINTS:
        raise ValueError(f"num_points must be in [1, {MAX_POINTS}], got {num_points}")
    full = frozenset(range(num_tasks))
    return Layout(num_tasks, tuple((full,) for _ in range(num_points)))


def is_valid(layout: Layout) -> bool:
    """True iff every level partitions the task set and consecutive levels
    form a refinement chain (each group splits, never merges, over depth)."""
    if layout.num_tasks < 1 or layout.num_points < 1:
        return False
    full = frozenset(range(layout.num_tasks))
    for level in layout.levels:
        if any(not group for group in level):
            return False
        if sum(len(group) for group in level) != layout.num_tasks:
            return False
        if frozenset().union(*level) != full:
            return False
    for upper, lower in zip(layout.levels, layout.levels[1:]):
        for group in lower:
            if not any(group <= parent for parent in upper):
                return False
    return True


def _half_splits(target: TaskSet):
    """Unordered two-way splits of ``target``, each listed once with the
    smallest member on the left, in a deterministic order."""
    members = sorted(target)
    anchor, rest = members[0], members[1:]
    for size in range(len(rest)):
        for extra in combinations(rest, size):
            left = frozenset((anchor, *extra))
            yield left, target - left


def available_cuts(layout: Layout) -> list[CutSpec]:
    """Every cut applicable to ``layout``.

    A task set is available at point ``b`` when it appears unsplit at every
    point from ``b`` through the last one; each unordered split of each
    available set is listed exactly once.
    """
    cuts: list[CutSpec] = []
    for b in range(1, layout.num_points + 1):
        tail = layout.levels[b - 1 :]
        for target in layout.levels[b - 1]:
            if len(target) < 2:
                continue
            if not all(target in level for level in tail):
                continue
            cuts.extend(CutSpec(b, target, left, right) for left, right in _half_splits(target))
    return cuts


def apply_cut(layout: Layout, cut: CutSpec) -> Layout:
    """Split ``cut.target`` into its two sides at every point from
    ``cut.level`` onward; earlier points are untouched."""
    if not 1 <= cut.level <= layout.num_points:
        raise ValueError(f"cut level {cut.level} outside [1, {layout.num_points}]")
    tail = layout.levels[cut.level - 1 :]
    if not all(cut.target in level for level in tail):
        raise ValueError(
            f"task set {sorted(cut.target)} is not available at point {cut.level}: "
            "it must appear unsplit from there through the last point"
        )
    new_levels = list(layout.levels[: cut.level - 1])
    for level in tail:
        new_levels.append(tuple(g for g in level if g != cut.target) + (cut.left, cut.right))
    return Layout(layout.num_tasks, tuple(new_levels))


def branch_depth(layout: Layout, i: int, j: int) -> int:
    """Number of leading branching points at which tasks i and j share a set.

    0 means separate from the start, ``num_points`` means never separated.
    Symmetric in (i, j).
    """
    if i == j:
        raise ValueError("branch depth needs two distinct tasks")
    for t in (i, j):
        if not 0 <= t < layout.num_tasks:
            raise ValueError(f"task index {t} outside [0, {layout.num_tasks})")
    depth = 0
    for level in layout.levels:
        if not any(i in group and j in group for group in level):
            break
        depth += 1
    return depth


def canonicalize(layout: Layout) -> bytes:
    """Byte key identifying a layout up to within-level reordering of sets."""
    return layout.to_text().encode("ascii")
