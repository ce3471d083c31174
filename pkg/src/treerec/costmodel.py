"""Absolute and relative compute cost of a layout over detected blocks.

Each distinct task group at branching point i runs its own copy of block i,
so a layout's backbone cost is the per-point group count times the block
cost, plus one head per task.  Reductions are reported against independent
per-task models as signed percentages (negative means cheaper).
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from .layout import Layout


def _fmt(value: float) -> str:
    return str(int(value)) if float(value).is_integer() else repr(float(value))


@dataclass(frozen=True)
class CostProfile:
    """(flops, params) per backbone block, plus optional per-task heads.

    No head rows means zero-cost heads; a single head row applies to every
    task; otherwise one row per task is required.
    """

    blocks: tuple[tuple[float, float], ...]
    heads: tuple[tuple[float, float], ...] = ()

    def __post_init__(self) -> None:
        blocks = tuple((float(f), float(p)) for f, p in self.blocks)
        heads = tuple((float(f), float(p)) for f, p in self.heads)
        if not blocks:
            raise ValueError("a cost profile needs at least one block")
        for f, p in blocks + heads:
            if f < 0 or p < 0:
                raise ValueError("costs must be non-negative")
        object.__setattr__(self, "blocks", blocks)
        object.__setattr__(self, "heads", heads)

    @property
    def num_blocks(self) -> int:
        return len(self.blocks)

    @property
    def backbone_flops(self) -> float:
        return sum(f for f, _ in self.blocks)

    @property
    def backbone_params(self) -> float:
        return sum(p for _, p in self.blocks)

    def head_costs(self, num_tasks: int) -> tuple[tuple[float, float], ...]:
        if not self.heads:
            return ((0.0, 0.0),) * num_tasks
        if len(self.heads) == 1:
            return self.heads * num_tasks
        if len(self.heads) == num_tasks:
            return self.heads
        raise ValueError(f"{len(self.heads)} head rows cannot serve {num_tasks} tasks")

    @classmethod
    def equal_blocks(cls, num_blocks: int, flops: float = 1.0, params: float = 1.0) -> "CostProfile":
        return cls(((flops, params),) * num_blocks)

    def to_file(self, path) -> None:
        lines = [f"{_fmt(f)},{_fmt(p)}" for f, p in self.blocks]
        lines += [f"head,{_fmt(f)},{_fmt(p)}" for f, p in self.heads]
        Path(path).write_text("\n".join(lines) + "\n")

    @classmethod
    def from_file(cls, path) -> "CostProfile":
        """Parse ``flops,params`` block rows and ``head,flops,params`` rows;
        blank lines and '#' comments are skipped."""
        blocks = []
        heads = []
        for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
            text = line.strip()
            if not text or text.startswith("#"):
                continue
            fields = [f.strip() for f in text.split(",")]
            try:
                if fields[0] == "head":
                    if len(fields) != 3:
                        raise ValueError("head rows take 2 numbers")
                    heads.append((float(fields[1]), float(fields[2])))
                else:
                    if len(fields) != 2:
                        raise ValueError("block rows take 2 numbers")
                    blocks.append((float(fields[0]), float(fields[1])))
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: {exc}") from None
        return cls(tuple(blocks), tuple(heads))


def layout_cost(layout: Layout, profile: CostProfile) -> tuple[float, float]:
    """Total (flops, params): one block copy per task group per point, plus
    every task's head."""
    if layout.num_points != profile.num_blocks:
        raise ValueError(
            f"layout has {layout.num_points} branching points but the profile "
            f"has {profile.num_blocks} blocks"
        )
    heads = profile.head_costs(layout.num_tasks)
    flops = sum(len(level) * block[0] for level, block in zip(layout.levels, profile.blocks))
    params = sum(len(level) * block[1] for level, block in zip(layout.levels, profile.blocks))
    flops += sum(f for f, _ in heads)
    params += sum(p for _, p in heads)
    return (flops, params)


def independent_cost(profile: CostProfile, num_tasks: int) -> tuple[float, float]:
    """Cost of one full backbone plus head per task."""
    heads = profile.head_costs(num_tasks)
    return (
        num_tasks * profile.backbone_flops + sum(f for f, _ in heads),
        num_tasks * profile.backbone_params + sum(p for _, p in heads),
    )


def relative_reduction(cost: tuple[float, float], profile: CostProfile, num_tasks: int) -> tuple[float, float]:
    """Percent change of ``cost`` versus independent per-task models."""
    ind_flops, ind_params = independent_cost(profile, num_tasks)
    if ind_flops == 0 or ind_params == 0:
        raise ValueError("independent-model cost is zero; reductions undefined")
    return (
        100.0 * (cost[0] - ind_flops) / ind_flops,
        100.0 * (cost[1] - ind_params) / ind_params,
    )


def models_equivalent(cost: tuple[float, float], profile: CostProfile, num_tasks: int) -> float:
    """Layout backbone flops as a multiple of one backbone, heads excluded."""
    if profile.backbone_flops == 0:
        raise ValueError("backbone flops are zero; models-equivalent undefined")
    head_flops = sum(f for f, _ in profile.head_costs(num_tasks))
    return (cost[0] - head_flops) / profile.backbone_flops
