"""Complete enumeration of the layout design space, with independent oracles.

The enumerator closes the fully shared layout under all available cuts,
breadth-first, deduplicating by canonical key.  Two independent routes
validate it: explicit enumeration of refinement chains over set partitions,
and a closed-form count of such chains.
"""

from __future__ import annotations

from collections import deque
from math import comb

from .layout import Layout, apply_cut, available_cuts, canonicalize, initial_layout

DEFAULT_SPACE_CAP = 10_000_000
CHAIN_ORACLE_MAX_TASKS = 8
COUNT_ORACLE_MAX_TASKS = 12


def enumerate_layouts(num_tasks: int, num_points: int, cap: int = DEFAULT_SPACE_CAP) -> list[Layout]:
    """All distinct valid layouts, breadth-first from the fully shared one.

    Index 0 is always the fully shared layout and the order is deterministic
    (children visited in canonical cut order).  Parameter combinations whose
    chain-counted space exceeds ``cap`` are rejected before any enumeration
    work starts.
    """
    root = initial_layout(num_tasks, num_points)  # validates the size bounds
    size = _chain_count(num_tasks, num_points)
    if size > cap:
        raise ValueError(
            f"design space for {num_tasks} tasks over {num_points} points holds "
            f"{size} layouts, above the cap of {cap}"
        )
    seen = {canonicalize(root)}
    ordered = [root]
    queue = deque([root])
    while queue:
        current = queue.popleft()
        for cut in available_cuts(current):
            child = apply_cut(current, cut)
            key = canonicalize(child)
            if key not in seen:
                seen.add(key)
                ordered.append(child)
                queue.append(child)
    return ordered


def count_layouts_oracle(num_tasks: int, num_points: int) -> int:
    """Count length-B refinement chains of set partitions of the task set.

    Chains (P_1, ..., P_B) with each P_{k+1} refining P_k (reflexively) are
    in bijection with valid layouts, so this is the design-space size,
    computed without ever touching the cut operator.
    """
    if not 1 <= num_tasks <= COUNT_ORACLE_MAX_TASKS:
        raise ValueError(f"chain counting supports 1..{COUNT_ORACLE_MAX_TASKS} tasks, got {num_tasks}")
    if num_points < 1:
        raise ValueError("need at least one branching point")
    return _chain_count(num_tasks, num_points)


def _chain_count(num_tasks: int, num_points: int) -> int:
    """h_{B+1}(T) where h_1(n) = 1 and
    h_{b+1}(n) = sum_k C(n-1, k-1) * h_b(k) * h_{b+1}(n-k).

    h_b(n) counts length-b chains over partitions of an n-set whose first
    element is the single-block partition.  A chain starting anywhere
    factorizes into independent chains inside each first-level block; the
    recurrence sums over the size k of the block containing element 0.
    """
    h = [1] * (num_tasks + 1)
    for _ in range(num_points):
        nxt = [1] + [0] * num_tasks
        for n in range(1, num_tasks + 1):
            nxt[n] = sum(comb(n - 1, k - 1) * h[k] * nxt[n - k] for k in range(1, n + 1))
        h = nxt
    return h[num_tasks]


def two_task_space_size(num_tasks: int, num_points: int) -> int:
    """Number of two-task models covering every pair at every shared depth:
    C(T, 2) * (B + 1)."""
    if num_tasks < 2:
        raise ValueError("two-task models need at least two tasks")
    if num_points < 0:
        raise ValueError("branching point count must be non-negative")
    return comb(num_tasks, 2) * (num_points + 1)


def set_partitions(num_elements: int) -> list[tuple[frozenset, ...]]:
    """All set partitions of range(num_elements), via restricted growth
    strings; each partition's blocks sorted by smallest member."""
    out: list[tuple[frozenset, ...]] = []
    labels = [0] * num_elements

    def grow(pos: int, top: int) -> None:
        if pos == num_elements:
            blocks: dict[int, list[int]] = {}
            for elem, lab in enumerate(labels):
                blocks.setdefault(lab, []).append(elem)
            out.append(tuple(sorted((frozenset(b) for b in blocks.values()), key=min)))
            return
        for lab in range(top + 2):
            labels[pos] = lab
            grow(pos + 1, max(top, lab))

    grow(0, -1)
    return out


def refines(finer, coarser) -> bool:
    """True when every block of ``finer`` sits inside a block of ``coarser``."""
    return all(any(fb <= cb for cb in coarser) for fb in finer)


def oracle_chain_keys(num_tasks: int, num_points: int) -> frozenset[bytes]:
    """Canonical keys of the whole design space, built independently of the
    cut operator by materializing every refinement chain explicitly."""
    if not 1 <= num_tasks <= CHAIN_ORACLE_MAX_TASKS:
        raise ValueError(f"chain materialization supports 1..{CHAIN_ORACLE_MAX_TASKS} tasks, got {num_tasks}")
    if num_points < 1:
        raise ValueError("need at least one branching point")
    parts = set_partitions(num_tasks)
    finer_than = {p: [q for q in parts if refines(q, p)] for p in parts}
    keys: list[bytes] = []

    def extend(chain: list) -> None:
        if len(chain) == num_points:
            keys.append(canonicalize(Layout(num_tasks, tuple(chain))))
            return
        for q in finer_than[chain[-1]]:
            chain.append(q)
            extend(chain)
            chain.pop()

    for p in parts:
        extend([p])
    return frozenset(keys)
