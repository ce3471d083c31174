"""Shared builders for graph and table fixtures."""

from __future__ import annotations

import numpy as np

from treerec import Layout, TwoTaskTable


def node(nid, op, inputs, outputs, params=0, flops=0):
    return {"id": nid, "op": op, "inputs": inputs, "outputs": outputs,
            "params": params, "flops": flops}


def chain_doc():
    """conv -> bn -> relu -> conv as a single path."""
    return {
        "name": "chain",
        "inputs": ["t0"],
        "outputs": ["t4"],
        "nodes": [
            node("conv1", "conv2d", ["t0"], ["t1"], params=100, flops=1000),
            node("bn1", "batchnorm2d", ["t1"], ["t2"], params=8, flops=40),
            node("relu1", "relu", ["t2"], ["t3"], params=0, flops=20),
            node("conv2", "conv2d", ["t3"], ["t4"], params=200, flops=2000),
        ],
    }


def residual_doc():
    """conv1 feeding a two-conv arm and a skip, joined by add, then conv4."""
    return {
        "name": "residual",
        "inputs": ["t0"],
        "outputs": ["t5"],
        "nodes": [
            node("conv1", "conv2d", ["t0"], ["t1"], params=10, flops=100),
            node("conv2", "conv2d", ["t1"], ["t2"], params=20, flops=200),
            node("conv3", "conv2d", ["t2"], ["t3"], params=30, flops=300),
            node("add", "add", ["t1", "t3"], ["t4"], params=0, flops=10),
            node("conv4", "conv2d", ["t4"], ["t5"], params=40, flops=400),
        ],
    }


def fan_doc():
    """Input fans into two arms that only reconverge at the sink merge."""
    return {
        "name": "fan",
        "inputs": ["t0"],
        "outputs": ["t9"],
        "nodes": [
            node("a1", "conv2d", ["t0"], ["t1"], params=1, flops=10),
            node("a2", "conv2d", ["t1"], ["t2"], params=1, flops=10),
            node("b1", "conv2d", ["t0"], ["t3"], params=1, flops=10),
            node("merge", "add", ["t2", "t3"], ["t9"], params=0, flops=1),
        ],
    }


_SP_OPS = [
    ("conv2d", (50, 400)),
    ("batchnorm2d", (4, 16)),
    ("relu", (0, 8)),
    ("maxpool2d", (0, 6)),
    ("linear", (30, 120)),
]


def random_series_parallel(rng: np.random.Generator, max_depth: int = 3):
    """Random single-input single-output series-parallel graph document.

    The first node is always a conv so the merge stage has an anchor.
    """
    nodes = []
    counter = [0]

    def tensor():
        counter[0] += 1
        return f"t{counter[0]}"

    def emit(op, params, flops, inputs):
        out = tensor()
        nodes.append(node(f"n{len(nodes)}", op, list(inputs), [out],
                          params=params, flops=flops))
        return out

    def random_op(entry):
        op, (params, flops) = _SP_OPS[rng.integers(len(_SP_OPS))]
        jitter = int(rng.integers(0, 5))
        return emit(op, params + (jitter if params else 0), flops + jitter, [entry])

    def build(entry, depth):
        if depth == 0:
            return random_op(entry)
        shape = rng.random()
        if shape < 0.4:
            return random_op(entry)
        if shape < 0.7:  # series
            return build(build(entry, depth - 1), depth - 1)
        # parallel, possibly with a bare skip arm
        arm_a = build(entry, depth - 1)
        arm_b = entry if rng.random() < 0.4 else build(entry, depth - 1)
        return emit("add", 0, 2, [arm_a, arm_b])

    first = emit("conv2d", 64, 512, ["t0"])
    out = build(first, max_depth)
    return {"name": "sp", "inputs": ["t0"], "outputs": [out], "nodes": nodes}


def make_table(num_tasks, num_points, fill):
    """Two-task table populated by ``fill(i, j, b) -> (delta_i, delta_j)``."""
    table = TwoTaskTable(num_tasks, num_points)
    for i in range(num_tasks):
        for j in range(i + 1, num_tasks):
            for b in range(num_points + 1):
                di, dj = fill(i, j, b)
                table.set_entry(i, j, b, di, dj)
    return table


def random_table(num_tasks, num_points, rng: np.random.Generator):
    return make_table(num_tasks, num_points,
                      lambda i, j, b: (rng.normal(0, 3), rng.normal(0, 3)))


def nested_branch_layout():
    """Three tasks over five points: {0,1} splits off {2} after block 2,
    then 0 and 1 separate after block 3."""
    return Layout.from_text("[[[0,1,2]],[[0,1,2]],[[0,1],[2]],[[0],[1],[2]],[[0],[1],[2]]]")
