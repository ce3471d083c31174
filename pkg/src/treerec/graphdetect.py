"""Branching point detection over serialized CNN computation graphs.

The backbone graph is split at tensors through which every input-to-output
path passes (minimum cut of size one).  The resulting single-entry,
single-exit candidate blocks are then merged so that every final
computation block anchors at least one parameterized operator; blocks made
only of unparameterized or normalization ops fold into a neighbour.
"""

from __future__ import annotations

import json
import re
from collections import defaultdict, deque
from dataclasses import dataclass
from pathlib import Path

DEFAULT_ANCHOR_KINDS = frozenset({
    "conv", "conv1d", "conv2d", "conv3d", "convtranspose1d", "convtranspose2d",
    "convtranspose3d", "linear", "matmul", "gemm", "fc", "embedding",
})

DEFAULT_MERGEABLE_KINDS = frozenset({
    "bn", "batchnorm", "batchnorm1d", "batchnorm2d", "batchnorm3d",
    "ln", "layernorm", "groupnorm", "instancenorm", "instancenorm2d",
    "relu", "relu6", "gelu", "silu", "swish", "sigmoid", "tanh", "elu",
    "leakyrelu", "hardswish", "hardsigmoid", "hardtanh", "softmax",
    "pool", "maxpool", "maxpool1d", "maxpool2d", "maxpool3d",
    "avgpool", "avgpool1d", "avgpool2d", "avgpool3d",
    "adaptiveavgpool1d", "adaptiveavgpool2d", "adaptivemaxpool2d", "globalavgpool",
    "add", "sub", "mul", "div", "cat", "concat", "identity", "dropout",
    "flatten", "reshape", "view", "permute", "transpose", "squeeze",
    "unsqueeze", "pad", "upsample", "interpolate", "clamp",
})


def _norm_kind(op: str) -> str:
    return re.sub(r"[^a-z0-9]", "", op.lower())


@dataclass(frozen=True)
class KindTable:
    """Classifies op kinds for the merge stage.

    A node anchors its block when its kind is a listed anchor, or when the
    kind is unknown and the node carries parameters.  Normalization layers
    count as mergeable even though they have parameters.
    """

    anchors: frozenset = DEFAULT_ANCHOR_KINDS
    mergeable: frozenset = DEFAULT_MERGEABLE_KINDS

    def is_anchor(self, node: "GraphNode") -> bool:
        kind = _norm_kind(node.op)
        if kind in self.anchors:
            return True
        if kind in self.mergeable:
            return False
        return node.params > 0


@dataclass(frozen=True)
class GraphNode:
    id: str
    op: str
    inputs: tuple[str, ...]
    outputs: tuple[str, ...]
    params: int
    flops: int


class ComputationGraph:
    """Validated operator DAG with one designated input and output tensor."""

    def __init__(self, name: str, inputs, outputs, nodes):
        if len(inputs) != 1 or len(outputs) != 1:
            raise ValueError(
                f"detection needs exactly one graph input and one output, "
                f"got {len(inputs)} inputs and {len(outputs)} outputs"
            )
        self.name = name
        self.input_tensor = inputs[0]
        self.output_tensor = outputs[0]
        self.nodes = tuple(nodes)
        ids = [n.id for n in self.nodes]
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate node ids")

        producer: dict[str, str] = {}
        for node in self.nodes:
            for t in node.outputs:
                if t in producer:
                    raise ValueError(f"tensor {t!r} produced by more than one node")
                if t == self.input_tensor:
                    raise ValueError(f"graph input {t!r} is also produced by node {node.id!r}")
                producer[t] = node.id
        consumers: dict[str, list[str]] = defaultdict(list)
        for node in self.nodes:
            for t in node.inputs:
                if t != self.input_tensor and t not in producer:
                    raise ValueError(
                        f"dangling tensor {t!r}: consumed by node {node.id!r} but never produced"
                    )
                consumers[t].append(node.id)
        if self.output_tensor not in producer:
            raise ValueError(f"graph output {self.output_tensor!r} is never produced")

        self.producer = producer
        self.consumers = {t: tuple(v) for t, v in consumers.items()}
        self.by_id = {n.id: n for n in self.nodes}
        self.topo_ids = self._toposort()
        self._check_on_path()

    def _toposort(self) -> tuple[str, ...]:
        indeg = {n.id: 0 for n in self.nodes}
        succ: dict[str, list[str]] = defaultdict(list)
        for node in self.nodes:
            for t in node.inputs:
                src = self.producer.get(t)
                if src is not None:
                    succ[src].append(node.id)
                    indeg[node.id] += 1
        ready = deque(nid for nid in (n.id for n in self.nodes) if indeg[nid] == 0)
        order = []
        while ready:
            nid = ready.popleft()
            order.append(nid)
            for nxt in succ[nid]:
                indeg[nxt] -= 1
                if indeg[nxt] == 0:
                    ready.append(nxt)
        if len(order) != len(self.nodes):
            raise ValueError("cycle detected in computation graph")
        return tuple(order)

    def _check_on_path(self) -> None:
        forward = self.nodes_downstream(self.input_tensor)
        backward: set[str] = set()
        stack = [self.output_tensor]
        seen_t = set()
        while stack:
            t = stack.pop()
            if t in seen_t:
                continue
            seen_t.add(t)
            src = self.producer.get(t)
            if src is not None and src not in backward:
                backward.add(src)
                stack.extend(self.by_id[src].inputs)
        for node in self.nodes:
            if node.id not in forward or node.id not in backward:
                raise ValueError(f"node {node.id!r} is not on any input-to-output path")

    def tensors_reachable(self, start: str, blocked: str | None = None) -> set[str]:
        """Tensor ids reachable from ``start`` without passing ``blocked``."""
        seen: set[str] = set()
        stack = [start]
        while stack:
            t = stack.pop()
            if t == blocked or t in seen:
                continue
            seen.add(t)
            for nid in self.consumers.get(t, ()):
                stack.extend(self.by_id[nid].outputs)
        return seen

    def nodes_downstream(self, tensor: str) -> set[str]:
        """Ids of nodes whose execution consumes ``tensor`` directly or
        transitively."""
        seen_t: set[str] = set()
        seen_n: set[str] = set()
        stack = [tensor]
        while stack:
            t = stack.pop()
            if t in seen_t:
                continue
            seen_t.add(t)
            for nid in self.consumers.get(t, ()):
                if nid not in seen_n:
                    seen_n.add(nid)
                    stack.extend(self.by_id[nid].outputs)
        return seen_n


@dataclass(frozen=True)
class CandidateBlock:
    """Single-entry single-exit group of operators between two cut tensors."""

    node_ids: tuple[str, ...]
    entry_tensor: str
    exit_tensor: str


@dataclass(frozen=True)
class ComputationBlock:
    """Merged block guaranteed to contain a parameterized operator."""

    label: str
    node_ids: tuple[str, ...]
    entry_tensor: str
    exit_tensor: str
    flops: int
    params: int


def parse_graph(source) -> ComputationGraph:
    """Load and validate a computation graph.

    ``source`` is a mapping, a path to a JSON document of the form
    ``{name, inputs, outputs, nodes: [{id, op, inputs, outputs, params,
    flops}]}``, or a path to the line-delimited variant (header object on
    the first line, one node object per line).
    """
    if isinstance(source, dict):
        doc = source
    else:
        text = Path(source).read_text()
        try:
            doc = json.loads(text)
        except json.JSONDecodeError:
            lines = [ln for ln in text.splitlines() if ln.strip()]
            if not lines:
                raise ValueError(f"empty graph file {source}") from None
            doc = json.loads(lines[0])
            if not isinstance(doc, dict):
                raise ValueError(f"graph file {source}: first line must be the header object")
            doc["nodes"] = [json.loads(ln) for ln in lines[1:]]
        if not isinstance(doc, dict):
            raise ValueError(f"graph file {source} must hold a JSON object")

    for key in ("inputs", "outputs", "nodes"):
        if key not in doc:
            raise ValueError(f"graph is missing {key!r}")
    nodes = []
    for raw in doc["nodes"]:
        for key in ("id", "op", "inputs", "outputs", "params", "flops"):
            if key not in raw:
                raise ValueError(f"node {raw.get('id', '?')!r} is missing {key!r}")
        try:
            params, flops = int(raw["params"]), int(raw["flops"])
        except (TypeError, ValueError):
            raise ValueError(f"node {raw['id']!r} has non-numeric costs") from None
        if params < 0 or flops < 0:
            raise ValueError(f"node {raw['id']!r} has negative costs")
        nodes.append(GraphNode(
            id=str(raw["id"]),
            op=str(raw["op"]),
            inputs=tuple(str(t) for t in raw["inputs"]),
            outputs=tuple(str(t) for t in raw["outputs"]),
            params=params,
            flops=flops,
        ))
    return ComputationGraph(str(doc.get("name", "graph")), list(doc["inputs"]), list(doc["outputs"]), nodes)


def find_cut_tensors(graph: ComputationGraph) -> list[str]:
    """Tensors through which every input-to-output path passes, in path
    order; the graph input and output are included as boundary cuts."""
    internal = [
        t for t in graph.producer
        if t != graph.output_tensor
        and graph.output_tensor not in graph.tensors_reachable(graph.input_tensor, blocked=t)
    ]
    # cut tensors form a chain: earlier cuts reach strictly more of them
    cut_set = set(internal) | {graph.output_tensor}
    reach_counts = {t: len(graph.tensors_reachable(t) & cut_set) for t in internal}
    internal.sort(key=lambda t: -reach_counts[t])
    return [graph.input_tensor] + internal + [graph.output_tensor]


def segment_candidate_blocks(graph: ComputationGraph, cuts: list[str]) -> list[CandidateBlock]:
    """Slice the graph at consecutive cut tensors.

    Every node lands in exactly one block: the slice between the last cut
    above it and the first cut below it.
    """
    downstream = [graph.nodes_downstream(c) for c in cuts]
    topo_index = {nid: k for k, nid in enumerate(graph.topo_ids)}
    blocks = []
    for k in range(len(cuts) - 1):
        members = downstream[k] - downstream[k + 1]
        ordered = tuple(sorted(members, key=topo_index.__getitem__))
        blocks.append(CandidateBlock(ordered, cuts[k], cuts[k + 1]))
    return blocks


def merge_unparameterized(blocks, graph: ComputationGraph,
                          kinds: KindTable | None = None) -> list[ComputationBlock]:
    """Merge candidate blocks that hold no parameterized anchor.

    Anchor-free blocks join the nearest preceding anchored block; a leading
    run of anchor-free blocks joins the first anchored block after it.
    """
    kinds = kinds or KindTable()
    anchored = [
        any(kinds.is_anchor(graph.by_id[nid]) for nid in block.node_ids)
        for block in blocks
    ]
    if not any(anchored):
        raise ValueError("graph has no parameterized operators; nothing to branch between")
    groups: list[list[CandidateBlock]] = []
    leading: list[CandidateBlock] = []
    for block, has_anchor in zip(blocks, anchored):
        if has_anchor:
            groups.append(leading + [block])
            leading = []
        elif groups:
            groups[-1].append(block)
        else:
            leading.append(block)
    return [_merge_group(idx, group, graph) for idx, group in enumerate(groups)]


def _merge_group(index: int, group: list[CandidateBlock], graph: ComputationGraph) -> ComputationBlock:
    ids = tuple(nid for block in group for nid in block.node_ids)
    return ComputationBlock(
        label=f"block{index}",
        node_ids=ids,
        entry_tensor=group[0].entry_tensor,
        exit_tensor=group[-1].exit_tensor,
        flops=sum(graph.by_id[nid].flops for nid in ids),
        params=sum(graph.by_id[nid].params for nid in ids),
    )


def detect_blocks(graph: ComputationGraph, kinds: KindTable | None = None) -> list[ComputationBlock]:
    """Full two-stage detection: segment at single-tensor cuts, then merge."""
    cuts = find_cut_tensors(graph)
    return merge_unparameterized(segment_candidate_blocks(graph, cuts), graph, kinds)


def balanced_ranges(flops, num_groups: int) -> list[tuple[int, int]]:
    """Split a flops sequence into consecutive groups minimizing the largest
    group total; among optima the earliest boundaries win.

    Returns inclusive (start, end) index ranges.
    """
    values = [float(f) for f in flops]
    n = len(values)
    if not 1 <= num_groups <= n:
        raise ValueError(f"cannot split {n} blocks into {num_groups} groups")
    prefix = [0.0]
    for v in values:
        prefix.append(prefix[-1] + v)

    def span(i, j):  # sum of values[i:j]
        return prefix[j] - prefix[i]

    # best[g][i]: minimal achievable max-group total for values[i:] in g groups
    best = [[0.0] * (n + 1) for _ in range(num_groups + 1)]
    for i in range(n + 1):
        best[1][i] = span(i, n)
    for g in range(2, num_groups + 1):
        for i in range(n - g, -1, -1):
            best[g][i] = min(
                max(span(i, j), best[g - 1][j])
                for j in range(i + 1, n - g + 2)
            )
    ranges = []
    i = 0
    for g in range(num_groups, 1, -1):
        for j in range(i + 1, n - g + 2):
            if max(span(i, j), best[g - 1][j]) == best[g][i]:
                ranges.append((i, j - 1))
                i = j
                break
    ranges.append((i, n - 1))
    return ranges


def coarsen_blocks(blocks, grouping=None, num_groups: int | None = None) -> list[ComputationBlock]:
    """Merge consecutive computation blocks into larger ones.

    Pass explicit ``grouping`` as inclusive (start, end) index ranges that
    cover all blocks consecutively, or ``num_groups`` for the automatic
    flops-balancing split.
    """
    if (grouping is None) == (num_groups is None):
        raise ValueError("pass exactly one of grouping or num_groups")
    if num_groups is not None:
        grouping = balanced_ranges([b.flops for b in blocks], num_groups)
    expected = 0
    for start, end in grouping:
        if start != expected or end < start:
            raise ValueError(f"grouping must cover all blocks consecutively; bad range ({start}, {end})")
        expected = end + 1
    if expected != len(blocks):
        raise ValueError(f"grouping covers {expected} of {len(blocks)} blocks")
    merged = []
    for idx, (start, end) in enumerate(grouping):
        group = blocks[start : end + 1]
        merged.append(ComputationBlock(
            label=f"block{idx}",
            node_ids=tuple(nid for b in group for nid in b.node_ids),
            entry_tensor=group[0].entry_tensor,
            exit_tensor=group[-1].exit_tensor,
            flops=sum(b.flops for b in group),
            params=sum(b.params for b in group),
        ))
    return merged
