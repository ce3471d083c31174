"""Symbolic tracing of PyTorch models into the neutral graph file format.

The model is traced into a static operator DAG with torch.fx, shapes are
propagated once for the requested input size, and every node is emitted with
its op kind, exact trainable parameter count, and flop estimate.

Flop conventions (only relative costs matter downstream):
  conv / linear        2 * multiply-accumulates, plus one op per bias output
  norm layers          2 * output elements
  activations, add     output elements
  pooling              input elements
  reshape-like ops     0
Modules called more than once (shared weights) report their parameters at
the first call site only, so node totals match the model's parameter count.
"""

from __future__ import annotations

import json
import math
import operator
from dataclasses import dataclass, field
from pathlib import Path

import torch
from torch import nn
from torch.fx import symbolic_trace
from torch.fx.passes.shape_prop import ShapeProp
from torch.fx.proxy import TraceError

from .models import build_model

MODULE_KINDS = {
    nn.Conv1d: "conv1d", nn.Conv2d: "conv2d", nn.Conv3d: "conv3d",
    nn.ConvTranspose2d: "convtranspose2d",
    nn.Linear: "linear",
    nn.BatchNorm1d: "batchnorm1d", nn.BatchNorm2d: "batchnorm2d", nn.BatchNorm3d: "batchnorm3d",
    nn.GroupNorm: "groupnorm", nn.LayerNorm: "layernorm",
    nn.ReLU: "relu", nn.ReLU6: "relu6", nn.GELU: "gelu", nn.SiLU: "silu",
    nn.Sigmoid: "sigmoid", nn.Tanh: "tanh", nn.LeakyReLU: "leakyrelu",
    nn.Hardswish: "hardswish", nn.Hardsigmoid: "hardsigmoid", nn.Hardtanh: "hardtanh",
    nn.ELU: "elu", nn.Softmax: "softmax",
    nn.MaxPool1d: "maxpool1d", nn.MaxPool2d: "maxpool2d", nn.MaxPool3d: "maxpool3d",
    nn.AvgPool1d: "avgpool1d", nn.AvgPool2d: "avgpool2d", nn.AvgPool3d: "avgpool3d",
    nn.AdaptiveAvgPool1d: "adaptiveavgpool1d", nn.AdaptiveAvgPool2d: "adaptiveavgpool2d",
    nn.AdaptiveMaxPool2d: "adaptivemaxpool2d",
    nn.Dropout: "dropout", nn.Dropout2d: "dropout", nn.Identity: "identity",
    nn.Flatten: "flatten",
}

FUNCTION_KINDS = {
    operator.add: "add", operator.iadd: "add", torch.add: "add",
    operator.mul: "mul", operator.imul: "mul", torch.mul: "mul",
    operator.sub: "sub", torch.sub: "sub",
    torch.flatten: "flatten", torch.cat: "concat", torch.concat: "concat",
    torch.relu: "relu",
    nn.functional.relu: "relu", nn.functional.relu6: "relu6",
    nn.functional.hardtanh: "hardtanh", nn.functional.hardswish: "hardswish",
    nn.functional.hardsigmoid: "hardsigmoid", nn.functional.gelu: "gelu",
    nn.functional.silu: "silu", nn.functional.sigmoid: "sigmoid",
    nn.functional.adaptive_avg_pool2d: "adaptiveavgpool2d",
    nn.functional.avg_pool2d: "avgpool2d", nn.functional.max_pool2d: "maxpool2d",
    nn.functional.dropout: "dropout",
}

METHOD_KINDS = {
    "add": "add", "add_": "add", "mul": "mul", "mul_": "mul",
    "view": "view", "reshape": "reshape", "flatten": "flatten",
    "permute": "permute", "transpose": "transpose", "contiguous": "identity",
    "squeeze": "squeeze", "unsqueeze": "unsqueeze", "relu": "relu", "sigmoid": "sigmoid",
}

NORM_KINDS = {"batchnorm1d", "batchnorm2d", "batchnorm3d", "groupnorm", "layernorm"}
ELEMENTWISE_KINDS = {
    "relu", "relu6", "gelu", "silu", "sigmoid", "tanh", "leakyrelu", "hardswish",
    "hardsigmoid", "hardtanh", "elu", "softmax", "add", "mul", "sub",
}
POOL_KINDS = {
    "maxpool1d", "maxpool2d", "maxpool3d", "avgpool1d", "avgpool2d", "avgpool3d",
    "adaptiveavgpool1d", "adaptiveavgpool2d", "adaptivemaxpool2d",
}
FREE_KINDS = {
    "flatten", "reshape", "view", "permute", "transpose", "squeeze", "unsqueeze",
    "identity", "dropout", "concat",
}


@dataclass(frozen=True)
class ExportManifest:
    """What to export: model name, trace input size, destination."""

    model: str
    input_size: tuple[int, int] = (224, 224)
    out_path: str | None = None
    channels: int = 3
    kind_overrides: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        height, width = self.input_size
        if height < 1 or width < 1 or self.channels < 1:
            raise ValueError("input size and channel count must be positive")


def _shape(node) -> tuple[int, ...]:
    meta = node.meta.get("tensor_meta")
    if meta is None or not hasattr(meta, "shape"):
        raise ValueError(f"node {node.name!r} produced no tensor; cannot export")
    return tuple(meta.shape)


def _numel(shape) -> int:
    return int(math.prod(shape))


def _conv_flops(module, out_shape) -> int:
    kernel = math.prod(module.kernel_size)
    macs = _numel(out_shape) * (module.in_channels // module.groups) * kernel
    return 2 * macs + (_numel(out_shape) if module.bias is not None else 0)


def _linear_flops(module, out_shape) -> int:
    rows = _numel(out_shape) // module.out_features
    macs = rows * module.in_features * module.out_features
    return 2 * macs + (_numel(out_shape) if module.bias is not None else 0)


def _node_flops(kind, module, in_shapes, out_shape) -> int:
    if kind.startswith("conv"):
        return _conv_flops(module, out_shape)
    if kind == "linear":
        return _linear_flops(module, out_shape)
    if kind in NORM_KINDS:
        return 2 * _numel(out_shape)
    if kind in POOL_KINDS:
        return _numel(in_shapes[0]) if in_shapes else _numel(out_shape)
    if kind in FREE_KINDS:
        return 0
    return _numel(out_shape)  # elementwise and overridden kinds


def export_model(model: nn.Module, input_size=(224, 224), channels: int = 3,
                 name: str = "model", kind_overrides: dict | None = None) -> dict:
    """Trace ``model`` and return the graph document.

    Raises ValueError for models with data-dependent control flow and for
    operators the exporter has no kind mapping for (all offenders listed).
    """
    overrides = kind_overrides or {}
    model = model.eval()
    try:
        traced = symbolic_trace(model)
    except (TraceError, torch.fx.proxy.TraceError) as exc:
        raise ValueError(f"dynamic control flow in {name!r}: {exc}") from exc

    height, width = input_size
    example = torch.randn(1, channels, int(height), int(width))
    ShapeProp(traced).propagate(example)

    nodes = []
    unsupported: list[str] = []
    counted_targets: set[str] = set()
    input_tensor = None
    output_tensor = None

    for node in traced.graph.nodes:
        if node.op == "placeholder":
            if input_tensor is not None:
                raise ValueError(f"model {name!r} takes more than one input")
            input_tensor = node.name
            continue
        if node.op == "output":
            sources = node.all_input_nodes
            if len(sources) != 1:
                raise ValueError(f"model {name!r} returns {len(sources)} tensors, need exactly 1")
            output_tensor = sources[0].name
            continue

        module = None
        symbol = None
        if node.op == "call_module":
            module = traced.get_submodule(node.target)
            symbol = type(module).__name__
            kind = overrides.get(symbol, MODULE_KINDS.get(type(module)))
        elif node.op == "call_function":
            symbol = getattr(node.target, "__name__", str(node.target))
            kind = overrides.get(symbol, FUNCTION_KINDS.get(node.target))
        elif node.op == "call_method":
            symbol = str(node.target)
            kind = overrides.get(symbol, METHOD_KINDS.get(node.target))
        else:  # get_attr and anything else fx may emit
            symbol = f"{node.op}:{node.target}"
            kind = overrides.get(symbol)
        if kind is None:
            unsupported.append(symbol)
            continue

        params = 0
        if module is not None and node.target not in counted_targets:
            counted_targets.add(node.target)
            params = sum(p.numel() for p in module.parameters())
        in_shapes = [_shape(src) for src in node.all_input_nodes]
        out_shape = _shape(node)
        nodes.append({
            "id": node.name,
            "op": kind,
            "inputs": [src.name for src in node.all_input_nodes],
            "outputs": [node.name],
            "params": int(params),
            "flops": int(_node_flops(kind, module, in_shapes, out_shape)),
        })

    if unsupported:
        listed = ", ".join(sorted(set(unsupported)))
        raise ValueError(f"unsupported op kinds in {name!r}: {listed}")
    if input_tensor is None or output_tensor is None:
        raise ValueError(f"model {name!r} traced without an input or output")
    return {"name": name, "inputs": [input_tensor], "outputs": [output_tensor], "nodes": nodes}


def export_graph(manifest: ExportManifest) -> dict:
    """Resolve the manifest's model, trace it, and optionally write the file."""
    model = build_model(manifest.model)
    doc = export_model(model, manifest.input_size, manifest.channels,
                       name=manifest.model, kind_overrides=manifest.kind_overrides)
    if manifest.out_path:
        Path(manifest.out_path).write_text(json.dumps(doc, indent=1) + "\n")
    return doc
