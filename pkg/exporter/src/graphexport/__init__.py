"""Export PyTorch CNN backbones to the neutral computation-graph format."""

from .models import REGISTRY, ToyConvNet, build_model
from .trace import ExportManifest, export_graph, export_model

__all__ = [
    "REGISTRY",
    "ExportManifest",
    "ToyConvNet",
    "build_model",
    "export_graph",
    "export_model",
]
