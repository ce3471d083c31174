"""Named backbone models the exporter can resolve."""

from __future__ import annotations

from torch import nn


class ToyConvNet(nn.Module):
    """Two-conv net whose parameter counts are easy to verify by hand."""

    def __init__(self, channels: int = 3, width: int = 8):
        super().__init__()
        self.conv1 = nn.Conv2d(channels, width, kernel_size=3, padding=1)
        self.bn1 = nn.BatchNorm2d(width)
        self.relu = nn.ReLU()
        self.conv2 = nn.Conv2d(width, 2 * width, kernel_size=3, padding=1)

    def forward(self, x):
        x = self.conv1(x)
        x = self.bn1(x)
        x = self.relu(x)
        return self.conv2(x)


def _toy():
    return ToyConvNet()


def _resnet18():
    from torchvision.models import resnet18
    return resnet18(weights=None)


def _resnet34():
    from torchvision.models import resnet34
    return resnet34(weights=None)


def _mobilenet_v2():
    from torchvision.models import mobilenet_v2
    return mobilenet_v2(weights=None)


REGISTRY = {
    "toy": _toy,
    "resnet18": _resnet18,
    "resnet34": _resnet34,
    "mobilenet_v2": _mobilenet_v2,
}


def build_model(name: str) -> nn.Module:
    try:
        factory = REGISTRY[name]
    except KeyError:
        known = ", ".join(sorted(REGISTRY))
        raise ValueError(f"unknown model {name!r}; known models: {known}") from None
    return factory()
