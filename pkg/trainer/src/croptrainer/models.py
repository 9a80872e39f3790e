import torch
from torch import nn

from .errors import TrainingError

PRESETS = ("small", "resnet101")


def _block(cin: int, cout: int) -> nn.Sequential:
    return nn.Sequential(
        nn.Conv2d(cin, cout, 3, padding=1, bias=False),
        nn.BatchNorm2d(cout),
        nn.ReLU(inplace=True),
        nn.Conv2d(cout, cout, 3, padding=1, bias=False),
        nn.BatchNorm2d(cout),
        nn.ReLU(inplace=True),
    )


class SmallUNet(nn.Module):
    """Two-scale UNet, ~100k parameters: enough context for tile segmentation
    while staying trainable on a laptop CPU in minutes."""

    def __init__(self, in_channels: int = 3, num_classes: int = 3):
        super().__init__()
        self.enc1 = _block(in_channels, 16)
        self.enc2 = _block(16, 32)
        self.enc3 = _block(32, 64)
        self.pool = nn.MaxPool2d(2)
        self.up2 = nn.ConvTranspose2d(64, 32, 2, stride=2)
        self.dec2 = _block(64, 32)
        self.up1 = nn.ConvTranspose2d(32, 16, 2, stride=2)
        self.dec1 = _block(32, 16)
        self.head = nn.Conv2d(16, num_classes, 1)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        e1 = self.enc1(x)
        e2 = self.enc2(self.pool(e1))
        e3 = self.enc3(self.pool(e2))
        d2 = self.dec2(torch.cat([self.up2(e3), e2], dim=1))
        d1 = self.dec1(torch.cat([self.up1(d2), e1], dim=1))
        return self.head(d1)


def build_model(preset: str, in_channels: int = 3, num_classes: int = 3) -> nn.Module:
    """Instantiate a segmentation network with randomly initialized weights.

    "small" is the desk-scale UNet above. "resnet101" is the full recipe:
    DeepLabV3 on a 101-layer residual encoder, which needs 3-channel input.
    """
    if preset == "small":
        return SmallUNet(in_channels, num_classes)
    if preset == "resnet101":
        if in_channels != 3:
            raise TrainingError(f"resnet101 preset takes 3-channel input, got {in_channels}")
        from torchvision.models.segmentation import deeplabv3_resnet101

        return deeplabv3_resnet101(weights=None, weights_backbone=None, num_classes=num_classes)
    raise TrainingError(f"unknown model preset {preset!r}; choose from {PRESETS}")


def logits_of(output) -> torch.Tensor:
    """torchvision segmentation heads return {'out': logits}; unify on the tensor."""
    return output["out"] if isinstance(output, dict) else output
