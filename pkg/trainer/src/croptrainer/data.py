from pathlib import Path

import numpy as np
import torch
from torch.utils.data import Dataset

from cropsight import ClassMap, DEFAULT_CLASSES, as_class_mask, read_geotiff, read_manifest

from .errors import TrainingError


def load_entries(manifest: str | Path, role: str | None = None):
    """Manifest rows, optionally filtered to one role."""
    entries = read_manifest(manifest)
    if role is not None:
        entries = [e for e in entries if e.role == role]
    return entries


def _shift(plane: torch.Tensor, dy: int, dx: int) -> torch.Tensor:
    """Translate (..., H, W) by (dy, dx), filling vacated pixels with zeros."""
    out = torch.zeros_like(plane)
    h, w = plane.shape[-2:]
    ys, yd = (dy, 0) if dy < 0 else (0, dy)
    xs, xd = (dx, 0) if dx < 0 else (0, dx)
    hh, ww = h - abs(dy), w - abs(dx)
    if hh > 0 and ww > 0:
        out[..., yd : yd + hh, xd : xd + ww] = plane[..., -ys : -ys + hh, -xs : -xs + ww]
    return out


class TileDataset(Dataset):
    """Paired (input tile, class-index mask) samples from a manifest.

    Inputs become float32 (C,H,W); 8-bit tiles are scaled to [0,1]. Masks can
    be stored either as single-band indices or rendered in class colors; both
    parse to int64 (H,W). Augmentation (train only) is the standard trio:
    coin-flip horizontal/vertical mirrors, uniform 90-degree rotations and a
    small zero-filled translation, applied identically to tile and mask.
    """

    def __init__(
        self,
        entries,
        classes: ClassMap = DEFAULT_CLASSES,
        augment: bool = False,
        flip_prob: float = 0.5,
        rotate: bool = True,
        max_shift: int = 0,
    ):
        if not entries:
            raise TrainingError("dataset has no entries")
        self.entries = list(entries)
        self.classes = classes
        self.augment = augment
        self.flip_prob = flip_prob
        self.rotate = rotate
        self.max_shift = max_shift

    def __len__(self) -> int:
        return len(self.entries)

    def __getitem__(self, index: int):
        entry = self.entries[index]
        tile = read_geotiff(entry.input)
        mask, _ = as_class_mask(read_geotiff(entry.mask), self.classes)
        if tile.data.shape[1:] != mask.data.shape[1:]:
            raise TrainingError(
                f"tile/mask shape mismatch for {Path(entry.input).name}: "
                f"{tile.data.shape[1:]} vs {mask.data.shape[1:]}"
            )
        arr = tile.data.astype(np.float32)
        if tile.data.dtype == np.uint8:
            arr /= 255.0
        x = torch.from_numpy(arr)
        y = torch.from_numpy(mask.data[0].astype(np.int64))
        if self.augment:
            x, y = self._augment(x, y)
        return x, y

    def _augment(self, x: torch.Tensor, y: torch.Tensor):
        if float(torch.rand(())) < self.flip_prob:
            x, y = torch.flip(x, (-1,)), torch.flip(y, (-1,))
        if float(torch.rand(())) < self.flip_prob:
            x, y = torch.flip(x, (-2,)), torch.flip(y, (-2,))
        if self.rotate:
            k = int(torch.randint(0, 4, ()))
            if k:
                x, y = torch.rot90(x, k, (-2, -1)), torch.rot90(y, k, (-2, -1))
        if self.max_shift > 0:
            dy = int(torch.randint(-self.max_shift, self.max_shift + 1, ()))
            dx = int(torch.randint(-self.max_shift, self.max_shift + 1, ()))
            if dy or dx:
                x, y = _shift(x, dy, dx), _shift(y, dy, dx)  # vacated mask pixels = background
        return x.contiguous(), y.contiguous()
