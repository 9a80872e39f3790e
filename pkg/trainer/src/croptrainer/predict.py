from pathlib import Path

import numpy as np
import torch

from cropsight import ClassMap, GeoRaster, read_geotiff, render_mask, write_geotiff

from .data import load_entries
from .losses import confusion_counts  # noqa: F401  (re-exported for batch scoring)
from .models import build_model, logits_of
from .training import _resolve_classes, atomic_write, pick_device


def load_checkpoint(path: str | Path, device: str | None = None):
    """(model in eval mode, payload metadata) from a checkpoint file."""
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"no such checkpoint: {path}")
    payload = torch.load(path, map_location=pick_device(device))
    model = build_model(payload["preset"], payload["in_channels"], payload["num_classes"])
    model.load_state_dict(payload["state_dict"])
    model.eval()
    return model, payload


def predict(
    manifest: str | Path,
    checkpoint: str | Path,
    outdir: str | Path,
    role: str = "test",
    classes: ClassMap | str | Path | None = None,
    device: str | None = None,
) -> list[Path]:
    """Write one rendered prediction tile per manifest entry of the role.

    Output tiles keep the input tile's name and georeferencing and use the
    class-map colors, so they drop straight into the evaluation tooling that
    consumes ground-truth masks.
    """
    class_map = _resolve_classes(classes)
    entries = load_entries(manifest, role)
    dev = pick_device(device)
    model, payload = load_checkpoint(checkpoint, device)
    model.to(dev)

    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    with torch.no_grad():
        for entry in entries:
            tile = read_geotiff(entry.input)
            arr = tile.data.astype(np.float32)
            if tile.data.dtype == np.uint8:
                arr /= 255.0
            x = torch.from_numpy(arr).unsqueeze(0).to(dev)
            pred = logits_of(model(x)).argmax(dim=1)[0].cpu().numpy().astype(np.uint8)
            mask = GeoRaster(pred[np.newaxis], tile.transform, tile.crs, None)
            rendered = render_mask(mask, class_map)
            out_path = outdir / Path(entry.input).name
            atomic_write(out_path, lambda tmp: write_geotiff(rendered, tmp))
            written.append(out_path)
    return written
