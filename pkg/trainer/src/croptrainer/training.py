import csv
import os
from dataclasses import dataclass, field
from pathlib import Path

import torch
from torch.utils.data import DataLoader

from cropsight import ClassMap, DEFAULT_CLASSES, load_classmap

from .config import TrainConfig
from .data import TileDataset, load_entries
from .errors import TrainingError
from .losses import confusion_counts, dice_loss, micro_iou_from_counts
from .models import build_model, logits_of

LOG_COLUMNS = ("epoch", "train_loss", "val_loss", "train_miou", "val_miou")


def atomic_write(path: Path, write_fn) -> None:
    """Write to a sibling temp file, then rename into place."""
    tmp = path.with_name(f"{path.name}.tmp{os.getpid()}")
    write_fn(tmp)
    os.replace(tmp, path)


def pick_device(device: str | None = None) -> torch.device:
    if device is not None:
        return torch.device(device)
    return torch.device("cuda" if torch.cuda.is_available() else "cpu")


@dataclass
class TrainResult:
    checkpoint_path: Path
    log_path: Path
    best_epoch: int
    best_val_miou: float
    log_rows: list = field(default_factory=list)


def _resolve_classes(classes) -> ClassMap:
    if classes is None:
        return DEFAULT_CLASSES
    if isinstance(classes, ClassMap):
        return classes
    return load_classmap(classes)


def _write_log(path: Path, rows: list) -> None:
    def emit(tmp: Path) -> None:
        with open(tmp, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(LOG_COLUMNS)
            for row in rows:
                writer.writerow([
                    row["epoch"], f"{row['train_loss']:.6f}", f"{row['val_loss']:.6f}",
                    f"{row['train_miou']:.6f}", f"{row['val_miou']:.6f}",
                ])

    atomic_write(path, emit)


def _run_epoch(model, loader, device, num_classes, optimizer=None):
    """One pass over a loader. Returns (mean loss, micro IoU)."""
    training = optimizer is not None
    model.train(training)
    total_loss, total_items = 0.0, 0
    counts = torch.zeros((num_classes, num_classes), dtype=torch.int64)
    with torch.set_grad_enabled(training):
        for x, y in loader:
            x, y = x.to(device), y.to(device)
            logits = logits_of(model(x))
            loss = dice_loss(logits, y)
            if training:
                optimizer.zero_grad()
                loss.backward()
                optimizer.step()
            total_loss += float(loss.detach()) * x.shape[0]
            total_items += x.shape[0]
            pred = logits.argmax(dim=1)
            counts += confusion_counts(pred.cpu(), y.cpu(), num_classes)
    return total_loss / max(total_items, 1), micro_iou_from_counts(counts)


def train(
    manifest: str | Path,
    outdir: str | Path,
    config: TrainConfig = TrainConfig(),
    classes: ClassMap | str | Path | None = None,
    seed: int = 0,
    device: str | None = None,
) -> TrainResult:
    """Fit a segmentation model on a manifest's train/validation splits.

    Writes checkpoint.pt (refreshed whenever validation micro IoU improves)
    and log.csv (one row per epoch) into outdir, both atomically, and returns
    the run summary.
    """
    class_map = _resolve_classes(classes)
    train_entries = load_entries(manifest, "train")
    val_entries = load_entries(manifest, "validation")
    if not train_entries:
        raise TrainingError(f"empty split: no train entries in {manifest}")
    if not val_entries:
        raise TrainingError(f"empty split: no validation entries in {manifest}")

    torch.manual_seed(seed)
    dev = pick_device(device)
    train_ds = TileDataset(
        train_entries, class_map, augment=config.augment,
        flip_prob=config.flip_prob, rotate=config.rotate, max_shift=config.max_shift,
    )
    val_ds = TileDataset(val_entries, class_map)
    # peek one sample for the channel count; also fails fast on unreadable tiles
    in_channels = int(train_ds[0][0].shape[0])
    num_classes = len(class_map)

    loader_seed = torch.Generator()
    loader_seed.manual_seed(seed)
    train_loader = DataLoader(
        train_ds, batch_size=config.train_batch_size, shuffle=True,
        num_workers=config.workers, generator=loader_seed,
    )
    val_loader = DataLoader(val_ds, batch_size=config.val_batch_size, num_workers=config.workers)

    model = build_model(config.preset, in_channels, num_classes).to(dev)
    optimizer = torch.optim.Adam(model.parameters(), lr=config.learning_rate)

    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    checkpoint_path = outdir / "checkpoint.pt"
    log_path = outdir / "log.csv"

    rows: list = []
    best_miou, best_epoch = float("-inf"), 0
    for epoch in range(1, config.epochs + 1):
        train_loss, train_miou = _run_epoch(model, train_loader, dev, num_classes, optimizer)
        val_loss, val_miou = _run_epoch(model, val_loader, dev, num_classes)
        rows.append({
            "epoch": epoch, "train_loss": train_loss, "val_loss": val_loss,
            "train_miou": train_miou, "val_miou": val_miou,
        })
        _write_log(log_path, rows)
        if val_miou > best_miou:
            best_miou, best_epoch = val_miou, epoch
            payload = {
                "state_dict": model.state_dict(),
                "preset": config.preset,
                "in_channels": in_channels,
                "num_classes": num_classes,
                "epoch": epoch,
                "val_miou": val_miou,
            }
            atomic_write(checkpoint_path, lambda tmp: torch.save(payload, tmp))

    return TrainResult(
        checkpoint_path=checkpoint_path, log_path=log_path,
        best_epoch=best_epoch, best_val_miou=best_miou, log_rows=rows,
    )
