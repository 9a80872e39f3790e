"""Segmentation training on cropsight tile manifests.

train() fits a model on the manifest's train/validation splits with dice
loss, logging per-epoch losses and micro IoU and checkpointing on the best
validation micro IoU. predict() turns a checkpoint into rendered prediction
tiles that the evaluation tooling consumes unchanged.
"""

from .config import TrainConfig
from .data import TileDataset, load_entries
from .errors import TrainingError
from .losses import confusion_counts, dice_loss, micro_iou, micro_iou_from_counts
from .models import PRESETS, SmallUNet, build_model, logits_of
from .predict import load_checkpoint, predict
from .training import LOG_COLUMNS, TrainResult, atomic_write, pick_device, train

__version__ = "0.1.0"

__all__ = [
    "LOG_COLUMNS",
    "PRESETS",
    "SmallUNet",
    "TileDataset",
    "TrainConfig",
    "TrainResult",
    "TrainingError",
    "atomic_write",
    "build_model",
    "confusion_counts",
    "dice_loss",
    "load_checkpoint",
    "load_entries",
    "logits_of",
    "micro_iou",
    "micro_iou_from_counts",
    "pick_device",
    "predict",
    "train",
]
