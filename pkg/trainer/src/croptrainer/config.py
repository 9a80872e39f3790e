from dataclasses import dataclass

from .errors import TrainingError


@dataclass(frozen=True)
class TrainConfig:
    """Hyperparameters for a training run.

    Defaults are the full-scale recipe: 110 epochs of Adam at 1e-4 on a
    101-layer residual encoder, dice loss, per-pixel softmax over 3 classes,
    batch 16 for training and 1 for validation, 2 loader workers. The
    checkpoint follows the best validation micro IoU. preset="small" swaps
    in a compact UNet for desk-scale runs.
    """

    epochs: int = 110
    train_batch_size: int = 16
    val_batch_size: int = 1
    workers: int = 2
    learning_rate: float = 0.0001
    preset: str = "resnet101"
    augment: bool = True
    flip_prob: float = 0.5
    rotate: bool = True
    max_shift: int = 8

    def __post_init__(self) -> None:
        if self.epochs < 1:
            raise TrainingError(f"epochs must be positive, got {self.epochs}")
        if self.train_batch_size < 1 or self.val_batch_size < 1:
            raise TrainingError("batch sizes must be positive")
        if self.learning_rate <= 0:
            raise TrainingError(f"learning rate must be positive, got {self.learning_rate}")
        if self.workers < 0:
            raise TrainingError(f"workers must be >= 0, got {self.workers}")
        if not 0.0 <= self.flip_prob <= 1.0:
            raise TrainingError(f"flip probability must be in [0, 1], got {self.flip_prob}")
        if self.max_shift < 0:
            raise TrainingError(f"max shift must be >= 0, got {self.max_shift}")
