import torch
import torch.nn.functional as F


def dice_loss(logits: torch.Tensor, target: torch.Tensor, smooth: float = 1.0) -> torch.Tensor:
    """Soft dice loss, averaged over classes.

    logits (N,C,H,W), target (N,H,W) int64. Per class c:
    dice_c = (2 * sum(p_c * t_c) + smooth) / (sum(p_c) + sum(t_c) + smooth)
    and the loss is 1 - mean_c dice_c. The smooth term keeps absent classes
    from poisoning the average.
    """
    num_classes = logits.shape[1]
    probs = F.softmax(logits, dim=1)
    onehot = F.one_hot(target, num_classes).permute(0, 3, 1, 2).to(probs.dtype)
    dims = (0, 2, 3)
    inter = (probs * onehot).sum(dim=dims)
    denom = probs.sum(dim=dims) + onehot.sum(dim=dims)
    dice = (2.0 * inter + smooth) / (denom + smooth)
    return 1.0 - dice.mean()


def confusion_counts(pred: torch.Tensor, target: torch.Tensor, num_classes: int) -> torch.Tensor:
    """(num_classes, num_classes) int64 counts, rows = target, cols = pred."""
    if pred.shape != target.shape:
        raise ValueError(f"mask shapes differ: {tuple(pred.shape)} vs {tuple(target.shape)}")
    idx = target.reshape(-1).long() * num_classes + pred.reshape(-1).long()
    return torch.bincount(idx, minlength=num_classes * num_classes).reshape(num_classes, num_classes)


def micro_iou_from_counts(counts: torch.Tensor) -> float:
    """Pooled IoU: sum TP / (sum TP + sum FP + sum FN); 1.0 when empty."""
    matches = int(counts.diagonal().sum())
    total = int(counts.sum())
    denom = 2 * total - matches  # sum FP = sum FN = total - matches
    return 1.0 if denom == 0 else matches / denom


def micro_iou(pred: torch.Tensor, target: torch.Tensor, num_classes: int) -> float:
    """Micro IoU of hard predictions against targets.

    Matches the evaluation package's pooled definition: with T total pixels
    and M matches, sum(FP) = sum(FN) = T - M, so the score is M / (2T - M).
    """
    return micro_iou_from_counts(confusion_counts(pred, target, num_classes))
