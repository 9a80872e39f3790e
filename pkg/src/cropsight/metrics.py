"""Segmentation metric suite: per-class IoU and F1, mean IoU, micro IoU, dice.

Counts live in a mergeable per-class confusion matrix so tiles can be
accumulated independently and summed; metrics from summed tile matrices are
identical to metrics computed on the merged rasters.

Conventions: background is a class like any other and participates in mean
and micro IoU. A class absent from both ground truth and prediction scores
1.0 (nothing to get wrong); absent from ground truth but predicted scores 0.
"""

from __future__ import annotations

import csv
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ClassMapError, ManifestError, RasterMismatchError
from .groundtruth import ClassMap, as_class_mask
from .raster import GeoRaster

REPORT_COLUMNS = ("group", "input_type", "class", "iou", "f1", "mean_iou", "micro_iou")


class ConfusionMatrix:
    """Pixel counts in a (gt class, predicted class) matrix."""

    def __init__(self, num_classes: int, counts: np.ndarray | None = None):
        if num_classes < 1:
            raise ValueError(f"need at least one class, got {num_classes}")
        self.num_classes = num_classes
        if counts is None:
            counts = np.zeros((num_classes, num_classes), dtype=np.int64)
        self.counts = np.asarray(counts, dtype=np.int64)
        if self.counts.shape != (num_classes, num_classes):
            raise ValueError(f"counts must be {num_classes}x{num_classes}, got {self.counts.shape}")

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def tp(self, c: int) -> int:
        return int(self.counts[c, c])

    def fp(self, c: int) -> int:
        return int(self.counts[:, c].sum() - self.counts[c, c])

    def fn(self, c: int) -> int:
        return int(self.counts[c, :].sum() - self.counts[c, c])

    def tn(self, c: int) -> int:
        return self.total - self.tp(c) - self.fp(c) - self.fn(c)

    def __add__(self, other: "ConfusionMatrix") -> "ConfusionMatrix":
        if other.num_classes != self.num_classes:
            raise ValueError("cannot merge confusion matrices with different class counts")
        return ConfusionMatrix(self.num_classes, self.counts + other.counts)

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, ConfusionMatrix)
            and other.num_classes == self.num_classes
            and np.array_equal(other.counts, self.counts)
        )

    def __repr__(self) -> str:
        return f"ConfusionMatrix({self.num_classes} classes, {self.total} pixels)"


def _mask_values(mask) -> np.ndarray:
    if isinstance(mask, GeoRaster):
        return mask.data[0] if mask.data.ndim == 3 else mask.data
    return np.asarray(mask)


def accumulate(gt, pred, into: ConfusionMatrix | None = None, num_classes: int | None = None) -> ConfusionMatrix:
    """Add one gt/pred mask pair into a confusion matrix.

    Accepts GeoRaster class masks or plain integer arrays. Accumulation is
    associative and commutative: summing per-tile matrices equals the matrix
    of the concatenated masks.
    """
    g = _mask_values(gt)
    p = _mask_values(pred)
    if g.shape != p.shape:
        raise RasterMismatchError(f"mask shapes differ: {g.shape} vs {p.shape}")
    if into is None:
        if num_classes is None:
            raise ValueError("pass num_classes when starting a fresh confusion matrix")
        into = ConfusionMatrix(num_classes)
    k = into.num_classes
    g = g.astype(np.int64).ravel()
    p = p.astype(np.int64).ravel()
    if g.size and (int(g.max()) >= k or int(p.max()) >= k):
        raise ClassMapError(f"mask value out of range for {k}-class confusion matrix")
    into.counts += np.bincount(g * k + p, minlength=k * k).reshape(k, k)
    return into


def class_iou(cm: ConfusionMatrix, c: int) -> float:
    """TP / (TP + FP + FN); 1.0 when the class is absent from both masks."""
    tp, fp, fn = cm.tp(c), cm.fp(c), cm.fn(c)
    denom = tp + fp + fn
    if denom == 0:
        return 1.0
    return tp / denom


def mean_iou(cm: ConfusionMatrix) -> float:
    """Unweighted mean of per-class IoU over all classes, background included."""
    ious = [class_iou(cm, c) for c in range(cm.num_classes)]
    return sum(ious) / len(ious)


def micro_iou(cm: ConfusionMatrix) -> float:
    """Sum(TP) / (Sum(TP) + Sum(FP) + Sum(FN)) over all classes."""
    tps = sum(cm.tp(c) for c in range(cm.num_classes))
    fps = sum(cm.fp(c) for c in range(cm.num_classes))
    fns = sum(cm.fn(c) for c in range(cm.num_classes))
    denom = tps + fps + fns
    if denom == 0:
        return 1.0
    return tps / denom


def class_f1(cm: ConfusionMatrix, c: int) -> float:
    """2*TP / (2*TP + FP + FN); equals 2*iou/(1+iou) exactly."""
    tp, fp, fn = cm.tp(c), cm.fp(c), cm.fn(c)
    denom = 2 * tp + fp + fn
    if denom == 0:
        return 1.0
    return 2 * tp / denom


def dice_coefficient(cm: ConfusionMatrix) -> float:
    """Micro-averaged F1 over all classes."""
    tps = sum(cm.tp(c) for c in range(cm.num_classes))
    fps = sum(cm.fp(c) for c in range(cm.num_classes))
    fns = sum(cm.fn(c) for c in range(cm.num_classes))
    denom = 2 * tps + fps + fns
    if denom == 0:
        return 1.0
    return 2 * tps / denom


@dataclass(frozen=True)
class MetricReport:
    """One evaluated group: per-class scores plus the aggregate metrics."""

    group: str
    input_type: str
    class_names: tuple[str, ...]
    class_iou: tuple[float, ...]
    class_f1: tuple[float, ...]
    mean_iou: float
    micro_iou: float
    dice: float

    @classmethod
    def from_confusion(
        cls, cm: ConfusionMatrix, class_names: tuple[str, ...], group: str = "overall", input_type: str = ""
    ) -> "MetricReport":
        if len(class_names) != cm.num_classes:
            raise ValueError(f"{len(class_names)} names for {cm.num_classes} classes")
        return cls(
            group=group,
            input_type=input_type,
            class_names=tuple(class_names),
            class_iou=tuple(class_iou(cm, c) for c in range(cm.num_classes)),
            class_f1=tuple(class_f1(cm, c) for c in range(cm.num_classes)),
            mean_iou=mean_iou(cm),
            micro_iou=micro_iou(cm),
            dice=dice_coefficient(cm),
        )


def report_from_pairs(
    pairs,
    classes: ClassMap,
    group_by: str = "overall",
    input_type: str = "",
) -> list[MetricReport]:
    """Evaluate (gt mask, pred mask, group key) triples into MetricReports.

    group_by "overall" pools everything into one report; any other value
    produces one report per distinct group key plus the pooled overall report.
    """
    pairs = list(pairs)
    if not pairs:
        raise ManifestError("nothing to evaluate: empty pair set")
    k = len(classes)
    groups: dict[str, ConfusionMatrix] = {}
    overall = ConfusionMatrix(k)
    for gt, pred, key in pairs:
        cm = accumulate(gt, pred, num_classes=k)
        overall = overall + cm
        if group_by != "overall":
            key = str(key)
            groups[key] = groups.get(key, ConfusionMatrix(k)) + cm
    reports = [
        MetricReport.from_confusion(groups[key], classes.names, group=key, input_type=input_type)
        for key in sorted(groups)
    ]
    reports.append(MetricReport.from_confusion(overall, classes.names, group="overall", input_type=input_type))
    return reports


def evaluate_manifest(
    entries,
    pred_dir: str | Path,
    classes: ClassMap,
    role: str = "test",
    group_by: str = "year",
    input_type: str = "",
    threads: int | None = None,
) -> list[MetricReport]:
    """Evaluate prediction tiles against the ground-truth tiles of a manifest.

    Prediction files carry the same basename as the manifest's input tiles.
    Tiles are parsed in parallel; accumulation order is deterministic.
    """
    from .geotiff import read_geotiff

    pred_dir = Path(pred_dir)
    chosen = [e for e in entries if role in ("all", e.role)]
    if not chosen:
        raise ManifestError(f"manifest has no entries with role {role!r}")

    def load_pair(entry):
        pred_path = pred_dir / Path(entry.input).name
        if not pred_path.is_file():
            raise ManifestError(f"missing prediction tile for {entry.input}: {pred_path}")
        gt_mask, _ = as_class_mask(read_geotiff(entry.mask), classes)
        pred_mask, _ = as_class_mask(read_geotiff(pred_path), classes)
        return gt_mask, pred_mask, str(entry.year)

    with ThreadPoolExecutor(max_workers=threads) as pool:
        pairs = list(pool.map(load_pair, chosen))
    return report_from_pairs(pairs, classes, group_by=group_by, input_type=input_type)


def write_report_csv(reports: list[MetricReport], path: str | Path) -> None:
    """One row per (report, class): group,input_type,class,iou,f1,mean_iou,micro_iou."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(REPORT_COLUMNS)
        for rep in reports:
            for name, iou, f1 in zip(rep.class_names, rep.class_iou, rep.class_f1):
                writer.writerow(
                    [rep.group, rep.input_type, name,
                     f"{iou:.4f}", f"{f1:.4f}", f"{rep.mean_iou:.4f}", f"{rep.micro_iou:.4f}"]
                )


def format_report_table(reports: list[MetricReport]) -> str:
    """Aligned text table, one block per report, 4 decimal places."""
    blocks = []
    for rep in reports:
        title = f"[{rep.group}]" + (f" input={rep.input_type}" if rep.input_type else "")
        header = ["metric", *rep.class_names, "mean"]
        mean_f1 = sum(rep.class_f1) / len(rep.class_f1)
        iou_row = ["IoU", *(f"{v:.4f}" for v in rep.class_iou), f"{rep.mean_iou:.4f}"]
        f1_row = ["F1", *(f"{v:.4f}" for v in rep.class_f1), f"{mean_f1:.4f}"]
        widths = [max(len(r[i]) for r in (header, iou_row, f1_row)) for i in range(len(header))]
        lines = [title]
        for row in (header, iou_row, f1_row):
            lines.append("  ".join(cell.rjust(w) for cell, w in zip(row, widths)))
        lines.append(f"micro IoU = {rep.micro_iou:.4f}   dice = {rep.dice:.4f}")
        blocks.append("\n".join(lines))
    return "\n\n".join(blocks)


def report_to_dict(rep: MetricReport) -> dict:
    """JSON-friendly view of a report with full float precision."""
    return {
        "group": rep.group,
        "input_type": rep.input_type,
        "classes": {
            name: {"iou": iou, "f1": f1}
            for name, iou, f1 in zip(rep.class_names, rep.class_iou, rep.class_f1)
        },
        "mean_iou": rep.mean_iou,
        "micro_iou": rep.micro_iou,
        "dice": rep.dice,
    }
