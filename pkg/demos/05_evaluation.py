"""Evaluation walkthrough: confusion counts, IoU/F1 reports, oracle cross-check.

Run with: python3 demos/05_evaluation.py
"""

import tempfile
from pathlib import Path

import numpy as np

from cropsight import (
    DEFAULT_CLASSES,
    MetricReport,
    accumulate,
    brute_force_metrics,
    class_f1,
    class_iou,
    compute_ndvi,
    dice_coefficient,
    format_report_table,
    generate_scene,
    hailstorm_spec,
    mean_iou,
    micro_iou,
    report_from_pairs,
    temporal_difference,
    threshold_classify,
    write_report_csv,
)

out = Path(tempfile.mkdtemp(prefix="cropsight-demo5-"))

# Ground truth comes from the scene generator; the "prediction" is the same
# pipeline run with a slightly different threshold, so the two masks disagree
# along region edges the way a trained model would.
before, after, gt = generate_scene(hailstorm_spec(512, 384, seed=9))
drop = temporal_difference(compute_ndvi(before), compute_ndvi(after))
pred = threshold_classify(drop, threshold=0.45)

cm = accumulate(gt, pred, num_classes=len(DEFAULT_CLASSES))
print("per-class scores (IoU / F1):")
for c, name in enumerate(DEFAULT_CLASSES.names):
    print(f"  {name:<18} {class_iou(cm, c):.4f} / {class_f1(cm, c):.4f}")
print(f"mean IoU {mean_iou(cm):.4f}  micro IoU {micro_iou(cm):.4f}  "
      f"dice {dice_coefficient(cm):.4f}")

# F1 is determined by IoU: f1 = 2*iou / (1 + iou). The report table keeps
# both because both get quoted.
c = 1
iou = class_iou(cm, c)
print(f"identity check: {2 * iou / (1 + iou):.6f} == {class_f1(cm, c):.6f}")

# Reports group pairs by a key (here: year) and always append the pooled
# overall row. The same data serializes to CSV for spreadsheets.
pairs = [(gt, pred, "2021"), (gt, gt, "2022")]
reports = report_from_pairs(pairs, DEFAULT_CLASSES, group_by="year", input_type="ndvi diff")
print()
print(format_report_table(reports))
write_report_csv(reports, out / "report.csv")

# A deliberately naive pixel-by-pixel oracle recomputes every score with
# plain loops. It must agree bit for bit with the vectorized path.
small_gt = gt.with_data(gt.data[:, :64, :64].copy())
small_pred = pred.with_data(pred.data[:, :64, :64].copy())
fast = MetricReport.from_confusion(
    accumulate(small_gt, small_pred, num_classes=3), DEFAULT_CLASSES.names,
    group="overall", input_type="oracle",
)
slow = brute_force_metrics(small_gt, small_pred, 3, class_names=DEFAULT_CLASSES.names)
print(f"oracle agreement: {fast == slow}")
print(f"outputs in {out}")
