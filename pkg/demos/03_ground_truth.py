"""Ground-truth walkthrough: threshold rule, class maps, color round trips.

Run with: python3 demos/03_ground_truth.py
"""

import tempfile
from pathlib import Path

import numpy as np

from cropsight import (
    DEFAULT_CLASSES,
    DEFAULT_THRESHOLD,
    ClassDef,
    ClassMap,
    class_histogram,
    compute_ndvi,
    generate_scene,
    heatwave_spec,
    load_classmap,
    parse_mask,
    render_mask,
    temporal_difference,
    threshold_classify,
    write_classmap,
)

out = Path(tempfile.mkdtemp(prefix="cropsight-demo3-"))

# The decision rule is a single threshold on the NDVI drop: a decrease of
# 0.33 or more marks a pixel as compromised cropland. Pixels with no valid
# observation become background.
before, after, expected = generate_scene(heatwave_spec(320, 240, seed=12))
drop = temporal_difference(compute_ndvi(before), compute_ndvi(after))
mask = threshold_classify(drop, threshold=DEFAULT_THRESHOLD)

hist = class_histogram(mask, DEFAULT_CLASSES)
for cd, n in zip(DEFAULT_CLASSES.classes, hist):
    print(f"{cd.name:<18} {int(n):>8} px  color {cd.color}")

# The rule reproduces the mask the generator planted.
print(f"matches planted mask: {np.array_equal(mask.data, expected.data)}")

# Class tables are tiny CSV files (name,r,g,b). Index 0 is background.
write_classmap(DEFAULT_CLASSES, out / "classes.csv")
print((out / "classes.csv").read_text(), end="")
reloaded = load_classmap(out / "classes.csv")
print(f"round-tripped table: {reloaded == DEFAULT_CLASSES}")

# Masks render to pseudocolor rasters for inspection, and parse back. Parsing
# is exact on clean renders; off-palette pixels snap to the nearest class
# color and are counted so lossy exports are noticed.
rendered = render_mask(mask)
recovered, mismatches = parse_mask(rendered)
print(f"render/parse identity: {np.array_equal(recovered.data, mask.data)} "
      f"({mismatches} off-palette pixels)")

smudge = np.array(rendered.data)
smudge[:, 0, 0] = (200, 40, 10)  # almost the loss color
_, n = parse_mask(rendered.with_data(smudge))
print(f"after smudging one pixel: {n} off-palette pixel(s)")

# Custom schemes work the same way; only the color table changes.
alt = ClassMap((
    ClassDef("void", (255, 255, 255)),
    ClassDef("damage", (200, 0, 120)),
    ClassDef("intact", (0, 160, 80)),
))
alt_rendered = render_mask(mask, alt)
print(f"custom palette corner pixel: {tuple(int(v) for v in alt_rendered.data[:, 0, 0])}")
print(f"outputs in {out}")
