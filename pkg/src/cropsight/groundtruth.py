"""Three-class ground-truth masks from NDVI-difference rasters.

A difference pixel at or above the threshold is crop loss, anything below is
unaffected area, and nodata is background. Class masks are single-band uint8
rasters of class indices; a ClassMap gives each index a name and a pseudocolor
so masks can be rendered to, and parsed from, 3-band RGB rasters.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ClassMapError
from .raster import GeoRaster, check_compatible

#: Vegetative-onset greenness value reused as the loss threshold on NDVI differences.
DEFAULT_THRESHOLD = 0.33

CLASS_BACKGROUND = 0
CLASS_LOSS = 1
CLASS_OK = 2

Color = tuple[int, int, int]


@dataclass(frozen=True)
class ClassDef:
    name: str
    color: Color


@dataclass(frozen=True)
class ClassMap:
    """Ordered class table; list position is the class index, index 0 is background."""

    classes: tuple[ClassDef, ...]

    def __post_init__(self) -> None:
        if len(self.classes) < 1:
            raise ClassMapError("class map needs at least one class")
        colors = set()
        for cd in self.classes:
            color = tuple(int(v) for v in cd.color)
            if len(color) != 3 or any(not 0 <= v <= 255 for v in color):
                raise ClassMapError(f"class {cd.name!r} color {cd.color} outside 8-bit range")
            if color in colors:
                raise ClassMapError(f"duplicate class color {color}")
            colors.add(color)

    def __len__(self) -> int:
        return len(self.classes)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(cd.name for cd in self.classes)

    def color_table(self) -> np.ndarray:
        """(num_classes, 3) uint8 color lookup table."""
        return np.array([cd.color for cd in self.classes], dtype=np.uint8)


DEFAULT_CLASSES = ClassMap(
    (
        ClassDef("background", (0, 0, 0)),
        ClassDef("crop-compromised", (222, 33, 0)),
        ClassDef("rest-of-areas", (222, 225, 45)),
    )
)


def threshold_classify(diff: GeoRaster, threshold: float = DEFAULT_THRESHOLD) -> GeoRaster:
    """Classify an NDVI-difference raster into background/loss/ok.

    The boundary is inclusive: a pixel exactly at the threshold counts as
    loss. Nodata (and NaN) pixels become background.
    """
    if diff.bands != 1 or diff.data.dtype != np.float32:
        raise ClassMapError(
            f"expected a single-band float32 difference raster, got {diff.bands} band(s) {diff.data.dtype}"
        )
    values = diff.data[0]
    invalid = ~np.isfinite(values)
    if diff.nodata is not None:
        invalid |= values == diff.nodata
    out = np.where(values >= threshold, CLASS_LOSS, CLASS_OK).astype(np.uint8)
    out[invalid] = CLASS_BACKGROUND
    return GeoRaster(out[np.newaxis], diff.transform, diff.crs, None)


def check_mask(mask: GeoRaster, classes: ClassMap) -> None:
    if mask.bands != 1 or mask.data.dtype != np.uint8:
        raise ClassMapError(f"class mask must be single-band uint8, got {mask.bands} band(s) {mask.data.dtype}")
    top = int(mask.data.max())
    if top >= len(classes):
        raise ClassMapError(f"mask value {top} out of range for {len(classes)}-class map")


def render_mask(mask: GeoRaster, classes: ClassMap = DEFAULT_CLASSES) -> GeoRaster:
    """Paint a class mask into a 3-band pseudocolor raster using the class colors."""
    check_mask(mask, classes)
    lut = classes.color_table()
    painted = lut[mask.data[0]]  # (h, w, 3)
    return GeoRaster(np.moveaxis(painted, -1, 0).copy(), mask.transform, mask.crs, None)


def parse_mask(rendered: GeoRaster, classes: ClassMap = DEFAULT_CLASSES) -> tuple[GeoRaster, int]:
    """Map a rendered pseudocolor raster back to class indices.

    Exact color matches map directly; any other pixel maps to the nearest
    class color in RGB space and is tallied in the returned mismatch count.
    A 4th band (alpha from rendered exports) is ignored when present.
    """
    if rendered.data.dtype != np.uint8 or rendered.bands not in (3, 4):
        raise ClassMapError(
            f"expected 3- or 4-band uint8 rendered raster, got {rendered.bands} band(s) {rendered.data.dtype}"
        )
    rgb = rendered.data[:3].astype(np.int32)
    lut = classes.color_table().astype(np.int32)
    h, w = rendered.height, rendered.width
    out = np.empty((h, w), dtype=np.uint8)
    mismatches = 0
    block = max(1, 4_000_000 // (w * len(classes)))
    for top in range(0, h, block):
        sub = rgb[:, top : top + block, :]
        # (k, rows, w) squared distances to each class color
        dist = ((sub[np.newaxis, :, :, :] - lut[:, :, np.newaxis, np.newaxis]) ** 2).sum(axis=1)
        out[top : top + block] = np.argmin(dist, axis=0).astype(np.uint8)
        mismatches += int((dist.min(axis=0) > 0).sum())
    mask = GeoRaster(out[np.newaxis], rendered.transform, rendered.crs, None)
    return mask, mismatches


def as_class_mask(raster: GeoRaster, classes: ClassMap = DEFAULT_CLASSES) -> tuple[GeoRaster, int]:
    """Accept either an index mask (1 band) or a rendered mask (3/4 bands)."""
    if raster.bands == 1:
        check_mask(raster, classes)
        return raster, 0
    return parse_mask(raster, classes)


def class_histogram(mask: GeoRaster, classes: ClassMap) -> np.ndarray:
    check_mask(mask, classes)
    return np.bincount(mask.data[0].ravel(), minlength=len(classes))


def mask_difference(gt: GeoRaster, pred: GeoRaster) -> int:
    """Number of pixels where two class masks disagree."""
    check_compatible(gt, pred, "class masks")
    return int((gt.data != pred.data).sum())


def load_classmap(path: str | Path) -> ClassMap:
    """Read a class map CSV with header ``name,r,g,b``; row order is class order."""
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"no such class map file: {path}")
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ClassMapError(f"{path}: empty class map file") from None
        if [h.strip().lower() for h in header] != ["name", "r", "g", "b"]:
            raise ClassMapError(f"{path}: expected header name,r,g,b, got {header}")
        classes = []
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != 4:
                raise ClassMapError(f"{path}:{lineno}: expected 4 columns, got {len(row)}")
            name = row[0].strip()
            try:
                color = tuple(int(v) for v in row[1:4])
            except ValueError:
                raise ClassMapError(f"{path}:{lineno}: non-integer color component in {row[1:4]}") from None
            classes.append(ClassDef(name, color))
    if not classes:
        raise ClassMapError(f"{path}: class map has no rows")
    try:
        return ClassMap(tuple(classes))
    except ClassMapError as exc:
        raise ClassMapError(f"{path}: {exc}") from None


def write_classmap(classes: ClassMap, path: str | Path) -> None:
    """Write the class map CSV (UTF-8, LF line endings)."""
    path = Path(path)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["name", "r", "g", "b"])
        for cd in classes.classes:
            writer.writerow([cd.name, *cd.color])
