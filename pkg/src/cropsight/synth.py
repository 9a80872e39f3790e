"""Synthetic scene generation and brute-force metric oracles.

Scenes stand in for real satellite exports during desk-scale verification:
a healthy-vegetation 4-band before image, an after image with planted loss
regions, and the exact class mask those regions imply. With zero noise the
full pipeline (ndvi -> difference -> threshold) reproduces the expected mask
pixel for pixel.

Planted drop magnitudes quantize to 0.02 steps so no planted value can sit
close enough to the 0.33 class boundary for float32 rounding to flip it.
Two disaster archetypes are provided: hailstorm scenes plant sharp high-drop
patches, heatwave scenes plant diffuse gradients straddling the threshold.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import RasterMismatchError, SceneSpecError
from .groundtruth import CLASS_BACKGROUND, CLASS_LOSS, CLASS_OK, DEFAULT_THRESHOLD
from .metrics import MetricReport
from .raster import GeoRaster

#: Planted drops snap to this grid; 0.33 is deliberately not representable.
DROP_STEP = 0.02

#: Synthetic rasters mimic 10 m UTM exports.
SCENE_TRANSFORM = (500000.0, 10.0, 0.0, 2700000.0, 0.0, -10.0)
SCENE_CRS = "EPSG:32646"
SCENE_NODATA = 0.0

#: How strongly loss shifts the visible bands (reflectance per unit of NDVI
#: drop): dead vegetation reflects more red and blue, less green. This is what
#: makes loss regions visible in RGB composites, not just in NDVI.
RED_SHIFT = 0.15
GREEN_SHIFT = -0.05
BLUE_SHIFT = 0.02


@dataclass(frozen=True)
class LossRegion:
    """Axis-aligned rectangle or inscribed ellipse with a planted NDVI drop.

    A plain region drops NDVI by `drop` everywhere inside. With `drop_low`
    set, the drop ramps linearly from drop_low at the left edge to drop at
    the right edge (the diffuse heatwave shape).
    """

    shape: str
    x: int
    y: int
    width: int
    height: int
    drop: float
    drop_low: float | None = None

    def __post_init__(self) -> None:
        if self.shape not in ("rect", "ellipse"):
            raise SceneSpecError(f"region shape must be rect or ellipse, got {self.shape!r}")
        if self.width < 1 or self.height < 1:
            raise SceneSpecError(f"region must be at least 1x1, got {self.width}x{self.height}")
        if not self.drop > 0:
            raise SceneSpecError(f"drop magnitude must be positive, got {self.drop}")
        if self.drop_low is not None and not 0 < self.drop_low <= self.drop:
            raise SceneSpecError(
                f"drop_low must be in (0, drop], got {self.drop_low} with drop {self.drop}"
            )


@dataclass(frozen=True)
class SceneSpec:
    """Deterministic recipe for one synthetic before/after scene."""

    width: int
    height: int
    district: str = "synthville"
    base_reflectance: tuple[float, float, float, float] = (0.60, 0.10, 0.08, 0.05)  # nir, red, green, blue
    loss_regions: tuple[LossRegion, ...] = field(default_factory=tuple)
    noise: float = 0.0
    border: int = 0
    seed: int = 0

    def __post_init__(self) -> None:
        if self.width < 1 or self.height < 1:
            raise SceneSpecError(f"scene must be at least 1x1, got {self.width}x{self.height}")
        if len(self.base_reflectance) != 4 or any(v <= 0 for v in self.base_reflectance):
            raise SceneSpecError(f"base reflectance must be 4 positive values, got {self.base_reflectance}")
        if self.noise < 0:
            raise SceneSpecError(f"noise amplitude must be >= 0, got {self.noise}")
        if self.border < 0 or 2 * self.border >= min(self.width, self.height):
            raise SceneSpecError(f"border {self.border} leaves no interior in {self.width}x{self.height}")
        object.__setattr__(self, "loss_regions", tuple(self.loss_regions))
        object.__setattr__(self, "base_reflectance", tuple(float(v) for v in self.base_reflectance))
        for region in self.loss_regions:
            if region.x < 0 or region.y < 0 or region.x + region.width > self.width \
                    or region.y + region.height > self.height:
                raise SceneSpecError(
                    f"region at ({region.x},{region.y}) size {region.width}x{region.height} "
                    f"outside {self.width}x{self.height} scene"
                )


def _region_drop_map(spec: SceneSpec) -> np.ndarray:
    """Per-pixel planted NDVI drop, quantized to the drop grid."""
    drop = np.zeros((spec.height, spec.width), dtype=np.float64)
    for region in spec.loss_regions:
        ys = slice(region.y, region.y + region.height)
        xs = slice(region.x, region.x + region.width)
        if region.drop_low is None:
            local = np.full((region.height, region.width), region.drop)
        else:
            ramp = np.linspace(region.drop_low, region.drop, region.width)
            local = np.broadcast_to(ramp, (region.height, region.width)).copy()
        if region.shape == "ellipse":
            yy, xx = np.mgrid[0 : region.height, 0 : region.width]
            cy, cx = (region.height - 1) / 2.0, (region.width - 1) / 2.0
            ry, rx = max(cy, 0.5), max(cx, 0.5)
            inside = ((yy - cy) / ry) ** 2 + ((xx - cx) / rx) ** 2 <= 1.0
            local = np.where(inside, local, 0.0)
        drop[ys, xs] = np.maximum(drop[ys, xs], local)
    return np.round(drop / DROP_STEP) * DROP_STEP


def generate_scene(
    spec: SceneSpec, threshold: float = DEFAULT_THRESHOLD
) -> tuple[GeoRaster, GeoRaster, GeoRaster]:
    """Build (before, after, expected mask) for a scene spec.

    Both rasters are 4-band float32 digital numbers (reflectance * 10000) in
    ascending band order (blue, green, red, nir) with a zeroed nodata border.
    The after image equals the before image outside the loss regions; inside,
    NIR is solved per pixel so NDVI drops by exactly the planted amount, and
    the visible bands shift the way dying vegetation does. The expected mask
    is loss where the planted drop is at or above the threshold, background
    in the border, ok elsewhere. Generation is deterministic per seed.
    """
    rng = np.random.default_rng(spec.seed)
    scale = 10000.0
    nir_r, red_r, green_r, blue_r = spec.base_reflectance
    h, w = spec.height, spec.width

    def plane(base: float) -> np.ndarray:
        refl = np.full((h, w), base, dtype=np.float64)
        if spec.noise > 0:
            refl = refl + spec.noise * rng.standard_normal((h, w))
        return np.clip(refl, 1e-4, 2.0)

    # Stack order matches the default band assignment: B02, B03, B04, B8.
    blue = (plane(blue_r) * scale).astype(np.float32)
    green = (plane(green_r) * scale).astype(np.float32)
    red = (plane(red_r) * scale).astype(np.float32)
    nir = (plane(nir_r) * scale).astype(np.float32)

    drop = _region_drop_map(spec)
    hit = drop > 0

    # Work from the float32-quantized before values so the achieved drop is
    # exact for the pipeline that will read these rasters.
    nb = nir.astype(np.float64)
    rb = red.astype(np.float64)
    ndvi_before = (nb - rb) / (nb + rb)
    ndvi_after = ndvi_before - drop
    if np.any(ndvi_after[hit] <= -0.995):
        raise SceneSpecError("planted drop too large for the base NDVI (after-NDVI would reach -1)")

    red_after = np.where(hit, rb + RED_SHIFT * drop * scale, rb).astype(np.float32)
    green_after = np.where(hit, green.astype(np.float64) + GREEN_SHIFT * drop * scale, green).astype(np.float32)
    blue_after = np.where(hit, blue.astype(np.float64) + BLUE_SHIFT * drop * scale, blue).astype(np.float32)
    ra = red_after.astype(np.float64)
    nir_after = np.where(hit, ra * (1.0 + ndvi_after) / (1.0 - ndvi_after), nb).astype(np.float32)

    before = np.stack([blue, green, red, nir])
    after = np.stack([blue_after, green_after, red_after, nir_after])

    expected = np.where(drop >= threshold, CLASS_LOSS, CLASS_OK).astype(np.uint8)
    if spec.border > 0:
        b = spec.border
        edge = np.ones((h, w), dtype=bool)
        edge[b : h - b, b : w - b] = False
        before[:, edge] = SCENE_NODATA
        after[:, edge] = SCENE_NODATA
        expected[edge] = CLASS_BACKGROUND

    before_raster = GeoRaster(before, SCENE_TRANSFORM, SCENE_CRS, SCENE_NODATA)
    after_raster = GeoRaster(after, SCENE_TRANSFORM, SCENE_CRS, SCENE_NODATA)
    expected_mask = GeoRaster(expected[np.newaxis], SCENE_TRANSFORM, SCENE_CRS, None)
    return before_raster, after_raster, expected_mask


def hailstorm_spec(
    width: int, height: int, seed: int, district: str = "hailville", n_patches: int = 6, border: int = 8,
    noise: float = 0.0,
) -> SceneSpec:
    """Sharp, high-drop patches: the easy-to-segment disaster shape."""
    rng = np.random.default_rng(seed)
    regions = []
    for _ in range(n_patches):
        rw = int(rng.integers(width // 10, max(width // 4, width // 10 + 1)))
        rh = int(rng.integers(height // 10, max(height // 4, height // 10 + 1)))
        x = int(rng.integers(border, max(width - border - rw, border + 1)))
        y = int(rng.integers(border, max(height - border - rh, border + 1)))
        drop = float(rng.choice(np.arange(0.40, 0.72, DROP_STEP)))
        shape = "ellipse" if rng.random() < 0.5 else "rect"
        regions.append(LossRegion(shape, x, y, rw, rh, round(drop, 2)))
    return SceneSpec(width, height, district=district, loss_regions=tuple(regions),
                     noise=noise, border=border, seed=seed)


def heatwave_spec(
    width: int, height: int, seed: int, district: str = "heatfield", n_patches: int = 3, border: int = 8,
    noise: float = 0.0,
) -> SceneSpec:
    """Diffuse low-drop gradients straddling the threshold: the hard shape."""
    rng = np.random.default_rng(seed)
    regions = []
    for _ in range(n_patches):
        rw = int(rng.integers(width // 4, max(width // 2, width // 4 + 1)))
        rh = int(rng.integers(height // 4, max(height // 2, height // 4 + 1)))
        x = int(rng.integers(border, max(width - border - rw, border + 1)))
        y = int(rng.integers(border, max(height - border - rh, border + 1)))
        regions.append(LossRegion("rect", x, y, rw, rh, drop=0.44, drop_low=0.20))
    return SceneSpec(width, height, district=district, loss_regions=tuple(regions),
                     noise=noise, border=border, seed=seed)


def scene_spec_to_dict(spec: SceneSpec) -> dict:
    nir, red, green, blue = spec.base_reflectance
    return {
        "width": spec.width,
        "height": spec.height,
        "district": spec.district,
        "base_reflectance": {"nir": nir, "red": red, "green": green, "blue": blue},
        "noise": spec.noise,
        "border": spec.border,
        "seed": spec.seed,
        "loss_regions": [
            {k: v for k, v in {
                "shape": r.shape, "x": r.x, "y": r.y, "width": r.width, "height": r.height,
                "drop": r.drop, "drop_low": r.drop_low,
            }.items() if v is not None}
            for r in spec.loss_regions
        ],
    }


def scene_spec_from_dict(data: dict) -> SceneSpec:
    try:
        base = data.get("base_reflectance", {"nir": 0.60, "red": 0.10, "green": 0.08, "blue": 0.05})
        if isinstance(base, dict):
            base_tuple = (base["nir"], base["red"], base["green"], base["blue"])
        else:
            base_tuple = tuple(base)
        regions = tuple(
            LossRegion(
                shape=r["shape"], x=r["x"], y=r["y"], width=r["width"], height=r["height"],
                drop=r["drop"], drop_low=r.get("drop_low"),
            )
            for r in data.get("loss_regions", [])
        )
        return SceneSpec(
            width=data["width"],
            height=data["height"],
            district=data.get("district", "synthville"),
            base_reflectance=base_tuple,
            loss_regions=regions,
            noise=data.get("noise", 0.0),
            border=data.get("border", 0),
            seed=data.get("seed", 0),
        )
    except KeyError as exc:
        raise SceneSpecError(f"scene spec missing required field {exc}") from None


def load_scene_spec(path: str | Path) -> SceneSpec:
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"no such scene spec file: {path}")
    with open(path, encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SceneSpecError(f"{path}: invalid JSON: {exc}") from None
    return scene_spec_from_dict(data)


def save_scene_spec(spec: SceneSpec, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(scene_spec_to_dict(spec), fh, indent=2)
        fh.write("\n")


# ---------------------------------------------------------------------------
# Brute-force oracle. Deliberately naive and deliberately independent: plain
# Python loops, no use of the metrics module's counting code.
# ---------------------------------------------------------------------------


def _plain_values(mask) -> list:
    arr = mask.data[0] if isinstance(mask, GeoRaster) else np.asarray(mask)
    return arr.tolist(), arr.shape


def brute_force_counts(gt, pred, num_classes: int) -> tuple[list[int], list[int], list[int]]:
    """Per-class (TP, FP, FN) by a literal class-by-row-by-column triple loop."""
    g, gshape = _plain_values(gt)
    p, pshape = _plain_values(pred)
    if gshape != pshape:
        raise RasterMismatchError(f"mask shapes differ: {gshape} vs {pshape}")
    rows, cols = gshape
    tp = [0] * num_classes
    fp = [0] * num_classes
    fn = [0] * num_classes
    for c in range(num_classes):
        for i in range(rows):
            grow = g[i]
            prow = p[i]
            for j in range(cols):
                gv = grow[j]
                pv = prow[j]
                if gv == c and pv == c:
                    tp[c] += 1
                elif pv == c:
                    fp[c] += 1
                elif gv == c:
                    fn[c] += 1
    return tp, fp, fn


def brute_force_metrics(
    gt, pred, num_classes: int = 3, class_names: tuple[str, ...] | None = None
) -> MetricReport:
    """Every metric from the naive counts; shares no computation with the metrics module."""
    tp, fp, fn = brute_force_counts(gt, pred, num_classes)
    ious = []
    f1s = []
    for c in range(num_classes):
        denom = tp[c] + fp[c] + fn[c]
        ious.append(1.0 if denom == 0 else tp[c] / denom)
        fdenom = 2 * tp[c] + fp[c] + fn[c]
        f1s.append(1.0 if fdenom == 0 else 2 * tp[c] / fdenom)
    total_tp = sum(tp)
    total_fp = sum(fp)
    total_fn = sum(fn)
    micro_denom = total_tp + total_fp + total_fn
    micro = 1.0 if micro_denom == 0 else total_tp / micro_denom
    dice_denom = 2 * total_tp + total_fp + total_fn
    dice = 1.0 if dice_denom == 0 else 2 * total_tp / dice_denom
    if class_names is None:
        class_names = tuple(f"class{c}" for c in range(num_classes))
    return MetricReport(
        group="overall",
        input_type="oracle",
        class_names=tuple(class_names),
        class_iou=tuple(ious),
        class_f1=tuple(f1s),
        mean_iou=sum(ious) / len(ious),
        micro_iou=micro,
        dice=dice,
    )
