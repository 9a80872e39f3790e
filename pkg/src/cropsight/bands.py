"""Band composites, NDVI, and before/after temporal differencing.

Band roles follow the Sentinel-2 convention: NIR is B8, red B04, green B03,
blue B02. The default assignment expects a 4-band stack in ascending band
order (blue, green, red, nir); digital numbers are reflectance * 10000 unless
a different scale is configured.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BandIndexError, RasterMismatchError
from .raster import GeoRaster, check_compatible

#: Reserved nodata value for float index rasters (NDVI and NDVI differences).
INDEX_NODATA = -9999.0

#: Default contrast window, in reflectance, mapped linearly onto 0..255.
DEFAULT_WINDOW = (0.0, 0.3)

COMPOSITE_KINDS = ("rgb", "fci")


@dataclass(frozen=True)
class BandAssignment:
    """Which band index plays which spectral role, plus the DN-to-reflectance divisor."""

    nir: int
    red: int
    green: int
    blue: int
    reflectance_scale: float = 10000.0

    def __post_init__(self) -> None:
        indices = (self.nir, self.red, self.green, self.blue)
        if any(i < 0 for i in indices):
            raise BandIndexError(f"band indices must be >= 0, got {indices}")
        if len(set(indices)) != 4:
            raise BandIndexError(f"band indices must be distinct, got {indices}")
        if not self.reflectance_scale > 0:
            raise BandIndexError(f"reflectance scale must be > 0, got {self.reflectance_scale}")

    def check(self, raster: GeoRaster) -> None:
        top = max(self.nir, self.red, self.green, self.blue)
        if top >= raster.bands:
            raise BandIndexError(
                f"band index {top} out of range for {raster.bands}-band raster"
            )


#: Ascending Sentinel-2 stack order: B02, B03, B04, B8.
DEFAULT_BANDS = BandAssignment(nir=3, red=2, green=1, blue=0)


def _invalid_mask(raster: GeoRaster, band_indices: tuple[int, ...]) -> np.ndarray:
    """Pixels where any listed band is nodata or non-finite."""
    mask = np.zeros((raster.height, raster.width), dtype=bool)
    for i in band_indices:
        band = raster.data[i]
        mask |= ~np.isfinite(band)
        if raster.nodata is not None:
            mask |= band == raster.nodata
    return mask


def compute_ndvi(raster: GeoRaster, bands: BandAssignment = DEFAULT_BANDS) -> GeoRaster:
    """Per-pixel (NIR - Red) / (NIR + Red) as a single-band float32 raster.

    Pixels where NIR + Red is zero, or where any input band is nodata, become
    INDEX_NODATA. The ratio is invariant under the reflectance scale, so raw
    digital numbers work directly.
    """
    bands.check(raster)
    nir = raster.data[bands.nir].astype(np.float64)
    red = raster.data[bands.red].astype(np.float64)
    invalid = _invalid_mask(raster, (bands.nir, bands.red))
    denom = nir + red
    invalid |= denom == 0.0
    with np.errstate(divide="ignore", invalid="ignore"):
        ndvi = (nir - red) / denom
    out = ndvi.astype(np.float32)
    out[invalid] = INDEX_NODATA
    return GeoRaster(out[np.newaxis], raster.transform, raster.crs, INDEX_NODATA)


def compose(
    raster: GeoRaster,
    kind: str,
    bands: BandAssignment = DEFAULT_BANDS,
    window: tuple[float, float] = DEFAULT_WINDOW,
) -> GeoRaster:
    """Render a 3-band 8-bit composite: "rgb" = (red, green, blue), "fci" = (nir, red, green).

    Each band is linearly rescaled from the reflectance window onto 0..255 and
    clamped. Pixels that are nodata in any chosen band render black and the
    output carries nodata=0.
    """
    kind = kind.lower()
    if kind not in COMPOSITE_KINDS:
        raise ValueError(f"composite kind must be one of {COMPOSITE_KINDS}, got {kind!r}")
    bands.check(raster)
    lo, hi = float(window[0]), float(window[1])
    if not hi > lo:
        raise ValueError(f"contrast window must be increasing, got ({lo}, {hi})")
    chosen = (bands.red, bands.green, bands.blue) if kind == "rgb" else (bands.nir, bands.red, bands.green)
    invalid = _invalid_mask(raster, chosen)
    planes = []
    for i in chosen:
        refl = raster.data[i].astype(np.float64) / bands.reflectance_scale
        scaled = np.rint((refl - lo) / (hi - lo) * 255.0)
        planes.append(np.clip(scaled, 0, 255).astype(np.uint8))
    out = np.stack(planes)
    out[:, invalid] = 0
    nodata = 0.0 if raster.nodata is not None else None
    return GeoRaster(out, raster.transform, raster.crs, nodata)


def temporal_difference(before: GeoRaster, after: GeoRaster) -> GeoRaster:
    """Per-pixel before - after, per band.

    Float rasters subtract directly (anti-symmetric, identical inputs give
    exact zeros). 8-bit composites are offset-encoded as
    clamp((before - after)/2 + 128) so both gains and losses survive the
    8-bit range; identical inputs give all-128. Any pixel that is nodata in
    either input is nodata in the output.
    """
    check_compatible(before, after, "before/after rasters")
    if before.data.dtype == np.float32:
        out = before.data - after.data
        out_nodata = before.nodata if before.nodata is not None else after.nodata
        mask = _nodata_mask(before) | _nodata_mask(after)
        if mask.any():
            if out_nodata is None:
                out_nodata = INDEX_NODATA
            out[mask] = out_nodata
        return GeoRaster(out, before.transform, before.crs, out_nodata)

    diff = before.data.astype(np.int16) - after.data.astype(np.int16)
    out = np.clip(np.rint(diff / 2.0 + 128.0), 0, 255).astype(np.uint8)
    out_nodata = before.nodata if before.nodata is not None else after.nodata
    mask = _nodata_mask(before) | _nodata_mask(after)
    if mask.any():
        out[mask] = np.uint8(out_nodata) if out_nodata is not None else 0
    return GeoRaster(out, before.transform, before.crs, out_nodata)


def _nodata_mask(raster: GeoRaster) -> np.ndarray:
    mask = ~np.isfinite(raster.data) if raster.data.dtype == np.float32 else np.zeros(raster.data.shape, bool)
    if raster.nodata is not None:
        mask |= raster.data == raster.nodata
    return mask
