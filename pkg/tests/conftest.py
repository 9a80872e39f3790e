"""Shared helpers: random raster factories with varied georeferencing."""

from __future__ import annotations

import numpy as np
import pytest

from cropsight import GeoRaster

CRS_POOL = ("EPSG:4326", "EPSG:32646", "", "Bangladesh Transverse Mercator")

PLAIN_TRANSFORM = (500000.0, 10.0, 0.0, 2700000.0, 0.0, -10.0)


def random_transform(rng: np.random.Generator) -> tuple[float, ...]:
    ox = float(rng.uniform(-1e6, 1e6))
    oy = float(rng.uniform(-1e6, 1e6))
    pw = float(rng.uniform(0.1, 100.0))
    ph = -float(rng.uniform(0.1, 100.0))
    return (ox, pw, 0.0, oy, 0.0, ph)


def random_raster(
    rng: np.random.Generator,
    dtype=np.float32,
    bands: int | None = None,
    height: int | None = None,
    width: int | None = None,
    with_nodata: bool | None = None,
) -> GeoRaster:
    bands = bands or int(rng.integers(1, 5))
    h = height or int(rng.integers(1, 41))
    w = width or int(rng.integers(1, 41))
    if np.dtype(dtype) == np.uint8:
        data = rng.integers(0, 256, (bands, h, w), dtype=np.uint8)
        nodata_value = 0.0
    else:
        data = rng.normal(0.0, 1000.0, (bands, h, w)).astype(np.float32)
        nodata_value = -9999.0
    if with_nodata is None:
        with_nodata = bool(rng.integers(0, 2))
    crs = CRS_POOL[int(rng.integers(0, len(CRS_POOL)))]
    return GeoRaster(data, random_transform(rng), crs, nodata_value if with_nodata else None)


def random_mask(rng: np.random.Generator, num_classes: int = 3, side: int | None = None) -> GeoRaster:
    h = side or int(rng.integers(1, 65))
    w = side or int(rng.integers(1, 65))
    data = rng.integers(0, num_classes, (1, h, w), dtype=np.uint8)
    return GeoRaster(data, PLAIN_TRANSFORM, "EPSG:32646", None)


def mask_from_values(values, transform=PLAIN_TRANSFORM, crs="EPSG:32646") -> GeoRaster:
    arr = np.asarray(values, dtype=np.uint8)
    if arr.ndim == 1:
        arr = arr[np.newaxis, :]
    return GeoRaster(arr[np.newaxis] if arr.ndim == 2 else arr, transform, crs, None)


def diff_from_values(values, nodata=-9999.0, transform=PLAIN_TRANSFORM) -> GeoRaster:
    arr = np.asarray(values, dtype=np.float32)
    if arr.ndim == 1:
        arr = arr[np.newaxis, :]
    return GeoRaster(arr[np.newaxis] if arr.ndim == 2 else arr, transform, "EPSG:32646", nodata)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240833)
