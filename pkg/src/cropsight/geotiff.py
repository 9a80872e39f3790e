"""GeoTIFF read/write built on tifffile.

Writes the standard GeoTIFF tags (ModelPixelScale, ModelTiepoint,
GeoKeyDirectory, GeoAsciiParams) plus the GDAL nodata tag, so output files
open in QGIS/GDAL with georeferencing intact. Reading accepts files written
here as well as GDAL-produced GeoTIFFs that use either pixel-scale/tiepoint
tags or a rotation-free ModelTransformation matrix.

CRS handling: "EPSG:<code>" strings are encoded as the projected or
geographic CS geokey; any other non-empty string round-trips through the
GTCitation key. An absent CRS reads back as "".
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
import tifffile

from .errors import MissingGeotransformError, RotatedRasterError, UnsupportedSampleTypeError
from .raster import GeoRaster

_TAG_PIXEL_SCALE = 33550
_TAG_TIEPOINT = 33922
_TAG_TRANSFORMATION = 34264
_TAG_GEO_KEYS = 34735
_TAG_GEO_ASCII = 34737
_TAG_GDAL_NODATA = 42113

_KEY_MODEL_TYPE = 1024
_KEY_RASTER_TYPE = 1025
_KEY_CITATION = 1026
_KEY_GEOGRAPHIC_CS = 2048
_KEY_PROJECTED_CS = 3072

_MODEL_PROJECTED = 1
_MODEL_GEOGRAPHIC = 2
_MODEL_USER = 32767
_RASTER_PIXEL_IS_AREA = 1


def _epsg_code(crs: str) -> int | None:
    if crs.upper().startswith("EPSG:"):
        try:
            code = int(crs[5:])
        except ValueError:
            return None
        if 0 < code < 65535:
            return code
    return None


def _crs_extratags(crs: str) -> list[tuple]:
    """GeoKeyDirectory (+ GeoAsciiParams) extratags encoding a CRS string."""
    if not crs:
        return []
    code = _epsg_code(crs)
    if code is not None:
        # EPSG geographic CRS codes live in the 4xxx block; everything else
        # practical (UTM etc.) is projected.
        geographic = 4000 <= code <= 4999
        keys = [
            (_KEY_MODEL_TYPE, 0, 1, _MODEL_GEOGRAPHIC if geographic else _MODEL_PROJECTED),
            (_KEY_RASTER_TYPE, 0, 1, _RASTER_PIXEL_IS_AREA),
            (_KEY_GEOGRAPHIC_CS if geographic else _KEY_PROJECTED_CS, 0, 1, code),
        ]
        ascii_params = ""
    else:
        ascii_params = crs + "|"
        keys = [
            (_KEY_MODEL_TYPE, 0, 1, _MODEL_USER),
            (_KEY_RASTER_TYPE, 0, 1, _RASTER_PIXEL_IS_AREA),
            (_KEY_CITATION, _TAG_GEO_ASCII, len(ascii_params), 0),
        ]
    directory = [1, 1, 0, len(keys)]
    for entry in keys:
        directory.extend(entry)
    tags = [(_TAG_GEO_KEYS, "H", len(directory), tuple(directory))]
    if ascii_params:
        tags.append((_TAG_GEO_ASCII, "s", 0, ascii_params))
    return tags


def _parse_crs(page: tifffile.TiffPage) -> str:
    tag = page.tags.get(_TAG_GEO_KEYS)
    if tag is None:
        return ""
    directory = tag.value
    if len(directory) < 4:
        return ""
    ascii_tag = page.tags.get(_TAG_GEO_ASCII)
    ascii_params = ascii_tag.value if ascii_tag is not None else ""
    nkeys = int(directory[3])
    citation = ""
    for i in range(nkeys):
        base = 4 + 4 * i
        if base + 4 > len(directory):
            break
        key_id, location, count, value = directory[base : base + 4]
        if key_id in (_KEY_PROJECTED_CS, _KEY_GEOGRAPHIC_CS) and location == 0 and value != _MODEL_USER:
            return f"EPSG:{int(value)}"
        if key_id == _KEY_CITATION and location == _TAG_GEO_ASCII:
            citation = ascii_params[int(value) : int(value) + int(count)]
            citation = citation.rstrip("\x00").rstrip("|")
    return citation


def write_geotiff(raster: GeoRaster, path: str | Path) -> None:
    """Write a GeoRaster to disk as a GeoTIFF.

    Layout: single band as one grayscale plane, 3-band uint8 as interleaved
    RGB (the friendliest form for rendered masks), anything else as separate
    band planes. Output bytes are deterministic for identical inputs.
    """
    path = Path(path)
    ox, pw, _, oy, _, ph = raster.transform
    extratags = [
        (_TAG_PIXEL_SCALE, "d", 3, (pw, -ph, 0.0)),
        (_TAG_TIEPOINT, "d", 6, (0.0, 0.0, 0.0, ox, oy, 0.0)),
    ]
    extratags.extend(_crs_extratags(raster.crs))
    if raster.nodata is not None:
        nd = raster.nodata
        text = str(int(nd)) if float(nd).is_integer() else repr(float(nd))
        extratags.append((_TAG_GDAL_NODATA, "s", 0, text))

    if raster.bands == 1:
        data = raster.data[0]
        kwargs = {"photometric": "minisblack"}
    elif raster.bands == 3 and raster.data.dtype == np.uint8:
        data = np.moveaxis(raster.data, 0, -1)
        kwargs = {"photometric": "rgb"}
    else:
        data = raster.data
        kwargs = {"photometric": "minisblack", "planarconfig": "separate"}
    tifffile.imwrite(path, data, extratags=extratags, **kwargs)


def _read_transform(page: tifffile.TiffPage) -> tuple[float, float, float, float, float, float]:
    scale_tag = page.tags.get(_TAG_PIXEL_SCALE)
    tie_tag = page.tags.get(_TAG_TIEPOINT)
    if scale_tag is not None and tie_tag is not None:
        sx, sy = float(scale_tag.value[0]), float(scale_tag.value[1])
        tie = tie_tag.value
        i, j, x, y = float(tie[0]), float(tie[1]), float(tie[3]), float(tie[4])
        pw, ph = sx, -sy
        # The tiepoint may anchor a pixel other than (0,0); shift back.
        return (x - i * pw, pw, 0.0, y - j * ph, 0.0, ph)
    matrix_tag = page.tags.get(_TAG_TRANSFORMATION)
    if matrix_tag is not None:
        m = matrix_tag.value
        pw, rx, ox = float(m[0]), float(m[1]), float(m[3])
        ry, ph, oy = float(m[4]), float(m[5]), float(m[7])
        if rx != 0.0 or ry != 0.0:
            raise RotatedRasterError(f"rotated geotransform not supported: {m[:8]}")
        return (ox, pw, 0.0, oy, 0.0, ph)
    raise MissingGeotransformError("file has no geotransform tags")


def _read_nodata(page: tifffile.TiffPage) -> float | None:
    tag = page.tags.get(_TAG_GDAL_NODATA)
    if tag is None:
        return None
    try:
        return float(str(tag.value).strip().strip("\x00"))
    except ValueError:
        return None


def read_geotiff(path: str | Path) -> GeoRaster:
    """Read a GeoTIFF into a GeoRaster, preserving pixels, geotransform, CRS and nodata.

    Raises FileNotFoundError for a missing file, UnsupportedSampleTypeError
    for sample types other than float32/uint8, MissingGeotransformError when
    no geotransform tags are present, and RotatedRasterError for rotated
    geotransforms.
    """
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"no such raster file: {path}")
    with tifffile.TiffFile(path) as tif:
        page = tif.pages[0]
        dtype = np.dtype(page.dtype)
        if dtype not in (np.dtype(np.float32), np.dtype(np.uint8)):
            raise UnsupportedSampleTypeError(
                f"{path}: unsupported sample type {dtype}; supported: float32, uint8"
            )
        transform = _read_transform(page)
        crs = _parse_crs(page)
        nodata = _read_nodata(page)
        separate_planes = page.planarconfig == 2
        arr = tif.asarray()

    if arr.ndim == 2:
        arr = arr[np.newaxis, :, :]
    elif arr.ndim == 3 and separate_planes:
        pass  # already (bands, h, w)
    elif arr.ndim == 3:
        arr = np.moveaxis(arr, -1, 0)  # (h, w, samples) -> (bands, h, w)
    else:
        raise UnsupportedSampleTypeError(f"{path}: unsupported raster layout {arr.shape}")
    return GeoRaster(np.ascontiguousarray(arr), transform, crs, nodata)
