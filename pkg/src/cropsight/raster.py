"""Georeferenced raster data model plus zero-padding, tile splitting and merging.

A GeoRaster is an immutable in-memory raster: a (bands, height, width) numpy
array together with a GDAL-style geotransform, a CRS identifier string and an
optional nodata value. Two sample types are supported: float32 for index
rasters and uint8 for rendered/class rasters.

The geotransform is the 6-tuple (origin_x, pixel_width, row_rotation,
origin_y, col_rotation, pixel_height). Only north-up, non-rotated rasters are
accepted: pixel_width > 0, pixel_height < 0, both rotation terms 0.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import RasterMismatchError, RotatedRasterError, TileGridError, UnsupportedSampleTypeError

GeoTransform = tuple[float, float, float, float, float, float]

SUPPORTED_DTYPES = (np.float32, np.uint8)

#: Tile files are named ``{stem}_r{row:03d}_c{col:03d}.tif``. The grid position
#: encoded in the name is a contract consumed by dataset pairing and merging.
TILE_NAME_RE = re.compile(r"^(?P<stem>.+)_r(?P<row>\d{3,})_c(?P<col>\d{3,})\.(?:tif|tiff)$", re.IGNORECASE)


def tile_filename(stem: str, row: int, col: int) -> str:
    return f"{stem}_r{row:03d}_c{col:03d}.tif"


@dataclass(frozen=True, eq=False)
class GeoRaster:
    """Immutable georeferenced raster.

    The pixel array is frozen in place (writeable flag cleared) so instances
    are safe to share read-only across threads; pass a copy to the constructor
    if the caller needs to keep mutating its array.
    """

    data: np.ndarray
    transform: GeoTransform
    crs: str = ""
    nodata: float | None = None

    def __post_init__(self) -> None:
        arr = np.asarray(self.data)
        if arr.ndim == 2:
            arr = arr[np.newaxis, :, :]
        if arr.ndim != 3:
            raise ValueError(f"raster array must be 2-D or (bands, h, w), got shape {arr.shape}")
        if arr.dtype not in SUPPORTED_DTYPES:
            raise UnsupportedSampleTypeError(
                f"unsupported sample type {arr.dtype}; supported: float32, uint8"
            )
        if arr.shape[0] < 1 or arr.shape[1] < 1 or arr.shape[2] < 1:
            raise ValueError(f"raster must be at least 1x1 with 1 band, got shape {arr.shape}")
        arr.flags.writeable = False
        object.__setattr__(self, "data", arr)

        gt = tuple(float(v) for v in self.transform)
        if len(gt) != 6:
            raise ValueError("geotransform must have 6 elements")
        if gt[2] != 0.0 or gt[4] != 0.0:
            raise RotatedRasterError(f"rotation terms must be 0, got {gt[2]}, {gt[4]}")
        if not (gt[1] > 0.0 and gt[5] < 0.0):
            raise RotatedRasterError(
                f"only north-up rasters supported: pixel width {gt[1]} must be > 0, "
                f"pixel height {gt[5]} must be < 0"
            )
        object.__setattr__(self, "transform", gt)
        object.__setattr__(self, "nodata", None if self.nodata is None else float(self.nodata))

    @property
    def bands(self) -> int:
        return self.data.shape[0]

    @property
    def height(self) -> int:
        return self.data.shape[1]

    @property
    def width(self) -> int:
        return self.data.shape[2]

    @property
    def dtype(self) -> np.dtype:
        return self.data.dtype

    def band(self, index: int) -> np.ndarray:
        return self.data[index]

    def pixel_to_map(self, col: float, row: float) -> tuple[float, float]:
        """Map pixel coordinates (col, row) to CRS coordinates of the pixel's top-left corner."""
        ox, pw, _, oy, _, ph = self.transform
        return ox + col * pw, oy + row * ph

    def with_data(self, data: np.ndarray, nodata: float | None = None) -> "GeoRaster":
        """New raster with the same georeferencing but different pixels."""
        return GeoRaster(data, self.transform, self.crs, self.nodata if nodata is None else nodata)

    def georef_equal(self, other: "GeoRaster") -> bool:
        return self.transform == other.transform and self.crs == other.crs

    def __repr__(self) -> str:
        return (
            f"GeoRaster({self.bands}x{self.height}x{self.width} {self.data.dtype}, "
            f"origin=({self.transform[0]}, {self.transform[3]}), "
            f"pixel=({self.transform[1]}, {self.transform[5]}), crs={self.crs!r}, "
            f"nodata={self.nodata})"
        )


def rasters_equal(a: GeoRaster, b: GeoRaster) -> bool:
    """Pixel-, georeference- and nodata-exact equality."""
    return (
        a.data.shape == b.data.shape
        and a.data.dtype == b.data.dtype
        and np.array_equal(a.data, b.data)
        and a.transform == b.transform
        and a.crs == b.crs
        and a.nodata == b.nodata
    )


def check_compatible(a: GeoRaster, b: GeoRaster, what: str = "rasters") -> None:
    """Raise RasterMismatchError unless a and b share shape, dtype and georeferencing."""
    if a.data.shape != b.data.shape:
        raise RasterMismatchError(f"{what} differ in shape: {a.data.shape} vs {b.data.shape}")
    if a.data.dtype != b.data.dtype:
        raise RasterMismatchError(f"{what} differ in sample type: {a.data.dtype} vs {b.data.dtype}")
    if a.transform != b.transform:
        raise RasterMismatchError(f"{what} differ in geotransform: {a.transform} vs {b.transform}")
    if a.crs != b.crs:
        raise RasterMismatchError(f"{what} differ in CRS: {a.crs!r} vs {b.crs!r}")


def pad_to_multiple(raster: GeoRaster, tile_size: int) -> GeoRaster:
    """Zero-pad on the right and bottom so both dimensions are multiples of tile_size.

    The origin is unchanged and original pixels are untouched. Identity when
    the raster already fits the grid. Padding value is 0 in every band, which
    the ground-truth stage treats as the background class.
    """
    if tile_size < 1:
        raise ValueError(f"tile size must be >= 1, got {tile_size}")
    new_w = math.ceil(raster.width / tile_size) * tile_size
    new_h = math.ceil(raster.height / tile_size) * tile_size
    if new_w == raster.width and new_h == raster.height:
        return raster
    padded = np.pad(
        raster.data,
        ((0, 0), (0, new_h - raster.height), (0, new_w - raster.width)),
        mode="constant",
        constant_values=0,
    )
    return GeoRaster(padded, raster.transform, raster.crs, raster.nodata)


@dataclass(frozen=True)
class TileSet:
    """A raster decomposed into a row-major grid of equal square tiles.

    source_width/source_height record the pre-padding dimensions so a merge
    can crop back to the original extent; they default to the padded grid
    extent when the original size is unknown (e.g. tiles read from disk).
    """

    tile_size: int
    grid_cols: int
    grid_rows: int
    tiles: tuple[GeoRaster, ...]
    source_width: int
    source_height: int
    transform: GeoTransform
    crs: str = ""
    nodata: float | None = field(default=None)

    def __post_init__(self) -> None:
        ts = self.tile_size
        if ts < 1:
            raise TileGridError(f"tile size must be >= 1, got {ts}")
        if self.grid_cols != math.ceil(self.source_width / ts):
            raise TileGridError(
                f"grid_cols {self.grid_cols} != ceil({self.source_width}/{ts})"
            )
        if self.grid_rows != math.ceil(self.source_height / ts):
            raise TileGridError(
                f"grid_rows {self.grid_rows} != ceil({self.source_height}/{ts})"
            )
        if len(self.tiles) != self.grid_cols * self.grid_rows:
            raise TileGridError(
                f"expected {self.grid_cols * self.grid_rows} tiles, got {len(self.tiles)}"
            )
        object.__setattr__(self, "tiles", tuple(self.tiles))
        object.__setattr__(self, "transform", tuple(float(v) for v in self.transform))
        ox, pw, _, oy, _, ph = self.transform
        for idx, tile in enumerate(self.tiles):
            row, col = divmod(idx, self.grid_cols)
            if tile.width != ts or tile.height != ts:
                raise TileGridError(
                    f"tile ({row},{col}) is {tile.width}x{tile.height}, expected {ts}x{ts}"
                )
            # Exact arithmetic: the tile origin must be the source origin
            # advanced by a whole number of tiles.
            want_x = ox + (col * ts) * pw
            want_y = oy + (row * ts) * ph
            if tile.transform[0] != want_x or tile.transform[3] != want_y:
                raise TileGridError(
                    f"tile ({row},{col}) origin {tile.transform[0], tile.transform[3]} "
                    f"!= expected {(want_x, want_y)}"
                )

    @property
    def count(self) -> int:
        return len(self.tiles)

    def tile(self, row: int, col: int) -> GeoRaster:
        if not (0 <= row < self.grid_rows and 0 <= col < self.grid_cols):
            raise IndexError(f"tile ({row},{col}) outside {self.grid_rows}x{self.grid_cols} grid")
        return self.tiles[row * self.grid_cols + col]


def split_tiles(raster: GeoRaster, tile_size: int, source_size: tuple[int, int] | None = None) -> TileSet:
    """Split a raster whose dimensions are multiples of tile_size into a row-major TileSet.

    source_size is the (width, height) before padding, recorded for later
    cropping; defaults to the raster's own dimensions.
    """
    if tile_size < 1:
        raise TileGridError(f"tile size must be >= 1, got {tile_size}")
    if raster.width % tile_size or raster.height % tile_size:
        raise TileGridError(
            f"raster {raster.width}x{raster.height} is not a multiple of {tile_size}; "
            f"pad_to_multiple first"
        )
    src_w, src_h = source_size if source_size is not None else (raster.width, raster.height)
    if math.ceil(src_w / tile_size) * tile_size != raster.width or \
            math.ceil(src_h / tile_size) * tile_size != raster.height:
        raise TileGridError(
            f"source size {src_w}x{src_h} does not pad to {raster.width}x{raster.height}"
        )
    cols = raster.width // tile_size
    rows = raster.height // tile_size
    ox, pw, _, oy, _, ph = raster.transform
    tiles = []
    for row in range(rows):
        for col in range(cols):
            block = raster.data[
                :,
                row * tile_size : (row + 1) * tile_size,
                col * tile_size : (col + 1) * tile_size,
            ].copy()
            gt = (ox + (col * tile_size) * pw, pw, 0.0, oy + (row * tile_size) * ph, 0.0, ph)
            tiles.append(GeoRaster(block, gt, raster.crs, raster.nodata))
    return TileSet(
        tile_size=tile_size,
        grid_cols=cols,
        grid_rows=rows,
        tiles=tuple(tiles),
        source_width=src_w,
        source_height=src_h,
        transform=raster.transform,
        crs=raster.crs,
        nodata=raster.nodata,
    )


def merge_tiles(tileset: TileSet, crop_to_source: bool = False) -> GeoRaster:
    """Reassemble a TileSet into one raster with the source georeferencing.

    Output dimensions are the padded grid extent; pass crop_to_source=True to
    crop back to the recorded pre-padding size.
    """
    ts = tileset.tile_size
    first = tileset.tiles[0]
    for idx, tile in enumerate(tileset.tiles):
        if tile.data.dtype != first.data.dtype or tile.bands != first.bands:
            row, col = divmod(idx, tileset.grid_cols)
            raise TileGridError(
                f"tile ({row},{col}) has dtype/bands {tile.data.dtype}/{tile.bands}, "
                f"expected {first.data.dtype}/{first.bands}"
            )
    out = np.zeros(
        (first.bands, tileset.grid_rows * ts, tileset.grid_cols * ts),
        dtype=first.data.dtype,
    )
    for idx, tile in enumerate(tileset.tiles):
        row, col = divmod(idx, tileset.grid_cols)
        out[:, row * ts : (row + 1) * ts, col * ts : (col + 1) * ts] = tile.data
    if crop_to_source:
        out = out[:, : tileset.source_height, : tileset.source_width].copy()
    return GeoRaster(out, tileset.transform, tileset.crs, tileset.nodata)


def tile_raster(raster: GeoRaster, tile_size: int) -> TileSet:
    """pad_to_multiple followed by split_tiles, keeping the original size on record."""
    padded = pad_to_multiple(raster, tile_size)
    return split_tiles(padded, tile_size, source_size=(raster.width, raster.height))


def write_tiles(tileset: TileSet, outdir: str | Path, stem: str) -> list[Path]:
    """Write every tile as {stem}_rRRR_cCCC.tif under outdir; returns the paths."""
    from .geotiff import write_geotiff

    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    paths = []
    for idx, tile in enumerate(tileset.tiles):
        row, col = divmod(idx, tileset.grid_cols)
        path = outdir / tile_filename(stem, row, col)
        write_geotiff(tile, path)
        paths.append(path)
    return paths


def scan_tile_files(directory: str | Path, stem: str | None = None) -> dict[tuple[int, int], Path]:
    """Map (row, col) -> path for tile files in a directory, filtered to one stem.

    With stem=None the directory must contain exactly one stem.
    """
    directory = Path(directory)
    if not directory.is_dir():
        raise FileNotFoundError(f"tile directory not found: {directory}")
    matches = []
    stems = set()
    for path in sorted(directory.iterdir()):
        m = TILE_NAME_RE.match(path.name)
        if not m:
            continue
        if stem is not None and m.group("stem") != stem:
            continue
        stems.add(m.group("stem"))
        matches.append((int(m.group("row")), int(m.group("col")), path))
    if not matches:
        raise TileGridError(f"no tile files matching convention in {directory}"
                            + (f" for stem {stem!r}" if stem else ""))
    if len(stems) > 1:
        raise TileGridError(
            f"multiple tile stems in {directory}: {sorted(stems)}; pass an explicit stem"
        )
    found: dict[tuple[int, int], Path] = {}
    for row, col, path in matches:
        key = (row, col)
        if key in found:
            raise TileGridError(f"duplicate tile position {key}: {path} and {found[key]}")
        found[key] = path
    return found


def read_tiles(directory: str | Path, stem: str | None = None) -> TileSet:
    """Read a complete tile grid from disk back into a TileSet.

    The grid shape is inferred from the largest row/col present; every
    position must exist. Pre-padding source dimensions are not recoverable
    from tile files, so source size is recorded as the grid extent.
    """
    from .geotiff import read_geotiff

    found = scan_tile_files(directory, stem)
    rows = 1 + max(k[0] for k in found)
    cols = 1 + max(k[1] for k in found)
    tiles = []
    for row in range(rows):
        for col in range(cols):
            path = found.get((row, col))
            if path is None:
                raise TileGridError(f"missing tile ({row},{col}) in {directory}")
            tiles.append(read_geotiff(path))
    first = tiles[0]
    if first.width != first.height:
        raise TileGridError(f"tiles must be square, got {first.width}x{first.height}")
    return TileSet(
        tile_size=first.width,
        grid_cols=cols,
        grid_rows=rows,
        tiles=tuple(tiles),
        source_width=cols * first.width,
        source_height=rows * first.height,
        transform=first.transform,
        crs=first.crs,
        nodata=first.nodata,
    )
