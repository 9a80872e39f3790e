"""Tiling walkthrough: pad a scene, split it, write tiles, read them back, merge.

Run with: python3 demos/01_tiles_and_mosaics.py
"""

import tempfile
from pathlib import Path

import numpy as np

from cropsight import (
    GeoRaster,
    merge_tiles,
    pad_to_multiple,
    rasters_equal,
    read_tiles,
    split_tiles,
    tile_raster,
    write_tiles,
)

out = Path(tempfile.mkdtemp(prefix="cropsight-demo1-"))

# A small uint8 scene with a north-up geotransform: 10 m pixels anchored at
# (500000, 2700000) in UTM 46N. Negative pixel height means row 0 is north.
rng = np.random.default_rng(7)
scene = GeoRaster(
    data=rng.integers(0, 255, (3, 530, 710), dtype=np.uint8),
    transform=(500000.0, 10.0, 0.0, 2700000.0, 0.0, -10.0),
    crs="EPSG:32646",
)
print(f"scene: {scene}")

# 530x710 is not a multiple of 256, so pad first. Padding extends south/east
# with zeros and keeps the origin, so every original pixel keeps its location.
padded = pad_to_multiple(scene, 256)
print(f"padded: {padded.width}x{padded.height}")

tiles = split_tiles(padded, 256, source_size=(scene.width, scene.height))
print(f"grid: {tiles.grid_rows} rows x {tiles.grid_cols} cols = {tiles.count} tiles")

# Each tile is itself a GeoRaster whose origin sits at its grid position.
corner = tiles.tile(1, 2)
print(f"tile (1,2) origin: {corner.transform[0]}, {corner.transform[3]}")

# Round trip through a directory of individually georeferenced GeoTIFFs.
paths = write_tiles(tiles, out, stem="demo")
print(f"wrote {len(paths)} files like {paths[0].name}")
back = read_tiles(out, "demo")
mosaic = merge_tiles(back, crop_to_source=False)

# Merging without cropping returns the padded extent. tile_raster is the
# one-call version of pad + split that remembers the pre-padding size, so the
# merge can crop back to the exact original scene.
recovered = merge_tiles(tile_raster(scene, 256), crop_to_source=True)
print(f"mosaic (padded extent): {mosaic.width}x{mosaic.height}")
print(f"recovered == original:  {rasters_equal(recovered, scene)}")

# The arithmetic scales: a full 8987x7108 scene pads to 9216x7168 and yields
# exactly 36 x 28 = 1008 tiles.
big = GeoRaster(np.zeros((1, 7108, 8987), np.uint8), scene.transform, scene.crs)
big_tiles = tile_raster(big, 256)
print(f"full scene: {big_tiles.count} tiles "
      f"({big_tiles.grid_cols} x {big_tiles.grid_rows})")
print(f"outputs in {out}")
