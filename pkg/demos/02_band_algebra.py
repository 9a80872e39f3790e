"""Band math walkthrough: NDVI, display composites and two-date differences.

Run with: python3 demos/02_band_algebra.py
"""

import tempfile
from pathlib import Path

import numpy as np

from cropsight import (
    compose,
    compute_ndvi,
    generate_scene,
    hailstorm_spec,
    temporal_difference,
    write_geotiff,
)

out = Path(tempfile.mkdtemp(prefix="cropsight-demo2-"))

# Two-date synthetic scene: "before" is healthy vegetation, "after" has six
# sharp loss patches planted in it. Bands are stored blue, green, red, NIR
# (indices 0..3) as reflectance x 10000, like the satellite product.
before, after, expected = generate_scene(hailstorm_spec(384, 256, seed=3))
print(f"before: {before}")

# NDVI = (NIR - red) / (NIR + red). A healthy canopy sits near 0.7; the
# planted damage pulls it down. Invalid pixels get the -9999 nodata marker.
ndvi_before = compute_ndvi(before)
ndvi_after = compute_ndvi(after)
valid = ndvi_before.data != ndvi_before.nodata
print(f"NDVI before: mean {ndvi_before.data[valid].mean():.3f}")
print(f"NDVI after:  mean {ndvi_after.data[ndvi_after.data != ndvi_after.nodata].mean():.3f}")

# The float difference (before - after) is what the threshold rule consumes:
# positive values mean vegetation loss.
drop = temporal_difference(ndvi_before, ndvi_after)
real = drop.data[drop.data != drop.nodata]
print(f"NDVI drop: max {real.max():.2f}, share above 0.33: {(real >= 0.33).mean():.1%}")

# Display composites rescale reflectance 0..0.3 into 8-bit. "rgb" is natural
# color; "fci" swaps NIR into the red channel so vegetation glows red.
write_geotiff(compose(before, "rgb"), out / "before_rgb.tif")
write_geotiff(compose(after, "rgb"), out / "after_rgb.tif")
fci = compose(after, "fci")
write_geotiff(fci, out / "after_fci.tif")
print(f"composite: {fci.bands} bands {fci.data.dtype}, range "
      f"{fci.data.min()}..{fci.data.max()}")

# Differencing two composites keeps uint8 by centering at 128: identical
# pixels read 128, brightening reads above, darkening below.
rgb_diff = temporal_difference(compose(before, "rgb"), compose(after, "rgb"))
write_geotiff(rgb_diff, out / "rgb_diff.tif")
changed = (rgb_diff.data != 128).any(axis=0)
print(f"composite diff: {changed.mean():.1%} of pixels moved off neutral 128")
print(f"outputs in {out}")
