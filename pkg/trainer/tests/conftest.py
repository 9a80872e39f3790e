"""Shared fixtures: a small synthetic tile corpus with all three split roles.

Three single-scene districts are generated, composited into 8-bit temporal
difference images, tiled at 64 px and paired with rendered ground-truth
masks, then frozen into one manifest. Scene dimensions are exact multiples
of the tile size so no padding rows sneak into the training data.
"""

from dataclasses import dataclass
from pathlib import Path

import pytest

from cropsight import (
    DEFAULT_CLASSES,
    DEFAULT_THRESHOLD,
    SplitPolicy,
    build_manifest,
    compose,
    generate_scene,
    hailstorm_spec,
    render_mask,
    temporal_difference,
    tile_raster,
    write_manifest,
    write_tiles,
)

TILE_SIZE = 64

# (district, role, width, height, seed) -> 72 + 64 + 64 = 200 tiles
DISTRICTS = (
    ("alfa", "train", 576, 512, 3),
    ("bravo", "validation", 512, 512, 4),
    ("chai", "test", 512, 512, 5),
)


@dataclass(frozen=True)
class Corpus:
    root: Path
    manifest: Path
    inputs_root: Path
    masks_root: Path
    tile_size: int


def _build_district(name: str, width: int, height: int, seed: int, inputs_root: Path, masks_root: Path) -> None:
    spec = hailstorm_spec(width, height, seed=seed, district=name, noise=0.01)
    before, after, expected = generate_scene(spec, DEFAULT_THRESHOLD)
    diff = temporal_difference(compose(before, "rgb"), compose(after, "rgb"))
    rendered = render_mask(expected, DEFAULT_CLASSES)
    stem = f"{name}2021"
    write_tiles(tile_raster(diff, TILE_SIZE), inputs_root / name / "2021", stem)
    write_tiles(tile_raster(rendered, TILE_SIZE), masks_root / name / "2021", stem)


@pytest.fixture(scope="session")
def corpus(tmp_path_factory) -> Corpus:
    root = tmp_path_factory.mktemp("corpus")
    inputs_root = root / "inputs"
    masks_root = root / "masks"
    for name, _, width, height, seed in DISTRICTS:
        _build_district(name, width, height, seed, inputs_root, masks_root)
    policy = SplitPolicy({name: role for name, role, *_ in DISTRICTS})
    entries = build_manifest(inputs_root, masks_root, policy)
    manifest = root / "manifest.csv"
    write_manifest(entries, manifest)
    return Corpus(
        root=root,
        manifest=manifest,
        inputs_root=inputs_root,
        masks_root=masks_root,
        tile_size=TILE_SIZE,
    )
