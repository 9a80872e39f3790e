from pathlib import Path

import numpy as np
import pytest
import torch

from cropsight import DEFAULT_CLASSES, GeoRaster, ManifestEntry, render_mask, write_geotiff

from croptrainer import TileDataset, TrainingError, load_entries
from croptrainer.data import _shift

TRANSFORM = (500000.0, 10.0, 0.0, 6000000.0, 0.0, -10.0)


def _make_pair(tmp_path: Path, tile_shape=(3, 32, 32), mask_side=32) -> ManifestEntry:
    rng = np.random.default_rng(7)
    tile = GeoRaster(rng.integers(0, 256, tile_shape, dtype=np.uint8), TRANSFORM, "EPSG:32633")
    mask_idx = rng.integers(0, 3, (1, mask_side, mask_side)).astype(np.uint8)
    mask = render_mask(GeoRaster(mask_idx, TRANSFORM, "EPSG:32633"), DEFAULT_CLASSES)
    tile_path = tmp_path / "pair_r000_c000.tif"
    mask_path = tmp_path / "mask_r000_c000.tif"
    write_geotiff(tile, tile_path)
    write_geotiff(mask, mask_path)
    return ManifestEntry(
        input=tile_path, mask=mask_path, district="solo", year=2021, row=0, col=0, role="train"
    )


class TestCorpusLoading:
    def test_load_entries_filters_by_role(self, corpus):
        everything = load_entries(corpus.manifest)
        train = load_entries(corpus.manifest, "train")
        val = load_entries(corpus.manifest, "validation")
        test = load_entries(corpus.manifest, "test")
        assert len(everything) == 200
        assert (len(train), len(val), len(test)) == (72, 64, 64)
        assert all(e.role == "train" for e in train)

    def test_sample_tensor_contract(self, corpus):
        ds = TileDataset(load_entries(corpus.manifest, "train"))
        x, y = ds[0]
        assert x.dtype == torch.float32
        assert y.dtype == torch.int64
        assert x.shape == (3, corpus.tile_size, corpus.tile_size)
        assert y.shape == (corpus.tile_size, corpus.tile_size)
        assert 0.0 <= float(x.min()) and float(x.max()) <= 1.0
        assert set(torch.unique(y).tolist()) <= {0, 1, 2}

    def test_dataset_length(self, corpus):
        ds = TileDataset(load_entries(corpus.manifest, "validation"))
        assert len(ds) == 64


class TestAugmentation:
    def test_shapes_and_classes_preserved(self, corpus):
        entries = load_entries(corpus.manifest, "train")
        ds = TileDataset(entries, augment=True, max_shift=8)
        torch.manual_seed(11)
        for i in range(8):
            x, y = ds[i]
            assert x.shape == (3, corpus.tile_size, corpus.tile_size)
            assert y.shape == (corpus.tile_size, corpus.tile_size)
            assert set(torch.unique(y).tolist()) <= {0, 1, 2}

    def test_flip_and_rotation_keep_histogram(self, corpus):
        # mirrors and 90-degree turns rearrange pixels without inventing any
        entries = load_entries(corpus.manifest, "train")[:1]
        plain = TileDataset(entries)
        moved = TileDataset(entries, augment=True, flip_prob=1.0, rotate=True, max_shift=0)
        _, y0 = plain[0]
        torch.manual_seed(0)
        _, y1 = moved[0]
        assert torch.equal(torch.bincount(y0.flatten(), minlength=3),
                           torch.bincount(y1.flatten(), minlength=3))

    def test_shift_translates_with_zero_fill(self):
        plane = torch.arange(16, dtype=torch.float32).reshape(4, 4)
        down_right = _shift(plane, 1, 1)
        assert torch.equal(down_right[1:, 1:], plane[:3, :3])
        assert float(down_right[0].sum()) == 0.0
        assert float(down_right[:, 0].sum()) == 0.0
        up_left = _shift(plane, -2, -1)
        assert torch.equal(up_left[:2, :3], plane[2:, 1:])
        assert float(up_left[2:].sum()) == 0.0

    def test_shift_matches_on_multiband(self):
        x = torch.randn(3, 8, 8)
        out = _shift(x, 2, -3)
        for band in range(3):
            assert torch.equal(out[band], _shift(x[band], 2, -3))


class TestErrorContract:
    def test_empty_dataset_raises(self):
        with pytest.raises(TrainingError, match="no entries"):
            TileDataset([])

    def test_shape_mismatch_names_the_tile(self, tmp_path):
        entry = _make_pair(tmp_path, tile_shape=(3, 32, 32), mask_side=16)
        ds = TileDataset([entry])
        with pytest.raises(TrainingError, match="tile/mask shape mismatch for pair_r000_c000.tif"):
            ds[0]

    def test_matching_pair_loads(self, tmp_path):
        entry = _make_pair(tmp_path)
        x, y = TileDataset([entry])[0]
        assert x.shape == (3, 32, 32)
        assert y.shape == (32, 32)
