"""Manifest construction, split policies, and CSV round trips."""

from pathlib import Path

import numpy as np
import pytest

from conftest import PLAIN_TRANSFORM
from cropsight import (
    GeoRaster,
    ManifestEntry,
    ManifestError,
    SplitPolicy,
    build_manifest,
    read_manifest,
    split_summary,
    write_geotiff,
    write_manifest,
)
from cropsight.raster import tile_filename


def _entry(district, role, i=0):
    return ManifestEntry(
        input=Path(f"in/{district}/2022/{district}_r000_c{i:03d}.tif"),
        mask=Path(f"mask/{district}/2022/{district}_r000_c{i:03d}.tif"),
        district=district,
        year=2022,
        row=0,
        col=i,
        role=role,
    )


def _tile_raster(value, transform=PLAIN_TRANSFORM):
    return GeoRaster(np.full((1, 8, 8), value, np.uint8), transform, "EPSG:32646")


def _make_tree(root, layout, transform=PLAIN_TRANSFORM):
    """layout: {district: {year: [(row, col), ...]}} -> writes inputs and masks trees."""
    for kind in ("inputs", "masks"):
        for district, years in layout.items():
            for year, cells in years.items():
                d = root / kind / district / str(year)
                d.mkdir(parents=True, exist_ok=True)
                for row, col in cells:
                    write_geotiff(_tile_raster(1, transform), d / tile_filename(f"{district}{year}", row, col))
    return root / "inputs", root / "masks"


class TestSplitPolicy:
    def test_unknown_role_rejected(self):
        with pytest.raises(ManifestError, match="unknown role"):
            SplitPolicy({"a": "practice"})

    def test_unknown_district_rejected(self):
        policy = SplitPolicy({"a": "train"})
        with pytest.raises(ManifestError, match="not covered"):
            policy.role_for("b")

    def test_check_complete_requires_all_roles(self):
        with pytest.raises(ManifestError, match="validation"):
            SplitPolicy({"a": "train", "b": "test"}).check_complete()
        SplitPolicy({"a": "train", "b": "test", "c": "validation"}).check_complete()


class TestSplitSummary:
    def test_corpus_shaped_percentages(self):
        entries = (
            [_entry("sunamganj", "train", i) for i in range(3024)]
            + [_entry("netrokona", "validation", i) for i in range(2772)]
            + [_entry("kisorganj", "test", i) for i in range(2430)]
        )
        summary = split_summary(entries)
        assert summary["total"] == 8226
        roles = summary["roles"]
        assert roles["train"]["count"] == 3024
        assert abs(roles["train"]["percent"] - 36.76) <= 0.01
        assert abs(roles["validation"]["percent"] - 33.70) <= 0.01
        assert abs(roles["test"]["percent"] - 29.54) <= 0.01

    def test_single_district_all_train(self):
        entries = [_entry("solo", "train", i) for i in range(7)]
        summary = split_summary(entries)
        assert summary["roles"]["train"]["percent"] == 100.0
        assert summary["roles"]["validation"]["count"] == 0
        assert summary["roles"]["test"]["count"] == 0


class TestBuildManifest:
    def test_pairs_and_roles(self, tmp_path):
        layout = {
            "alfa": {2022: [(0, 0), (0, 1)]},
            "bravo": {2022: [(0, 0)], 2023: [(0, 0)]},
            "chai": {2022: [(0, 0)]},
        }
        inputs, masks = _make_tree(tmp_path, layout)
        policy = SplitPolicy({"alfa": "train", "bravo": "validation", "chai": "test"})
        entries = build_manifest(inputs, masks, policy)
        assert len(entries) == 5
        assert [e.role for e in entries if e.district == "bravo"] == ["validation"] * 2
        years = sorted(e.year for e in entries if e.district == "bravo")
        assert years == [2022, 2023]
        for e in entries:
            assert e.input.name == e.mask.name

    def test_missing_mask_names_offender(self, tmp_path):
        inputs, masks = _make_tree(tmp_path, {"alfa": {2022: [(0, 0), (0, 1)]}})
        victim = masks / "alfa" / "2022" / tile_filename("alfa2022", 0, 1)
        victim.unlink()
        with pytest.raises(ManifestError, match="unpaired input.*alfa2022_r000_c001"):
            build_manifest(inputs, masks, SplitPolicy({"alfa": "train"}))

    def test_orphan_mask_rejected(self, tmp_path):
        inputs, masks = _make_tree(tmp_path, {"alfa": {2022: [(0, 0)]}})
        extra = masks / "alfa" / "2022" / tile_filename("alfa2022", 5, 5)
        write_geotiff(_tile_raster(1), extra)
        with pytest.raises(ManifestError, match="unpaired mask"):
            build_manifest(inputs, masks, SplitPolicy({"alfa": "train"}))

    def test_georeference_mismatch_detected(self, tmp_path):
        inputs, masks = _make_tree(tmp_path, {"alfa": {2022: [(0, 0)]}})
        other = (400000.0, 10.0, 0.0, 2600000.0, 0.0, -10.0)
        write_geotiff(_tile_raster(1, other), masks / "alfa" / "2022" / tile_filename("alfa2022", 0, 0))
        with pytest.raises(ManifestError, match="georeference mismatch"):
            build_manifest(inputs, masks, SplitPolicy({"alfa": "train"}))
        entries = build_manifest(inputs, masks, SplitPolicy({"alfa": "train"}), verify_georeference=False)
        assert len(entries) == 1

    def test_missing_inputs_root(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            build_manifest(tmp_path / "none", tmp_path, SplitPolicy({"a": "train"}))

    def test_empty_inputs_tree(self, tmp_path):
        (tmp_path / "inputs").mkdir()
        (tmp_path / "masks").mkdir()
        with pytest.raises(ManifestError, match="no input tiles"):
            build_manifest(tmp_path / "inputs", tmp_path / "masks", SplitPolicy({"a": "train"}))

    def test_non_integer_year_directory(self, tmp_path):
        d = tmp_path / "inputs" / "alfa" / "spring"
        d.mkdir(parents=True)
        write_geotiff(_tile_raster(1), d / tile_filename("x", 0, 0))
        (tmp_path / "masks").mkdir()
        with pytest.raises(ManifestError, match="year directory"):
            build_manifest(tmp_path / "inputs", tmp_path / "masks", SplitPolicy({"alfa": "train"}))

    def test_duplicate_grid_position_rejected(self, tmp_path):
        d = tmp_path / "inputs" / "alfa" / "2022"
        d.mkdir(parents=True)
        write_geotiff(_tile_raster(1), d / tile_filename("one", 0, 0))
        write_geotiff(_tile_raster(1), d / tile_filename("two", 0, 0))
        (tmp_path / "masks").mkdir()
        with pytest.raises(ManifestError, match="duplicate tile position"):
            build_manifest(tmp_path / "inputs", tmp_path / "masks", SplitPolicy({"alfa": "train"}))


class TestManifestCsv:
    def test_round_trip(self, tmp_path):
        entries = [
            _entry("alfa", "train", 0),
            _entry("alfa", "train", 1),
            _entry("bravo", "validation", 0),
            _entry("chai", "test", 0),
        ]
        p = tmp_path / "manifest.csv"
        write_manifest(entries, p)
        assert read_manifest(p) == entries

    def test_empty_manifest_is_header_only(self, tmp_path):
        p = tmp_path / "manifest.csv"
        write_manifest([], p)
        assert p.read_text().strip() == "input,mask,district,year,row,col,role"
        assert read_manifest(p) == []

    def test_nine_entries_three_districts_role_counts(self, tmp_path):
        policy = {"a": "train", "b": "validation", "c": "test"}
        entries = [_entry(d, policy[d], i) for d in "abc" for i in range(3)]
        p = tmp_path / "manifest.csv"
        write_manifest(entries, p)
        back = read_manifest(p)
        counts = {}
        for e in back:
            counts[e.role] = counts.get(e.role, 0) + 1
        assert counts == {"train": 3, "validation": 3, "test": 3}

    def test_wrong_header_rejected(self, tmp_path):
        p = tmp_path / "bad.csv"
        p.write_text("a,b,c\n1,2,3\n")
        with pytest.raises(ManifestError, match="header"):
            read_manifest(p)

    def test_malformed_row_rejected(self, tmp_path):
        p = tmp_path / "bad.csv"
        p.write_text("input,mask,district,year,row,col,role\nx.tif,y.tif,d,notayear,0,0,train\n")
        with pytest.raises(ManifestError):
            read_manifest(p)

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            read_manifest(tmp_path / "none.csv")
