"""Command-line behavior: chains, exit codes, config precedence, determinism."""

import hashlib
import json
import subprocess
import sys

import numpy as np
import pytest

from conftest import PLAIN_TRANSFORM
from cropsight import (
    CLASS_LOSS,
    CLASS_OK,
    GeoRaster,
    LossRegion,
    SceneSpec,
    hailstorm_spec,
    read_geotiff,
    save_scene_spec,
    write_geotiff,
)
from cropsight.cli import main


@pytest.fixture(autouse=True)
def _clean_env(monkeypatch):
    monkeypatch.delenv("CROPSIGHT_CONFIG", raising=False)


def run(*argv):
    return main([str(a) for a in argv])


def write_diff_pixel(path, value):
    r = GeoRaster(np.full((1, 1, 1), value, np.float32), PLAIN_TRANSFORM, "EPSG:32646", -9999.0)
    write_geotiff(r, path)


class TestFullChain:
    def test_synth_to_evaluation_identity(self, tmp_path, capsys):
        spec_path = tmp_path / "scene.json"
        save_scene_spec(hailstorm_spec(96, 64, seed=21, border=4), spec_path)
        scene = tmp_path / "scene"
        assert run("synth", spec_path, scene) == 0
        assert run("ndvi", scene / "before.tif", tmp_path / "nb.tif") == 0
        assert run("ndvi", scene / "after.tif", tmp_path / "na.tif") == 0
        assert run("diff", tmp_path / "nb.tif", tmp_path / "na.tif", tmp_path / "nd.tif") == 0
        assert run("groundtruth", tmp_path / "nd.tif", tmp_path / "gt.tif") == 0
        capsys.readouterr()
        assert run("evaluate", tmp_path / "gt.tif", scene / "expected_mask.tif", "--json") == 0
        reports = json.loads(capsys.readouterr().out)
        classes = reports[0]["classes"]
        assert classes["crop-compromised"]["iou"] == 1.0
        assert reports[0]["mean_iou"] == 1.0

    def test_rendered_and_index_masks_evaluate_alike(self, tmp_path, capsys):
        spec_path = tmp_path / "scene.json"
        save_scene_spec(hailstorm_spec(64, 64, seed=3), spec_path)
        scene = tmp_path / "scene"
        run("synth", spec_path, scene)
        capsys.readouterr()
        assert run("evaluate", scene / "expected_rendered.tif", scene / "expected_mask.tif") == 0
        out = capsys.readouterr().out
        assert "micro IoU = 1.0000" in out

    def test_evaluate_identical_inputs_all_ones(self, tmp_path, capsys):
        write_diff_pixel(tmp_path / "d.tif", 0.5)
        run("groundtruth", tmp_path / "d.tif", tmp_path / "m.tif")
        capsys.readouterr()
        assert run("evaluate", tmp_path / "m.tif", tmp_path / "m.tif", "--json") == 0
        rep = json.loads(capsys.readouterr().out)[0]
        assert rep["micro_iou"] == 1.0 and rep["dice"] == 1.0


class TestTileMergeScale:
    def test_corpus_scale_tile_run(self, tmp_path):
        """The full-scene shape: 8987x7108 splits into exactly 1008 tiles of 256."""
        data = np.zeros((1, 7108, 8987), dtype=np.uint8)
        data[0, 700:2300, 1200:4700] = 77
        data[0, 5000:7000, 6000:8900] = 154
        src = tmp_path / "scene.tif"
        write_geotiff(GeoRaster(data, PLAIN_TRANSFORM, "EPSG:32646"), src)

        tiles_a = tmp_path / "tiles_a"
        assert run("tile", src, tiles_a, "--stem", "scene") == 0
        files_a = sorted(tiles_a.glob("*.tif"))
        assert len(files_a) == 1008
        assert files_a[0].name == "scene_r000_c000.tif"
        assert files_a[-1].name == "scene_r027_c035.tif"

        # same inputs -> byte-identical outputs
        tiles_b = tmp_path / "tiles_b"
        assert run("tile", src, tiles_b, "--stem", "scene") == 0
        digest = lambda p: hashlib.md5(p.read_bytes()).hexdigest()
        assert {p.name: digest(p) for p in files_a} == {
            p.name: digest(p) for p in sorted(tiles_b.glob("*.tif"))
        }

        merged = tmp_path / "merged.tif"
        assert run("merge", tiles_a, merged, "--crop", "8987x7108") == 0
        back = read_geotiff(merged)
        assert (back.width, back.height) == (8987, 7108)
        assert np.array_equal(back.data, data)
        assert back.transform == PLAIN_TRANSFORM

    def test_small_tile_merge_with_stem_choice(self, tmp_path, rng):
        r = GeoRaster(rng.integers(0, 256, (3, 50, 70), np.uint8), PLAIN_TRANSFORM, "EPSG:32646")
        src = tmp_path / "x.tif"
        write_geotiff(r, src)
        tiles = tmp_path / "tiles"
        assert run("tile", src, tiles, "--size", 32, "--stem", "a") == 0
        assert run("tile", src, tiles, "--size", 32, "--stem", "b") == 0
        assert run("merge", tiles, tmp_path / "m.tif", "--stem", "a", "--crop", "70x50") == 0
        merged = read_geotiff(tmp_path / "m.tif")
        assert np.array_equal(merged.data, r.data)


class TestManifestAndEvaluate:
    @pytest.fixture()
    def corpus(self, tmp_path):
        """Three 1-district scenes tiled into inputs/ and masks/ trees."""
        districts = {"alfa": "train", "bravo": "validation", "chai": "test"}
        for i, district in enumerate(districts):
            spec = SceneSpec(
                width=64,
                height=64,
                district=district,
                loss_regions=(LossRegion("rect", 8 + i, 8, 20, 20, drop=0.5),),
                seed=40 + i,
            )
            save_scene_spec(spec, tmp_path / f"{district}.json")
            scene = tmp_path / district
            run("synth", tmp_path / f"{district}.json", scene)
            run("ndvi", scene / "before.tif", scene / "nb.tif")
            run("ndvi", scene / "after.tif", scene / "na.tif")
            run("diff", scene / "nb.tif", scene / "na.tif", scene / "nd.tif")
            run("compose", "--kind", "rgb", scene / "before.tif", scene / "rb.tif")
            run("compose", "--kind", "rgb", scene / "after.tif", scene / "ra.tif")
            run("diff", scene / "rb.tif", scene / "ra.tif", scene / "rgbdiff.tif")
            run("tile", scene / "rgbdiff.tif", tmp_path / "inputs" / district / "2022",
                "--size", 32, "--stem", f"{district}2022")
            run("groundtruth", scene / "nd.tif", scene / "gt.tif")
            run("render", scene / "gt.tif", scene / "gt_rgb.tif")
            run("tile", scene / "gt_rgb.tif", tmp_path / "masks" / district / "2022",
                "--size", 32, "--stem", f"{district}2022")
        layout = tmp_path / "layout.json"
        layout.write_text(json.dumps({
            "inputs": str(tmp_path / "inputs"),
            "masks": str(tmp_path / "masks"),
            "policy": districts,
        }))
        return tmp_path, layout

    def test_manifest_summary_and_grouped_evaluation(self, corpus, capsys):
        tmp_path, layout = corpus
        manifest = tmp_path / "manifest.csv"
        assert run("manifest", layout, manifest, "--json") == 0
        lines = capsys.readouterr().out.splitlines()
        assert lines[-1] == f"wrote {manifest}"
        summary = json.loads("\n".join(lines[:-1]))
        assert summary["total"] == 12
        assert summary["roles"]["test"]["count"] == 4
        assert run("manifest", layout, manifest) == 0
        text = capsys.readouterr().out
        assert "total 12" in text and "test" in text

        # predictions = the ground-truth tiles themselves -> perfect scores
        pred_dir = tmp_path / "masks" / "chai" / "2022"
        assert run(
            "evaluate", manifest, "--pred-dir", pred_dir,
            "--group-by", "year", "--json", "--csv", tmp_path / "report.csv",
        ) == 0
        reports = json.loads(capsys.readouterr().out)
        assert [r["group"] for r in reports] == ["2022", "overall"]
        assert reports[-1]["micro_iou"] == 1.0
        header = (tmp_path / "report.csv").read_text().splitlines()[0]
        assert header == "group,input_type,class,iou,f1,mean_iou,micro_iou"

    def test_evaluate_role_filter_and_threads(self, corpus, capsys):
        tmp_path, layout = corpus
        manifest = tmp_path / "manifest.csv"
        run("manifest", layout, manifest)
        capsys.readouterr()
        code = run(
            "evaluate", manifest, "--pred-dir", tmp_path / "masks" / "bravo" / "2022",
            "--role", "validation", "--threads", "2", "--json",
        )
        assert code == 0
        assert json.loads(capsys.readouterr().out)[-1]["micro_iou"] == 1.0

    def test_evaluate_missing_prediction_tile(self, corpus, capsys):
        tmp_path, layout = corpus
        manifest = tmp_path / "manifest.csv"
        run("manifest", layout, manifest)
        empty = tmp_path / "empty"
        empty.mkdir()
        assert run("evaluate", manifest, "--pred-dir", empty) == 2
        assert "missing prediction" in capsys.readouterr().err


class TestConfigPrecedence:
    def _classify(self, tmp_path, capsys, *argv):
        out = tmp_path / "mask.tif"
        assert run("groundtruth", tmp_path / "d.tif", out, *argv) == 0
        capsys.readouterr()
        return int(read_geotiff(out).data[0, 0, 0])

    def test_flag_beats_file_beats_default(self, tmp_path, capsys, monkeypatch):
        write_diff_pixel(tmp_path / "d.tif", 0.4)
        cfg = tmp_path / "cfg.json"
        cfg.write_text('{"threshold": 0.5}')

        assert self._classify(tmp_path, capsys) == CLASS_LOSS                     # default 0.33
        assert self._classify(tmp_path, capsys, "--config", cfg) == CLASS_OK      # file 0.5
        assert self._classify(tmp_path, capsys, "--config", cfg, "--threshold", "0.35") == CLASS_LOSS

        monkeypatch.setenv("CROPSIGHT_CONFIG", str(cfg))
        assert self._classify(tmp_path, capsys) == CLASS_OK                        # env file 0.5
        low = tmp_path / "low.json"
        low.write_text('{"threshold": 0.2}')
        assert self._classify(tmp_path, capsys, "--config", low) == CLASS_LOSS     # --config beats env

    def test_config_file_validation(self, tmp_path, capsys):
        write_diff_pixel(tmp_path / "d.tif", 0.4)
        bad = tmp_path / "bad.json"
        bad.write_text('{"thresh": 0.5}')
        assert run("groundtruth", tmp_path / "d.tif", tmp_path / "m.tif", "--config", bad) == 2
        assert "unknown config keys" in capsys.readouterr().err

    def test_band_assignment_from_config_and_flag(self, tmp_path, capsys):
        # stack with NIR first: (nir, red, green, blue) = bands 0..3
        data = np.stack([
            np.full((2, 2), 6000.0, np.float32),
            np.full((2, 2), 2000.0, np.float32),
            np.full((2, 2), 800.0, np.float32),
            np.full((2, 2), 500.0, np.float32),
        ])
        write_geotiff(GeoRaster(data, PLAIN_TRANSFORM, "EPSG:32646"), tmp_path / "s.tif")

        assert run("ndvi", tmp_path / "s.tif", tmp_path / "wrong.tif") == 0
        wrong = read_geotiff(tmp_path / "wrong.tif").data[0, 0, 0]
        assert run("ndvi", tmp_path / "s.tif", tmp_path / "right.tif", "--bands", "0,1,2,3") == 0
        right = read_geotiff(tmp_path / "right.tif").data[0, 0, 0]
        assert right == np.float32(0.5) and wrong != right

        cfg = tmp_path / "cfg.json"
        cfg.write_text('{"bands": {"nir": 0, "red": 1, "green": 2, "blue": 3}}')
        assert run("ndvi", tmp_path / "s.tif", tmp_path / "cfgd.tif", "--config", cfg) == 0
        assert read_geotiff(tmp_path / "cfgd.tif").data[0, 0, 0] == np.float32(0.5)

    def test_custom_classmap_render(self, tmp_path, capsys):
        write_diff_pixel(tmp_path / "d.tif", 0.4)
        run("groundtruth", tmp_path / "d.tif", tmp_path / "m.tif")
        cm = tmp_path / "cm.csv"
        cm.write_text("name,r,g,b\nnothing,0,0,0\nhit,10,20,30\nmiss,40,50,60\n")
        assert run("render", tmp_path / "m.tif", tmp_path / "r.tif", "--classmap", cm) == 0
        rendered = read_geotiff(tmp_path / "r.tif")
        assert tuple(rendered.data[:, 0, 0]) == (10, 20, 30)


class TestExitCodes:
    def test_missing_input_is_data_error(self, tmp_path, capsys):
        assert run("ndvi", tmp_path / "none.tif", tmp_path / "out.tif") == 2
        err = capsys.readouterr().err
        assert err.startswith("cropsight:") and err.count("\n") == 1

    def test_undersized_tile_flag_is_data_error(self, tmp_path, capsys, rng):
        r = GeoRaster(rng.integers(0, 9, (1, 20, 20), np.uint8), PLAIN_TRANSFORM)
        write_geotiff(r, tmp_path / "x.tif")
        assert run("tile", tmp_path / "x.tif", tmp_path / "t", "--size", "7") == 2
        assert "tile size" in capsys.readouterr().err

    def test_unknown_command_is_usage_error(self, capsys):
        assert run("mosaic") == 1
        assert "error" in capsys.readouterr().err

    def test_unknown_flag_is_usage_error(self, tmp_path, capsys):
        assert run("diff", "--sideways", "a", "b", "c") == 1

    def test_no_subcommand_is_usage_error(self, capsys):
        assert run() == 1
        assert "subcommand" in capsys.readouterr().err

    def test_evaluate_arity_errors(self, tmp_path, capsys):
        write_diff_pixel(tmp_path / "d.tif", 0.1)
        assert run("evaluate", tmp_path / "d.tif") == 1
        assert run("evaluate", "a", "b", "c") == 1
        assert run("evaluate", "a", "b", "--pred-dir", "x") == 1

    def test_compose_requires_kind(self, tmp_path, capsys):
        assert run("compose", "a.tif", "b.tif") == 1

    def test_bad_scene_spec_is_data_error(self, tmp_path, capsys):
        p = tmp_path / "scene.json"
        p.write_text('{"width": 10, "height": 10, "loss_regions": [{"shape": "blob"}]}')
        assert run("synth", p, tmp_path / "out") == 2

    def test_merge_bad_crop_format(self, tmp_path, capsys):
        assert run("merge", tmp_path, tmp_path / "m.tif", "--crop", "alpha") == 1


class TestDeterminismAndEntrypoints:
    def test_repeated_runs_are_byte_identical(self, tmp_path):
        spec_path = tmp_path / "scene.json"
        save_scene_spec(hailstorm_spec(48, 48, seed=77), spec_path)
        for d in ("one", "two"):
            run("synth", spec_path, tmp_path / d)
            run("ndvi", tmp_path / d / "before.tif", tmp_path / d / "nb.tif")
        for name in ("before.tif", "after.tif", "expected_mask.tif", "nb.tif"):
            a = (tmp_path / "one" / name).read_bytes()
            b = (tmp_path / "two" / name).read_bytes()
            assert a == b, f"{name} differs between identical runs"

    def test_console_script_help(self):
        proc = subprocess.run(["cropsight", "--help"], capture_output=True, text=True)
        assert proc.returncode == 0
        assert "COMMAND" in proc.stdout

    def test_module_entrypoint(self):
        proc = subprocess.run(
            [sys.executable, "-m", "cropsight", "--help"], capture_output=True, text=True
        )
        assert proc.returncode == 0
