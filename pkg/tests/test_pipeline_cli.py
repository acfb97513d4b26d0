import hashlib
import json
from pathlib import Path

import numpy as np
import pytest
import yaml

from viscrf.cli import main
from viscrf.pipeline import (
    ConfigError,
    load_config,
    load_config_file,
    run_pipeline,
)
from viscrf.raster import read_image


def base_config(out_dir, **overrides):
    cfg = {
        "input": {
            "stimulus": {
                "kind": "cafe_wall",
                "rows": 3,
                "cols": 9,
                "tile": 50,
                "mortar": 2,
            }
        },
        "dog": {"scales": [1, 2, 3, 4]},
        "s": 2.0,
        "h": 8.0,
        "hough": {"fill_gap": 5, "min_length": 50},
        "out_dir": str(out_dir),
    }
    cfg.update(overrides)
    return cfg


def tree_digest(root: Path) -> dict:
    out = {}
    for p in sorted(root.rglob("*")):
        if p.is_file() and p.name != "report.json":
            out[str(p.relative_to(root))] = hashlib.sha256(p.read_bytes()).hexdigest()
    return out


class TestConfig:
    def test_missing_scales_names_field(self, tmp_path):
        cfg = base_config(tmp_path)
        cfg["dog"] = {}
        with pytest.raises(ConfigError, match="dog.scales"):
            load_config(cfg)

    def test_two_inputs_rejected(self, tmp_path):
        cfg = base_config(tmp_path)
        cfg["input"]["image"] = "x.pgm"
        with pytest.raises(ConfigError, match="input"):
            load_config(cfg)

    def test_unknown_field_path_reported(self, tmp_path):
        cfg = base_config(tmp_path)
        cfg["hough"]["peak_floor"] = "not a number"
        with pytest.raises(ConfigError, match="hough.peak_floor"):
            load_config(cfg)

    def test_feature_derived_scales(self, tmp_path):
        cfg = base_config(tmp_path)
        cfg["dog"] = {"feature_sizes": [16.0], "grid_step": 1.0}
        loaded = load_config(cfg)
        from viscrf.pipeline import resolve_scales

        # base config uses s=2.0, so the raw scale is 16 / (2 * 2) = 4
        assert resolve_scales(loaded) == [4.0]


class TestRunPipeline:
    def test_end_to_end_report(self, tmp_path):
        out = tmp_path / "run"
        report = run_pipeline(load_config(base_config(out)))
        assert len([f for f in report.files if f.endswith(".pgm")]) == 4
        assert (out / "cafewall_tilt_dog.csv").exists()
        rows = (out / "cafewall_tilt_dog.csv").read_text().strip().split("\n")
        assert any(row.split(",")[0] == "2.000000" and row.split(",")[1] == "H" for row in rows)
        # manifest completeness: every listed file exists, every written file listed
        manifest = yaml.safe_load((out / "manifest.yaml").read_text())
        for name in manifest["files"]:
            assert (out / name).exists(), name
        on_disk = {p.name for p in out.iterdir()}
        assert on_disk == set(manifest["files"])

    def test_determinism(self, tmp_path):
        cfg_a = load_config(base_config(tmp_path / "a", outputs={"rasters": True, "binary": True, "jet": True, "csv": True, "overlays": True, "manifest": True}))
        cfg_b = load_config(base_config(tmp_path / "b", outputs={"rasters": True, "binary": True, "jet": True, "csv": True, "overlays": True, "manifest": True}))
        run_pipeline(cfg_a)
        run_pipeline(cfg_b)
        da, db = tree_digest(tmp_path / "a"), tree_digest(tmp_path / "b")
        assert da == db and len(da) > 5

    def test_image_input_matches_stimulus_input(self, tmp_path):
        fixture = Path(__file__).resolve().parent.parent / "fixtures" / "cross_bulge_3x3.pgm"
        img_cfg = {
            "input": {"image": str(fixture)},
            "dog": {"scales": [1.0, 2.0]},
            "hough": {"min_length": 50},
            "out_dir": str(tmp_path / "img"),
        }
        stim_cfg = {
            "input": {
                "stimulus": {
                    "kind": "dot_checkerboard",
                    "rows": 3,
                    "cols": 3,
                    "tile": 100,
                    "dot": 20,
                    "gap": 5,
                }
            },
            "dog": {"scales": [1.0, 2.0]},
            "hough": {"min_length": 50},
            "out_dir": str(tmp_path / "stim"),
        }
        run_pipeline(load_config(img_cfg))
        run_pipeline(load_config(stim_cfg))
        a = read_image(tmp_path / "img" / "cross_bulge_3x3_dog_s2.pgm")
        b = read_image(tmp_path / "stim" / "dots_dog_s2.pgm")
        assert np.array_equal(a.data, b.data)

    def test_config_error_on_empty_scales(self, tmp_path):
        cfg = base_config(tmp_path)
        cfg["dog"] = {"scales": []}
        with pytest.raises(ConfigError, match="dog.scales"):
            load_config(cfg)


class TestCli:
    def test_generate_cafewall(self, tmp_path):
        out = tmp_path / "w.pgm"
        code = main(
            [
                "generate",
                "cafewall",
                "--rows", "3", "--cols", "9", "--tile", "50", "--mortar", "2",
                "--out", str(out),
            ]
        )
        assert code == 0
        r = read_image(out)
        assert (r.width, r.height) == (450, 154)

    def test_edgemap_then_analyze(self, tmp_path):
        wall = tmp_path / "w.pgm"
        assert main(["generate", "cafewall", "--rows", "3", "--cols", "9",
                     "--tile", "50", "--mortar", "2", "--out", str(wall)]) == 0
        out_dir = tmp_path / "em"
        assert main(["edgemap", "--in", str(wall), "--scales", "1,2,3,4",
                     "--s", "2", "--h", "8", "--out-dir", str(out_dir)]) == 0
        layer_files = sorted(out_dir.glob("*_dog_*.pgm"))
        assert len(layer_files) == 4 and (out_dir / "manifest.yaml").exists()
        csv_path = tmp_path / "tilt.csv"
        assert main(["analyze", "--in-dir", str(out_dir), "--fillgap", "5",
                     "--minlen", "50", "--csv", str(csv_path)]) == 0
        header = csv_path.read_text().split("\n")[0]
        assert header == (
            "scale,bin,ref_angle_deg,n_segments,mean_angle_deg,"
            "mean_dev_deg,std_dev_deg,total_length_px"
        )

    def test_pipeline_subcommand(self, tmp_path):
        cfg_path = tmp_path / "cfg.yaml"
        cfg_path.write_text(yaml.safe_dump(base_config(tmp_path / "out")))
        assert main(["pipeline", "--config", str(cfg_path)]) == 0
        assert (tmp_path / "out" / "report.json").exists()
        report = json.loads((tmp_path / "out" / "report.json").read_text())
        assert report["scales"] == [1, 2, 3, 4]

    def test_render(self, tmp_path):
        wall = tmp_path / "w.pgm"
        main(["generate", "cafewall", "--rows", "2", "--cols", "4", "--tile", "20",
              "--mortar", "2", "--out", str(wall)])
        out = tmp_path / "w.png"
        assert main(["render", "--in", str(wall), "--mode", "jet", "--out", str(out)]) == 0
        assert out.exists()

    def test_unknown_subcommand_exit_1(self):
        assert main(["frobnicate"]) == 1

    def test_unknown_flag_exit_1(self):
        assert main(["generate", "cafewall", "--bogus", "1"]) == 1

    def test_config_error_exit_1(self, tmp_path):
        cfg_path = tmp_path / "cfg.yaml"
        bad = base_config(tmp_path / "out")
        bad["dog"] = {}
        cfg_path.write_text(yaml.safe_dump(bad))
        assert main(["pipeline", "--config", str(cfg_path)]) == 1

    def test_io_error_exit_2(self, tmp_path):
        assert main(["edgemap", "--in", str(tmp_path / "missing.pgm"),
                     "--scales", "1", "--out-dir", str(tmp_path)]) == 2

    def test_help_exit_0(self):
        assert main(["--help"]) == 0
        assert main(["pipeline", "--help"]) == 0
