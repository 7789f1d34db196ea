"""End-to-end command-line behavior, run in-process through main()."""

import json

import pytest

from weedplan.cli import main, parse_sweep_config
from weedplan.errors import ConfigError
from weedplan.field import generate_field, load_field


SWEEP_CONFIG = """\
# two densities, one cell each
densities=3,5
head_counts=2
strategies=D
planners=notsp
seeds=0,1
length_m=5.0
"""


def _mask_wall_clock(text):
    """Drop the last CSV column; planner wall time is never reproducible."""
    return [line.rsplit(",", 1)[0] for line in text.splitlines()]


def _gen(tmp_path, name="field.csv", density="10", length="10", seed="3"):
    path = tmp_path / name
    rc = main([
        "generate", "--lambda", density, "--length", length,
        "--seed", seed, "-o", str(path),
    ])
    assert rc == 0
    return path


class TestTopLevel:
    def test_version_flag(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["--version"])
        assert exc.value.code == 0
        assert capsys.readouterr().out.startswith("weedplan ")

    def test_missing_required_flag_is_usage_error(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["generate", "--lambda", "5"])
        assert exc.value.code == 2
        assert "--out" in capsys.readouterr().err


class TestGenerate:
    def test_round_trips_the_library_generator(self, tmp_path):
        path = _gen(tmp_path)
        assert load_field(path) == generate_field(10, 10, 1.3, seed=3)

    def test_zero_density_writes_crops_only(self, tmp_path):
        path = _gen(tmp_path, density="0")
        fld = load_field(path)
        assert fld.weeds() == []
        assert len(fld.plants) > 0


class TestPlan:
    def test_prints_one_line_per_head_and_a_tally(self, tmp_path, capsys):
        path = _gen(tmp_path, density="20")
        rc = main(["plan", "--field", str(path), "--segment-index", "1"])
        assert rc == 0
        lines = capsys.readouterr().out.splitlines()
        assert len(lines) == 5  # 4 heads + tally
        assert all(l.startswith("head=") for l in lines[:4])
        visited, total = lines[4].removeprefix("visited=").split("/")
        assert 0 <= int(visited) <= int(total)

    def test_output_is_deterministic(self, tmp_path, capsys):
        path = _gen(tmp_path, density="20")
        argv = ["plan", "--field", str(path), "--segment-index", "2"]
        assert main(argv) == 0
        first = capsys.readouterr().out
        assert main(argv) == 0
        assert capsys.readouterr().out == first

    def test_empty_segment_reports_zero(self, tmp_path, capsys):
        path = _gen(tmp_path, density="0")
        rc = main(["plan", "--field", str(path)])
        assert rc == 0
        assert capsys.readouterr().out == "visited=0/0\n"

    def test_brute_force_cap_is_a_clean_error(self, tmp_path, capsys):
        path = _gen(tmp_path, density="40", seed="0")
        rc = main([
            "plan", "--field", str(path), "-H", "1", "--planner", "brute_force",
        ])
        assert rc == 1
        err = capsys.readouterr().err
        assert err.startswith("error:")
        assert "notsp" in err  # points at the planner that can handle it

    def test_negative_segment_index_rejected(self, tmp_path, capsys):
        path = _gen(tmp_path, density="5")
        rc = main(["plan", "--field", str(path), "--segment-index", "-2"])
        assert rc == 1
        assert "segment-index" in capsys.readouterr().err


class TestSweep:
    def test_writes_results_and_manifest(self, tmp_path, capsys):
        cfg = tmp_path / "sweep.cfg"
        cfg.write_text(SWEEP_CONFIG)
        out = tmp_path / "out"
        rc = main(["sweep", "--config", str(cfg), "--out", str(out)])
        assert rc == 0
        assert "(4 rows, 2 aggregates)" in capsys.readouterr().out

        csv_lines = (out / "results.csv").read_text().splitlines()
        assert len(csv_lines) == 1 + 4 + 2
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["results_csv"] == str(out / "results.csv")
        assert manifest["failed_cells"] == []
        assert manifest["resolved_spec"]["densities"] == [3.0, 5.0]
        assert manifest["tool_version"]

    def test_identical_config_reproduces_the_csv(self, tmp_path):
        cfg = tmp_path / "sweep.cfg"
        cfg.write_text(SWEEP_CONFIG)
        texts = []
        for name in ("a", "b"):
            out = tmp_path / name
            assert main(["sweep", "--config", str(cfg), "--out", str(out)]) == 0
            texts.append((out / "results.csv").read_text())
        assert _mask_wall_clock(texts[0]) == _mask_wall_clock(texts[1])

    def test_malformed_line_fails_with_line_number(self, tmp_path, capsys):
        cfg = tmp_path / "sweep.cfg"
        cfg.write_text("densities=3\nhead_counts\n")
        rc = main(["sweep", "--config", str(cfg), "--out", str(tmp_path / "o")])
        assert rc == 2
        err = capsys.readouterr().err
        assert err.startswith("config error: line 2")

    def test_unknown_key_and_missing_keys_are_reported(self, tmp_path):
        cfg = tmp_path / "sweep.cfg"
        cfg.write_text("densities=3\nwibble=1\n")
        with pytest.raises(ConfigError, match="line 2.*unknown key"):
            parse_sweep_config(cfg)
        cfg.write_text("densities=3\n")
        with pytest.raises(ConfigError, match="missing required keys"):
            parse_sweep_config(cfg)

    def test_unknown_strategy_token_rejected(self, tmp_path, capsys):
        cfg = tmp_path / "sweep.cfg"
        cfg.write_text(SWEEP_CONFIG.replace("strategies=D", "strategies=D,XX"))
        rc = main(["sweep", "--config", str(cfg), "--out", str(tmp_path / "o")])
        assert rc == 2
        assert "unknown strategies" in capsys.readouterr().err

    def test_rig_keys_reach_the_rig_template(self, tmp_path):
        cfg = tmp_path / "sweep.cfg"
        cfg.write_text(SWEEP_CONFIG + "spray_footprint_m=0.08\n")
        spec = parse_sweep_config(cfg)
        assert spec.rig_template.spray_footprint_m == 0.08
        assert spec.length_m == 5.0


class TestBench:
    def test_reports_medians_and_ratio(self, capsys):
        rc = main(["bench", "--n", "4", "--trials", "2", "--seed", "1"])
        assert rc == 0
        out = capsys.readouterr().out.splitlines()
        assert out[0] == "n=4 trials=2 seed=1"
        assert out[1].startswith("brute_force median_s=")
        assert out[2].startswith("notsp median_s=")
        ratio = float(out[3].removeprefix("ratio="))
        assert ratio > 0

    def test_size_beyond_brute_cap_errors(self, capsys):
        rc = main(["bench", "--n", "11", "--trials", "1"])
        assert rc == 1
        assert "brute-force cap" in capsys.readouterr().err

    def test_nonpositive_n_errors(self, capsys):
        rc = main(["bench", "--n", "0"])
        assert rc == 1
        assert "--n must be >= 1" in capsys.readouterr().err
