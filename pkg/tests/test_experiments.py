import json
import os

import numpy as np
import pytest

from config.experiment import (
    ExperimentConfig,
    _parse_bool,
    _parse_list,
    env_prefix,
    load_config,
)
from errors import ConfigError, ParameterError
from experiments import RunResult, STUDIES, ResultStore, format_cell, parallel_map, run, studies, to_jsonable
from experiments.acceptance import defaults
from main import main


def frames_overrides(out):
    return {"seed": "3", "out": str(out), "jobs": "1", "m": "2", "n": "10", "n_frames": "16", "seeds": "2"}


SAMPLE_CONFIGS = os.path.join(os.path.dirname(__file__), "..", "config")


class TestConfigLayers:

    def test_defaults(self):
        config = load_config("degree-scan", overrides={"seed": "1"}, environ={})
        assert config.params["target"] == "sign"
        assert config.params["eps"] == [0.4, 0.3, 0.2, 0.15, 0.1]
        assert config.sources["target"] == "default"
        assert config.sources["seed"] == "cli"
        assert config.jobs >= 1
        assert config.out_dir.endswith("degree-scan")

    def test_precedence(self, tmp_path):
        path = tmp_path / "frames.env"
        path.write_text("seed=5\nm=2\nn=40\nn_frames=8\n", encoding="utf-8")
        environ = {"L1LAB_FRAMES_N": "50", "L1LAB_FRAMES_SEEDS": "3", "OTHER": "x"}
        config = load_config("frames", str(path), {"n_frames": "16", "m": None}, environ)
        assert config.seed == 5
        assert config.params["m"] == 2
        assert config.params["n"] == 50
        assert config.params["n_frames"] == 16
        assert config.params["seeds"] == 3
        assert config.sources["m"] == "file"
        assert config.sources["n"] == "env"
        assert config.sources["n_frames"] == "cli"
        assert config.sources["doubling"] == "default"

    def test_env_prefix(self):
        assert env_prefix("degree-scan") == "L1LAB_DEGREE_SCAN_"
        assert env_prefix("all-acceptance") == "L1LAB_ALL_ACCEPTANCE_"

    def test_list_and_bool_values(self):
        config = load_config("degree-scan", overrides={"seed": "0", "eps": "[0.4, 0.2]"}, environ={})
        assert config.params["eps"] == [0.4, 0.2]
        config = load_config("frames", overrides={"seed": "0", "doubling": "off"}, environ={})
        assert config.params["doubling"] is False

    def test_optional_param_stays_none(self):
        config = load_config("plant-and-distinguish", overrides={"seed": "0"}, environ={})
        assert config.params["epsilon"] is None

    @pytest.mark.parametrize("name,subcommand", [("sign_l1", "degree-scan"), ("sigmoid_l2", "degree-scan"),
                                                  ("plant_boolean", "plant-and-distinguish"),
                                                  ("plant_real", "plant-and-distinguish"),
                                                  ("acceptance", "all-acceptance")])
    def test_sample_configs_load(self, name, subcommand):
        config = load_config(subcommand, os.path.join(SAMPLE_CONFIGS, f"{name}.env"), environ={})
        assert config.sources["seed"] == "file"

    def test_to_dict(self, tmp_path):
        config = load_config("frames", overrides=frames_overrides(tmp_path), environ={})
        data = config.to_dict()
        assert data["subcommand"] == "frames"
        assert data["seed"] == 3
        assert data["jobs"] == 1
        assert data["params"]["n_frames"] == 16


class TestConfigErrors:

    def test_all_problems_collected(self):
        with pytest.raises(ConfigError) as info:
            load_config("degree-scan", overrides={"bogus": "1", "norm": "L3", "d_max": "abc"},
                        environ={"L1LAB_DEGREE_SCAN_EPS": "0.1,-0.2"})
        problems = info.value.problems
        assert len(problems) == 5
        assert any("bogus" in p for p in problems)
        assert any("norm" in p for p in problems)
        assert any("d_max" in p for p in problems)
        assert any("-0.2" in p for p in problems)
        assert any("种子" in p for p in problems)
        assert info.value.exit_code == 2
        assert info.value.to_dict()["details"]["problems"] == problems

    def test_unknown_subcommand(self):
        with pytest.raises(ConfigError):
            load_config("nope", overrides={"seed": "1"}, environ={})

    @pytest.mark.parametrize("seed", ["-1", str(2 ** 64), "1.5"])
    def test_bad_seed(self, seed):
        with pytest.raises(ConfigError):
            load_config("frames", overrides={"seed": seed}, environ={})

    def test_largest_seed_accepted(self):
        config = load_config("frames", overrides={"seed": str(2 ** 64 - 1)}, environ={})
        assert config.seed == 2 ** 64 - 1

    def test_bad_jobs(self):
        with pytest.raises(ConfigError):
            load_config("frames", overrides={"seed": "1", "jobs": "0"}, environ={})

    def test_missing_config_file(self, tmp_path):
        with pytest.raises(ConfigError) as info:
            load_config("frames", str(tmp_path / "missing.env"), {"seed": "1"}, environ={})
        assert len(info.value.problems) == 1

    def test_unknown_env_key(self):
        with pytest.raises(ConfigError) as info:
            load_config("frames", overrides={"seed": "1"}, environ={"L1LAB_FRAMES_WIDTH": "3"})
        assert "env" in info.value.problems[0]


class TestParsers:

    def test_parse_list(self):
        assert _parse_list("1, 2,3") == ["1", "2", "3"]
        assert _parse_list("[1, 2]") == ["1", "2"]
        assert _parse_list("[1, 2") == ["1", "2"]
        assert _parse_list("") == []

    @pytest.mark.parametrize("raw,expected", [("1", True), ("Yes", True), ("on", True),
                                              ("0", False), ("FALSE", False), ("off", False)])
    def test_parse_bool(self, raw, expected):
        assert _parse_bool(raw) is expected

    def test_parse_bool_rejects(self):
        with pytest.raises(ValueError):
            _parse_bool("maybe")


class TestStorage:

    def test_format_cell(self):
        assert format_cell(None) == ""
        assert format_cell(True) == "true"
        assert format_cell(np.bool_(False)) == "false"
        assert format_cell(np.int64(7)) == "7"
        assert format_cell(1 / 3) == "0.333333333333"
        assert format_cell(float("inf")) == "inf"
        assert format_cell(float("nan")) == "nan"
        assert format_cell([1, 0.5]) == "1;0.5"
        assert format_cell("sign") == "sign"

    def test_to_jsonable(self):
        data = to_jsonable({"a": np.array([1.0, np.inf]), 2: (np.int32(3), np.bool_(True))})
        assert data == {"a": [1.0, None], "2": [3, True]}

    def test_csv_format(self, tmp_path):
        store = ResultStore(str(tmp_path / "out"))
        path = store.write_csv("table", [{"d": 1, "error": 0.5}, {"d": 2, "flag": True}])
        with open(path, "rb") as f:
            content = f.read().decode("utf-8")
        assert content == "d,error,flag\r\n1,0.5,\r\n2,,true\r\n"

    def test_csv_header_without_rows(self, tmp_path):
        store = ResultStore(str(tmp_path))
        path = store.write_csv("empty", [], columns=["a", "b"])
        with open(path, "rb") as f:
            assert f.read() == b"a,b\r\n"

    def test_manifest_lists_files(self, tmp_path):
        store = ResultStore(str(tmp_path))
        store.write_csv("rows", [{"x": 1}])
        store.write_summary({"value": np.float64(0.25)})
        path = store.write_manifest({"seed": 1})
        with open(path, encoding="utf-8") as f:
            manifest = json.load(f)
        assert manifest["files"] == ["rows.csv", "summary.json"]
        assert manifest["config"] == {"seed": 1}
        assert manifest["settings"]["LP_METHOD"] == "highs"
        assert "numpy" in manifest["versions"]
        assert manifest["runtime_columns"] == ["runtime"]


class TestRunner:

    def test_parallel_map_keeps_order(self):
        items = list(range(20))
        assert parallel_map(lambda x: x * x, items, jobs=4) == [x * x for x in items]
        assert parallel_map(lambda x: x + 1, items, jobs=1) == [x + 1 for x in items]

    def test_frames_run_writes_outputs(self, tmp_path):
        config = load_config("frames", overrides=frames_overrides(tmp_path), environ={})
        assert run("frames", config) == 0
        assert sorted(os.listdir(tmp_path)) == ["frames.csv", "manifest.json", "summary.json"]
        with open(tmp_path / "frames.csv", encoding="utf-8", newline="") as f:
            lines = f.read().split("\r\n")
        assert lines[0].startswith("m,n,N,seed")
        # 两个维数各两个种子
        assert len([line for line in lines if line]) == 5
        with open(tmp_path / "summary.json", encoding="utf-8") as f:
            summary = json.load(f)
        assert summary["runtime"] >= 0
        assert summary["shrink_factor"] > 1.0
        assert summary["max_orthonormality_residual"] < 1e-10

    def test_frames_run_reproducible(self, tmp_path):
        tables = []
        for name in ("a", "b"):
            config = load_config("frames", overrides=frames_overrides(tmp_path / name), environ={})
            assert run("frames", config) == 0
            with open(tmp_path / name / "frames.csv", encoding="utf-8") as f:
                tables.append(f.read())
        assert tables[0] == tables[1]

    def test_lab_error_exit_code(self, tmp_path, monkeypatch):
        def failing(params, seed, jobs):
            raise ParameterError("bad input", {"value": 1})

        monkeypatch.setitem(STUDIES, "failing", failing)
        config = ExperimentConfig("failing", {}, 0, str(tmp_path), 1)
        assert run("failing", config) == 3
        with open(tmp_path / "error.json", encoding="utf-8") as f:
            error = json.load(f)
        assert error["error"] == "ParameterError"
        assert error["details"] == {"value": 1}

    def test_unexpected_error_is_wrapped(self, tmp_path, monkeypatch):
        def broken(params, seed, jobs):
            raise KeyError("x")

        monkeypatch.setitem(STUDIES, "broken", broken)
        assert run("broken", ExperimentConfig("broken", {}, 0, str(tmp_path), 1)) == 3
        with open(tmp_path / "error.json", encoding="utf-8") as f:
            assert json.load(f)["details"]["type"] == "KeyError"

    def test_failed_acceptance_exit_code(self, tmp_path, monkeypatch):
        def rejected(params, seed, jobs):
            return RunResult({"checks": [{"check": 1, "passed": False}]}, {"failed": [1]}, passed=False)

        monkeypatch.setitem(STUDIES, "rejected", rejected)
        assert run("rejected", ExperimentConfig("rejected", {}, 0, str(tmp_path), 1)) == 4
        assert os.path.exists(tmp_path / "checks.csv")
        assert os.path.exists(tmp_path / "error.json")


class TestMain:

    def test_missing_seed_exits_with_config_error(self, tmp_path, monkeypatch):
        monkeypatch.chdir(tmp_path)
        code = main(["frames", "--out", str(tmp_path / "out"), "--m", "2"])
        assert code == 2
        with open(tmp_path / "out" / "error.json", encoding="utf-8") as f:
            error = json.load(f)
        assert error["error"] == "ConfigError"

    def test_frames_subcommand(self, tmp_path, monkeypatch):
        monkeypatch.chdir(tmp_path)
        out = tmp_path / "out"
        code = main(["frames", "--seed", "3", "--out", str(out), "--jobs", "2",
                     "--m", "2", "--n", "10", "--n-frames", "4", "--seeds", "2", "--doubling", "false"])
        assert code == 0
        with open(out / "manifest.json", encoding="utf-8") as f:
            manifest = json.load(f)
        assert manifest["config"]["params"]["doubling"] is False
        assert manifest["config"]["sources"]["seed"] == "cli"


class TestStudies:

    def test_gns_scan_checks_cubic_ptfs(self):
        params = defaults("gns-scan", k=[4, 16], n_samples=2_000, rho=[0.1])
        result = studies.gns_scan(params, 5, 1)
        sanity = result.tables["ptf_sanity"]
        assert len(sanity) == 10
        assert {row["degree"] for row in sanity} == {3}
        assert {row["epsilon"] for row in sanity} == {0.01, 0.04}
        assert "ptf_within" in result.summary

    def test_real_variant_scales_labels_by_witness(self):
        params = defaults("plant-and-distinguish", variant="real", d=2, n=10, trials=1, n_samples=5_000)
        result = studies.plant_and_distinguish(params, 4, 1)
        summary = result.summary
        assert summary["label_scale"] == pytest.approx(1.0 / summary["witness_correlation"])
        assert summary["planted_correct"] == 1
        assert summary["null_flagged"] == 0
        rows = {row["instance"]: row for row in result.tables["plant_and_distinguish"]}
        assert rows["planted"]["truth"] >= 1.0 / (6.0 * summary["label_scale"])
        assert rows["planted_low"]["learner_degree"] == 1

    def test_moment_match_row_has_ks_and_prediction(self):
        params = defaults("moment-match", d=[4], n_samples=20_000, product_columns=0, ptf_d=0)
        row = studies.moment_match(params, 2, 1).tables["moment_match"][0]
        assert 0.0 <= row["ks_statistic"] <= 1.0
        assert 0.0 <= row["ks_pvalue"] <= 1.0
        assert row["expected_gap_mass"] == pytest.approx(0.2754, abs=2e-3)
        assert isinstance(row["gap_matches_expected"], bool)
