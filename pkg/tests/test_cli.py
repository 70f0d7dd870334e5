import json

import pytest

from minoma.cli import main


def run_cli(args):
    return main([str(a) for a in args])


class TestRunCommand:
    def test_writes_csv_and_json(self, tmp_path, capsys):
        out = tmp_path / "single"
        assert run_cli(["run", "--trials", 10, "--seed", 3, "--out", out]) == 0
        assert (tmp_path / "single.csv").exists()
        assert (tmp_path / "single.json").exists()
        printed = capsys.readouterr().out
        assert "median SE" in printed

    def test_single_point_only(self, tmp_path):
        out = tmp_path / "single"
        run_cli(["run", "--trials", 5, "--out", out])
        lines = (tmp_path / "single.csv").read_text().splitlines()
        assert len(lines) == 1 + 3  # header + one point x three modes

    def test_flag_overrides_reach_config(self, tmp_path):
        out = tmp_path / "flagged"
        run_cli(
            ["run", "--trials", 5, "--n-tx", 5, "--edge-coverage-m", 120,
             "--out", out]
        )
        payload = json.loads((tmp_path / "flagged.json").read_text())
        assert payload["config"]["n_tx"] == 5
        assert payload["config"]["edge_coverage_m"] == 120.0


class TestSweepCommand:
    def test_sweep_values(self, tmp_path):
        out = tmp_path / "sweep"
        run_cli(
            ["sweep", "--trials", 5, "--sweep-values", 100, 150, "--out", out]
        )
        lines = (tmp_path / "sweep.csv").read_text().splitlines()
        assert len(lines) == 1 + 2 * 3

    def test_deterministic_bytes(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        args = ["sweep", "--trials", 8, "--seed", 5, "--sweep-values", 150]
        run_cli(args + ["--out", a])
        run_cli(args + ["--out", b])
        assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()

    def test_optional_figure(self, tmp_path):
        out = tmp_path / "sweep"
        run_cli(
            ["sweep", "--trials", 5, "--sweep-values", 150, "--plot",
             "--out", out]
        )
        assert (tmp_path / "sweep.png").exists()

    def test_config_file_plus_override(self, tmp_path):
        config_path = tmp_path / "scenario.json"
        config_path.write_text(json.dumps({"n_tx": 5, "trials": 4}))
        out = tmp_path / "fromfile"
        run_cli(["sweep", "--config", config_path, "--trials", 6, "--out", out])
        payload = json.loads((tmp_path / "fromfile.json").read_text())
        assert payload["config"]["n_tx"] == 5
        assert payload["config"]["trials"] == 6  # flag wins

    def test_unknown_config_field_rejected(self, tmp_path):
        config_path = tmp_path / "scenario.json"
        config_path.write_text(json.dumps({"bogus": 1}))
        with pytest.raises(SystemExit):
            run_cli(["sweep", "--config", config_path, "--out", tmp_path / "x"])


class TestPlotdataCommand:
    def test_writes_long_csv_and_figure(self, tmp_path):
        out = tmp_path / "plot"
        run_cli(
            ["plotdata", "--trials", 5, "--sweep-values", 100, 150, "--out", out]
        )
        lines = (tmp_path / "plot.csv").read_text().splitlines()
        assert lines[0] == "sweep_axis,axis_value,mode,stat,value"
        assert (tmp_path / "plot.png").read_bytes()[:4] == b"\x89PNG"
