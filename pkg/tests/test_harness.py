import csv
import json

import pytest

from minoma.errors import ConfigError
from minoma.harness import (
    CSV_HEADER,
    ScenarioConfig,
    export,
    export_csv,
    export_json,
    export_plotdata_csv,
    run_sweep,
    run_trial,
)

SMALL = ScenarioConfig(trials=40, master_seed=7, sweep_values=(100.0, 150.0))


class TestConfig:
    def test_defaults_resolve(self):
        config = ScenarioConfig()
        config.validate()
        assert config.resolved_n_users == 6
        assert config.resolved_algorithm == "alg2"
        assert config.resolved_beta == (0.5,)

    def test_higher_order_defaults_to_tiers(self):
        config = ScenarioConfig(cluster_size=3, beta_per_rank=(1 / 3, 1 / 3))
        assert config.resolved_algorithm == "alg1"

    def test_rejects_bad_beta(self):
        with pytest.raises(ConfigError):
            ScenarioConfig(beta_per_rank=(1.0,)).validate()
        with pytest.raises(ConfigError):
            ScenarioConfig(cluster_size=3, beta_per_rank=(0.5,)).validate()

    def test_rejects_user_count_mismatch(self):
        with pytest.raises(ConfigError):
            ScenarioConfig(
                clustering_algorithm="alg1", n_users=7
            ).validate()

    def test_rejects_pairing_with_big_clusters(self):
        with pytest.raises(ConfigError):
            ScenarioConfig(
                cluster_size=3, clustering_algorithm="alg2",
                beta_per_rank=(0.3, 0.3),
            ).validate()

    def test_rejects_unknown_axis(self):
        with pytest.raises(ConfigError):
            ScenarioConfig(sweep_axis="nonsense").validate()

    def test_round_trip_dict(self):
        config = ScenarioConfig(rho=0.5, sweep_values=(1.0, 2.0))
        assert ScenarioConfig.from_dict(config.to_dict()) == config

    def test_hash_tracks_content(self):
        a = ScenarioConfig()
        b = ScenarioConfig(master_seed=2)
        assert a.hash() == ScenarioConfig().hash()
        assert a.hash() != b.hash()

    def test_beta_axis_expansion(self):
        config = ScenarioConfig(sweep_axis="beta")
        assert config.with_axis_value(0.25).resolved_beta == (0.25,)


class TestRunTrial:
    def test_deterministic(self):
        a = run_trial(ScenarioConfig(), 5)
        b = run_trial(ScenarioConfig(), 5)
        assert a == b

    def test_reports_every_mode(self):
        record = run_trial(ScenarioConfig(), 0)
        assert set(record.modes) == {"proposed", "conventional", "oma"}
        for res in record.modes.values():
            assert res.feasible
            assert res.se_bps_hz > 0

    def test_identical_assignment_across_modes(self):
        record = run_trial(ScenarioConfig(), 3)
        by_mode = {
            mode: sorted((u.user_id, u.beam) for u in res.users)
            for mode, res in record.modes.items()
        }
        assert by_mode["proposed"] == by_mode["conventional"] == by_mode["oma"]

    def test_rate_bound_users_hit_targets(self):
        config = ScenarioConfig()
        for t in range(30):
            record = run_trial(config, t)
            for res in record.modes.values():
                for u in res.users:
                    if u.binding == "rate" and res.feasible:
                        assert u.rate_bps == pytest.approx(
                            u.target_bps, rel=1e-9
                        )

    def test_override_mismatch_flagged_not_raised(self):
        config = ScenarioConfig(power_overrides_dbm=(43.0,))
        record = run_trial(config, 0)
        assert record.clustering_failed == "override_count_mismatch"
        assert all(not r.feasible for r in record.modes.values())

    def test_power_control_scenario(self):
        config = ScenarioConfig(
            n_tx=10,
            n_users=15,
            power_overrides_dbm=tuple([43.0] * 5 + [40.0] * 5),
        )
        record = run_trial(config, 1)
        assert record.beam_sizes == (2, 2, 2, 2, 2, 1, 1, 1, 1, 1)
        assert all(r.feasible for r in record.modes.values())


class TestRunSweep:
    def test_point_per_value(self):
        result = run_sweep(SMALL)
        assert [p.value for p in result.points] == [100.0, 150.0]
        for point in result.points:
            assert set(point.stats) == {"proposed", "conventional", "oma"}
            for s in point.stats.values():
                assert 0.0 <= s.feasible_frac <= 1.0

    def test_single_trial_sweep_matches_record(self):
        config = ScenarioConfig(trials=1, master_seed=3, sweep_values=(150.0,))
        result = run_sweep(config)
        record = run_trial(config, 0)
        for mode, res in record.modes.items():
            stats = result.points[0].stats[mode]
            assert stats.mean_se_bps_hz == pytest.approx(res.se_bps_hz)
            assert stats.p50 == pytest.approx(res.se_bps_hz)
            assert stats.n_feasible == 1

    def test_workers_match_sequential(self):
        seq = run_sweep(SMALL)
        par = run_sweep(SMALL, workers=2)
        assert seq == par

    def test_oma_independent_of_p_tol(self):
        a = run_sweep(ScenarioConfig(trials=25, p_tol_dbm=10.0))
        b = run_sweep(ScenarioConfig(trials=25, p_tol_dbm=25.0))
        for pa, pb in zip(a.points, b.points):
            assert pa.stats["oma"] == pb.stats["oma"]

    def test_proposed_se_nonincreasing_toward_heads(self):
        # widening the edge band moves the weak users toward the heads,
        # raising inter-beam leakage; the medians must not climb
        config = ScenarioConfig(
            trials=400, master_seed=11, sweep_values=(50.0, 100.0, 150.0, 200.0)
        )
        result = run_sweep(config)
        medians = [p.stats["proposed"].p50 for p in result.points]
        for earlier, later in zip(medians, medians[1:]):
            assert later <= earlier * 1.002


class TestExport:
    def test_csv_header_and_rows(self, tmp_path):
        result = run_sweep(SMALL)
        path = tmp_path / "out.csv"
        export_csv(result, str(path))
        lines = path.read_text().splitlines()
        assert lines[0] == CSV_HEADER
        assert len(lines) == 1 + 2 * 3  # points x modes

    def test_csv_round_trip(self, tmp_path):
        result = run_sweep(SMALL)
        path = tmp_path / "out.csv"
        export_csv(result, str(path))
        with open(path) as fh:
            rows = list(csv.DictReader(fh))
        for row in rows:
            point = next(
                p for p in result.points if p.value == float(row["value"])
            )
            stats = point.stats[row["mode"]]
            assert float(row["mean_se_bps_hz"]) == pytest.approx(
                stats.mean_se_bps_hz, rel=1e-9
            )
            assert float(row["feasible_frac"]) == pytest.approx(
                stats.feasible_frac, rel=1e-9
            )
            assert int(row["trials"]) == SMALL.trials

    def test_byte_identical_exports(self, tmp_path):
        result = run_sweep(SMALL)
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        export_csv(result, str(a))
        export_csv(result, str(b))
        assert a.read_bytes() == b.read_bytes()

    def test_rerun_byte_identical(self, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        export_csv(run_sweep(SMALL), str(a))
        export_csv(run_sweep(SMALL), str(b))
        assert a.read_bytes() == b.read_bytes()

    def test_json_contents(self, tmp_path):
        result = run_sweep(SMALL)
        path = tmp_path / "out.json"
        export_json(result, str(path))
        payload = json.loads(path.read_text())
        assert payload["schema_version"] == 1
        assert payload["master_seed"] == SMALL.master_seed
        assert payload["config_hash"] == SMALL.hash()
        assert payload["config"]["trials"] == SMALL.trials
        assert len(payload["points"]) == 2

    def test_plotdata_long_format(self, tmp_path):
        result = run_sweep(SMALL)
        path = tmp_path / "long.csv"
        export_plotdata_csv(result, str(path))
        with open(path) as fh:
            rows = list(csv.DictReader(fh))
        assert len(rows) == 2 * 3 * 5  # points x modes x stats
        stats = {row["stat"] for row in rows}
        assert stats == {"mean_se_bps_hz", "p10", "p50", "p90", "feasible_frac"}

    def test_export_dispatch(self, tmp_path):
        result = run_sweep(SMALL)
        export(result, "csv", str(tmp_path / "a.csv"))
        export(result, "json", str(tmp_path / "a.json"))
        export(result, "plotdata", str(tmp_path / "a_long.csv"))
        with pytest.raises(ConfigError):
            export(result, "parquet", str(tmp_path / "a.parquet"))


class TestFigure:
    def test_renders_png(self, tmp_path):
        from minoma.plotting import render_sweep_figure

        result = run_sweep(SMALL)
        path = tmp_path / "fig.png"
        render_sweep_figure(result, str(path))
        data = path.read_bytes()
        assert data[:8] == b"\x89PNG\r\n\x1a\n"
        assert len(data) > 1000
