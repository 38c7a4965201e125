"""Experiment harness: configs, CSV schema, determinism, reporting."""

import os
import subprocess
import sys

import numpy as np
import pytest

from mcmclab.errors import ConfigError, ResourceLimitError
from mcmclab.harness import (
    EXERCISE_CSV_HEADER,
    SCALING_CSV_HEADER,
    ExperimentConfig,
    config_from_sources,
    parse_config_file,
    read_scaling_rows,
    report_table,
    run_exercise,
    run_mh_2d_replicates,
    run_scaling,
    scaling_csv_text,
    write_exercise_csv,
    write_scaling_csv,
)


def strip_wall_time(csv_text: str) -> str:
    return "\n".join(line.rsplit(",", 1)[0] for line in csv_text.splitlines())


def quantities(rows):
    return {(case, quantity): value for _, case, quantity, _, value in rows}


class TestConfig:
    def test_defaults_resolve(self):
        cfg = ExperimentConfig("scaling", sampler="mh-fixed")
        assert cfg.iterations() == 20_000
        assert cfg.proposal_scale(9) == pytest.approx(np.sqrt(2.0))
        adaptive = ExperimentConfig("scaling", sampler="mh-adaptive")
        assert adaptive.proposal_scale(25) == pytest.approx(0.5)
        de = ExperimentConfig("scaling", sampler="ens-de")
        assert de.iterations() == 1500
        assert de.proposal_scale(4) == pytest.approx(1.7 / 2.0)

    def test_explicit_gamma_overrides_delta_rule(self):
        cfg = ExperimentConfig("scaling", sampler="mh-adaptive", gamma=0.7)
        assert cfg.proposal_scale(100) == 0.7

    def test_validation(self):
        with pytest.raises(ConfigError):
            ExperimentConfig("unknown-thing")
        with pytest.raises(ConfigError):
            ExperimentConfig("scaling", sampler="nope")
        with pytest.raises(ConfigError):
            ExperimentConfig("scaling", sampler="mh-fixed", dims=(0,))
        with pytest.raises(ConfigError):
            ExperimentConfig("mh-2d", burn_in=1.0)
        with pytest.raises(ConfigError):
            ExperimentConfig("scaling", sampler="ens-stretch", stretch_a=1.0)

    def test_config_file_parsing(self, tmp_path):
        path = tmp_path / "lab.cfg"
        path.write_text(
            "[mh-adaptive]\n"
            "dims = 2,5\n"
            "n = 500\n"
            "replicates = 3\n"
            "seed = 99\n"
            "\n"
            "[noisy-mean]\n"
            "grid_cells = 2000  # comment\n"
        )
        vals = parse_config_file(str(path), "mh-adaptive")
        assert vals == {"dims": (2, 5), "n": 500, "replicates": 3, "seed": 99}
        vals = parse_config_file(str(path), "noisy-mean")
        assert vals == {"grid_cells": 2000}

    def test_unknown_key_rejected(self, tmp_path):
        path = tmp_path / "bad.cfg"
        path.write_text("[noisy-mean]\nwalkers = 7\n")
        with pytest.raises(ConfigError):
            parse_config_file(str(path), "noisy-mean")

    def test_cli_overrides_file(self, tmp_path):
        path = tmp_path / "lab.cfg"
        path.write_text("[mh-adaptive]\nn = 500\nseed = 99\n")
        cfg = config_from_sources(
            "scaling", sampler="mh-adaptive", config_path=str(path),
            overrides={"n": 750, "seed": None},
        )
        assert cfg.n == 750
        assert cfg.seed == 99

    def test_env_seed_fallback(self, monkeypatch):
        monkeypatch.setenv("MCMCLAB_SEED", "314")
        cfg = config_from_sources("noisy-mean")
        assert cfg.seed == 314
        monkeypatch.setenv("MCMCLAB_SEED", "pi")
        with pytest.raises(ConfigError):
            config_from_sources("noisy-mean")


@pytest.fixture(scope="module")
def small_scaling_rows():
    cfg = ExperimentConfig(
        "scaling", sampler="mh-adaptive", dims=(2, 3), n=1200, replicates=2, seed=11
    )
    return cfg, run_scaling(cfg)


class TestScaling:
    def test_rows_in_deterministic_order(self, small_scaling_rows):
        _, rows = small_scaling_rows
        assert [(r.dim, r.replicate) for r in rows] == [
            (2, 0), (2, 1), (3, 0), (3, 1)
        ]

    def test_row_invariants(self, small_scaling_rows):
        cfg, rows = small_scaling_rows
        for row in rows:
            assert 0.0 <= row.acceptance_fraction <= 1.0
            assert row.ess <= row.n
            assert row.tau_hat >= 0.0

    def test_csv_bytes_reproducible(self, small_scaling_rows):
        cfg, rows = small_scaling_rows
        text_a = strip_wall_time(scaling_csv_text(rows))
        text_b = strip_wall_time(scaling_csv_text(run_scaling(cfg)))
        assert text_a == text_b

    def test_adding_replicates_keeps_earlier_rows(self, small_scaling_rows):
        cfg, rows = small_scaling_rows
        import dataclasses

        bigger = dataclasses.replace(cfg, replicates=3)
        rows3 = run_scaling(bigger)
        by_key = {(r.dim, r.replicate): r for r in rows3}
        for row in rows:
            other = by_key[(row.dim, row.replicate)]
            assert other.seed == row.seed
            assert other.acceptance_fraction == row.acceptance_fraction
            assert other.mean_0 == row.mean_0

    def test_csv_round_trip(self, small_scaling_rows, tmp_path):
        _, rows = small_scaling_rows
        path = tmp_path / "rows.csv"
        write_scaling_csv(str(path), rows)
        text = path.read_text()
        assert text.startswith("# schema=1\n")
        assert text.splitlines()[1] == ",".join(SCALING_CSV_HEADER)
        back = read_scaling_rows([str(path)])
        assert len(back) == len(rows)
        for a, b in zip(back, rows):
            assert a.seed == b.seed
            assert a.acceptance_fraction == pytest.approx(b.acceptance_fraction)
            assert a.m is None and b.m is None

    def test_schema_mismatch_rejected(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("# schema=1\nfoo,bar\n1,2\n")
        with pytest.raises(ConfigError):
            read_scaling_rows([str(path)])

    def test_budget_guard(self):
        cfg = ExperimentConfig(
            "scaling", sampler="ens-gaussian", dims=(10,), n=10_000,
            m=100, replicates=100, budget=10_000_000,
        )
        with pytest.raises(ResourceLimitError):
            run_scaling(cfg)

    def test_ensemble_rows_have_m_and_empty_evidence_above_dim5(self):
        cfg = ExperimentConfig(
            "scaling", sampler="ens-stretch", dims=(2, 6), n=60, m=12,
            replicates=1, seed=5,
        )
        rows = run_scaling(cfg)
        assert all(r.m == 12 for r in rows)
        assert rows[0].evidence_hat is not None
        assert rows[1].evidence_hat is None

    def test_jobs_do_not_change_rows(self):
        cfg1 = ExperimentConfig(
            "scaling", sampler="mh-adaptive", dims=(2,), n=800, replicates=2,
            seed=21, jobs=1,
        )
        cfg2 = ExperimentConfig(
            "scaling", sampler="mh-adaptive", dims=(2,), n=800, replicates=2,
            seed=21, jobs=2,
        )
        assert strip_wall_time(scaling_csv_text(run_scaling(cfg1))) == (
            strip_wall_time(scaling_csv_text(run_scaling(cfg2)))
        )


class TestExercises:
    def test_noisy_mean_quantities(self):
        cfg = ExperimentConfig("noisy-mean")
        rows, text = run_exercise(cfg)
        vals = quantities(rows)
        assert vals[("default", "posterior_mean")] == pytest.approx(29.44, abs=0.01)
        assert vals[("default", "posterior_sd")] == pytest.approx(0.396, abs=0.005)
        assert vals[("default", "ci95_lo")] < vals[("default", "ci50_lo")]
        assert "noisy-mean" in text

    def test_grid_2d_consistency_story(self):
        cfg = ExperimentConfig("grid-2d")
        rows, _ = run_exercise(cfg)
        vals = quantities(rows)
        z_small = vals[("5x5[-2,2]", "evidence")]
        z_refined_small_box = vals[("100x100[-2,2]", "evidence")]
        z_big = vals[("100x100[-5,5]", "evidence")]
        # converged on the small box, but to the wrong value
        assert abs(z_refined_small_box - vals[("20x20[-2,2]", "evidence")]) < 0.01
        assert abs(z_refined_small_box - 2 * np.pi) > 1.0
        assert z_big == pytest.approx(2 * np.pi, rel=0.01)
        assert z_small != pytest.approx(2 * np.pi, rel=0.01)

    def test_importance_2d_quantities(self):
        cfg = ExperimentConfig("importance-2d", n=4000, replicates=25)
        rows, _ = run_exercise(cfg)
        vals = quantities(rows)
        se = vals[("replicates", "evidence_se")]
        assert vals[("replicates", "evidence_mean")] == pytest.approx(
            2 * np.pi, abs=4 * se
        )
        assert vals[("sigma2", "kish_ess")] < 4000

    def test_mh_2d_trace_emitted(self):
        cfg = ExperimentConfig("mh-2d", n=400)
        rows, _ = run_exercise(cfg)
        trace_rows = [r for r in rows if r[1] == "start-10-10"]
        assert len(trace_rows) == 2 * 400
        # trace starts near the far start and ends near the mode
        xs = [r[4] for r in trace_rows if r[2] == "trace_x"]
        assert xs[0] > 5.0
        assert abs(xs[-1]) < 5.0

    def test_exercise_csv_round_trip(self, tmp_path):
        cfg = ExperimentConfig("noisy-mean")
        rows, _ = run_exercise(cfg)
        path = tmp_path / "ex.csv"
        write_exercise_csv(str(path), rows)
        lines = path.read_text().splitlines()
        assert lines[0] == "# schema=1"
        assert lines[1] == ",".join(EXERCISE_CSV_HEADER)
        assert len(lines) == 2 + len(rows)


class TestReport:
    def test_empty_input(self):
        table = report_table([])
        assert "(no rows)" in table

    def test_single_row_aggregates_to_itself(self, small_scaling_rows):
        _, rows = small_scaling_rows
        table = report_table(rows[:1])
        assert f"{rows[0].acceptance_fraction:.4g}" in table

    def test_acceptance_band_flag(self, small_scaling_rows):
        import dataclasses

        _, rows = small_scaling_rows
        bad = [dataclasses.replace(rows[0], acceptance_fraction=0.02)]
        table = report_table(bad)
        assert "ACCEPTANCE-BAND" in table
        good_table = report_table(rows)
        assert "ACCEPTANCE-BAND" not in good_table

    def test_replicate_spread_consistent_with_ess(self):
        # 30 replicates of the 2-D chain: the spread of mean-x should match
        # the ESS-based standard error prediction within a factor of 2
        cfg = ExperimentConfig("mh-2d", n=1000, replicates=30, seed=2024)
        rows = run_mh_2d_replicates(cfg)
        assert len(rows) == 30
        means = np.array([r.mean_0 for r in rows])
        esses = np.array([r.ess for r in rows])
        observed = means.std(ddof=1)
        predicted = np.sqrt(2.0 / esses).mean()  # posterior sd_x = sqrt(2)
        assert observed == pytest.approx(predicted, rel=1.0)  # within factor 2
        table = report_table(rows)
        assert "mh-2d" in table


class TestCli:
    def _run(self, *args, env=None):
        full_env = dict(os.environ)
        if env:
            full_env.update(env)
        return subprocess.run(
            [sys.executable, "-m", "mcmclab.cli", *args],
            capture_output=True, text=True, env=full_env,
        )

    def test_exercise_command(self, tmp_path):
        out = tmp_path / "nm.csv"
        res = self._run("exercise", "noisy-mean", "--seed", "3", "--out", str(out))
        assert res.returncode == 0
        assert out.exists()
        assert "noisy-mean" in res.stdout

    def test_scaling_command_and_report(self, tmp_path):
        out = tmp_path / "rows.csv"
        res = self._run(
            "scaling", "mh-adaptive", "--dims", "2", "--n", "600",
            "--replicates", "2", "--seed", "8", "--out", str(out),
        )
        assert res.returncode == 0
        rep = self._run("report", str(out))
        assert rep.returncode == 0
        assert "mh-adaptive" in rep.stdout

    def test_config_error_exit_code(self, tmp_path):
        bad = tmp_path / "bad.cfg"
        bad.write_text("[noisy-mean]\nnot_a_key = 1\n")
        res = self._run("exercise", "noisy-mean", "--config", str(bad))
        assert res.returncode == 2

    def test_unknown_sampler_exit_code(self):
        res = self._run("scaling", "mh-warp")
        assert res.returncode == 2

    def test_resource_guard_exit_code(self, tmp_path):
        res = self._run(
            "scaling", "ens-gaussian", "--dims", "10", "--n", "100000",
            "--replicates", "1000", "--budget", "1000",
            "--out", str(tmp_path / "never.csv"),
        )
        assert res.returncode == 3

    def test_env_seed_changes_output(self, tmp_path):
        out_a = tmp_path / "a.csv"
        out_b = tmp_path / "b.csv"
        out_c = tmp_path / "c.csv"
        base = ("scaling", "mh-adaptive", "--dims", "2", "--n", "400")
        self._run(*base, "--out", str(out_a), env={"MCMCLAB_SEED": "1"})
        self._run(*base, "--out", str(out_b), env={"MCMCLAB_SEED": "2"})
        self._run(*base, "--out", str(out_c), env={"MCMCLAB_SEED": "1"})
        assert strip_wall_time(out_a.read_text()) != strip_wall_time(out_b.read_text())
        assert strip_wall_time(out_a.read_text()) == strip_wall_time(out_c.read_text())
