"""Experiment harness: config round-trips, run artifacts, reports, CLI."""

from __future__ import annotations

import json
from pathlib import Path

import pytest

from warmup_lab.errors import ConfigError
from warmup_lab.harness.cli import main
from warmup_lab.harness.config import (
    build_policy,
    build_problem,
    expand_sweep,
    load_config,
    parse_config,
    serialize_config,
)
from warmup_lab.harness.experiments import EXPERIMENTS, run_experiment
from warmup_lab.harness.report import emit_report
from warmup_lab.harness.runner import (
    OUT_ENV_VAR,
    TRAJECTORY_COLUMNS,
    resolve_out_root,
    run_from_config,
    run_id_for,
)
from warmup_lab.schedules import PracticalClipped, TheoreticalAdaptive

BASIC = """\
seed = 3
[problem]
name = "exp_quadratic"
h1 = 1.0
[policy]
name = "constant"
eta = 0.05
[stop]
max_iters = 10
"""


def write_config(tmp_path, text, name="run.toml"):
    path = tmp_path / name
    path.write_text(text)
    return path


class TestParseConfig:
    def test_basic_fields_and_defaults(self):
        cfg = parse_config(BASIC)
        assert cfg.problem["name"] == "exp_quadratic"
        assert cfg.policy == {"name": "constant", "eta": 0.05}
        assert cfg.seed == 3
        assert cfg.outputs == "runs"
        assert cfg.stop.max_iters == 10
        assert cfg.sweep == {}

    def test_rejects_unknown_top_level_key(self):
        with pytest.raises(ConfigError):
            parse_config("sed = 1\n" + BASIC)

    def test_rejects_unknown_stop_key(self):
        with pytest.raises(ConfigError):
            parse_config(BASIC + "loss_tolerance = 0.1\n")

    def test_rejects_unknown_problem(self):
        bad = BASIC.replace("exp_quadratic", "exp_cubic")
        with pytest.raises(ConfigError):
            build_problem(parse_config(bad).problem)

    def test_sweep_paths_must_exist(self):
        with pytest.raises(ConfigError):
            parse_config(BASIC + "[sweep]\n\"policy.gamma\" = [1, 2]\n")

    def test_sweep_cross_product_capped(self):
        big = ", ".join("1.0" for _ in range(101))
        text = (BASIC
                + f"[sweep]\n\"policy.eta\" = [{big}]\n"
                + f"\"problem.h1\" = [{big}]\n")
        with pytest.raises(ConfigError):
            parse_config(text)

    def test_serialize_round_trip(self):
        text = (BASIC.replace("max_iters = 10",
                              "max_iters = 10\ngrad_tol = 1e-6")
                + "[sweep]\n\"policy.eta\" = [0.01, 0.05]\n")
        cfg = parse_config(text)
        assert parse_config(serialize_config(cfg)) == cfg

    def test_load_config_reads_files(self, tmp_path):
        cfg = load_config(write_config(tmp_path, BASIC))
        assert cfg.seed == 3


class TestExpandSweep:
    def test_cross_product_and_overrides(self):
        text = (BASIC + "[sweep]\n\"policy.eta\" = [0.01, 0.02]\n"
                "\"problem.h1\" = [1.0, 2.0]\n")
        variants = expand_sweep(parse_config(text))
        assert len(variants) == 4
        combos = {(v.policy["eta"], v.problem["h1"]) for v in variants}
        assert combos == {(0.01, 1.0), (0.01, 2.0), (0.02, 1.0), (0.02, 2.0)}
        assert all(v.sweep == {} for v in variants)
        assert all(v.seed == 3 for v in variants)

    def test_concrete_config_expands_to_itself(self):
        cfg = parse_config(BASIC)
        assert expand_sweep(cfg) == [cfg]


class TestBuildPolicy:
    def test_adaptive_from_certificate(self):
        obj, _, _ = build_problem({"name": "exp_quadratic", "h1": 1.0})
        pol = build_policy({"name": "adaptive", "from_certificate": True},
                           obj)
        assert isinstance(pol, TheoreticalAdaptive)
        assert (pol.h0, pol.h1, pol.f_star) == (0.5, 1.0, 0.0)

    def test_from_certificate_needs_certificate(self):
        obj, _, _ = build_problem({"name": "exp_quadratic", "h1": 1.0})
        bare = obj.with_overrides(certificate=None)
        with pytest.raises(ConfigError):
            build_policy({"name": "adaptive", "from_certificate": True},
                         bare)

    def test_from_certificate_rejects_gap_power(self):
        obj, _, _ = build_problem({"name": "deep_leaky",
                                   "layer_dims": [2, 2, 2, 2]})
        assert obj.certificate.rho == 2.0
        with pytest.raises(ConfigError):
            build_policy({"name": "adaptive", "from_certificate": True},
                         obj)

    def test_practical_clipped_nests_base_table(self):
        obj, _, _ = build_problem({"name": "exp_quadratic", "h1": 1.0})
        pol = build_policy({"name": "practical_clipped", "c": 4.0,
                            "base": {"name": "constant", "eta": 0.1}}, obj)
        assert isinstance(pol, PracticalClipped)
        assert pol.base.eta == 0.1
        with pytest.raises(ConfigError):
            build_policy({"name": "practical_clipped", "c": 4.0}, obj)

    def test_unknown_policy(self):
        obj, _, _ = build_problem({"name": "exp_quadratic", "h1": 1.0})
        with pytest.raises(ConfigError):
            build_policy({"name": "sgd_with_momentum"}, obj)


class TestRunner:
    def test_run_id_stability(self):
        a = run_id_for(parse_config(BASIC))
        b = run_id_for(parse_config(BASIC))
        c = run_id_for(parse_config(BASIC.replace("0.05", "0.06")))
        assert a == b
        assert a != c
        assert len(a) == 12

    def test_single_run_artifacts(self, tmp_path, monkeypatch):
        monkeypatch.delenv(OUT_ENV_VAR, raising=False)
        records = run_from_config(parse_config(BASIC), out_root=tmp_path)
        assert len(records) == 1
        rec = records[0]
        run_dir = tmp_path / rec.run_id
        names = {p.name for p in run_dir.iterdir()}
        assert {"summary.json", "trajectory.csv", "config.toml",
                "smoothness_trace.csv"} <= names
        summary = json.loads((run_dir / "summary.json").read_text())
        assert summary["run_id"] == rec.run_id
        assert summary["stop_reason"] == "max_iters"
        assert summary["n_steps"] == 10
        header = (run_dir / "trajectory.csv").read_text().splitlines()[0]
        assert header == ",".join(TRAJECTORY_COLUMNS)

    def test_sweep_produces_distinct_runs(self, tmp_path, monkeypatch):
        monkeypatch.delenv(OUT_ENV_VAR, raising=False)
        text = BASIC + "[sweep]\n\"policy.eta\" = [0.01, 0.02, 0.03]\n"
        records = run_from_config(parse_config(text), out_root=tmp_path)
        assert len(records) == 3
        assert len({r.run_id for r in records}) == 3

    def test_out_env_var_overrides(self, tmp_path, monkeypatch):
        target = tmp_path / "elsewhere"
        monkeypatch.setenv(OUT_ENV_VAR, str(target))
        assert resolve_out_root("runs") == target


class TestEmitReport:
    def test_table_and_skipped_ids(self, tmp_path, monkeypatch):
        monkeypatch.delenv(OUT_ENV_VAR, raising=False)
        rec = run_from_config(parse_config(BASIC), out_root=tmp_path)[0]
        with pytest.warns(UserWarning):
            markdown, csv_text = emit_report([rec.run_id, "missing000000"],
                                             out_root=tmp_path)
        assert rec.run_id in markdown
        assert "Skipped" in markdown
        assert "missing000000" not in csv_text
        assert csv_text.splitlines()[0].startswith("run_id,")

    def test_empty_listing(self, tmp_path):
        markdown, csv_text = emit_report([], out_root=tmp_path)
        assert len(csv_text.splitlines()) == 1


class TestExperiments:
    def test_registry_names(self):
        assert set(EXPERIMENTS) == {
            "smoothness-vs-loss", "warmup-vs-constant", "lower-bound-demo",
            "closure-demo", "practical-warmup"}

    def test_unknown_experiment(self, tmp_path):
        with pytest.raises(KeyError):
            run_experiment("nope", out_root=tmp_path)

    def test_lower_bound_demo_end_to_end(self, tmp_path):
        report = run_experiment("lower-bound-demo", out_root=tmp_path)
        assert report.name == "lower-bound-demo"
        assert Path(report.report_path).exists()
        assert "measured" in report.markdown
        assert len(report.records) >= 1


class TestCli:
    def test_run_and_report(self, tmp_path, capsys, monkeypatch):
        monkeypatch.setenv(OUT_ENV_VAR, str(tmp_path / "out"))
        cfg = write_config(tmp_path, BASIC)
        assert main(["run", str(cfg)]) == 0
        run_line = capsys.readouterr().out.strip()
        run_id = run_line.split()[0]
        assert main(["report", run_id]) == 0
        assert run_id in capsys.readouterr().out

    def test_run_rejects_bad_config(self, tmp_path, capsys):
        cfg = write_config(tmp_path, "mystery = 1\n" + BASIC)
        assert main(["run", str(cfg)]) == 2
        assert "error" in capsys.readouterr().err.lower()

    def test_constants_prints_certificate(self, tmp_path, capsys):
        cfg = write_config(tmp_path, BASIC)
        assert main(["constants", str(cfg)]) == 0
        out = capsys.readouterr().out
        assert "h0" in out and "0.5" in out

    def test_verify_pass_and_fail(self, tmp_path, capsys):
        cfg = write_config(tmp_path, BASIC)
        assert main(["verify", str(cfg), "--points", "50"]) == 0
        assert "PASS" in capsys.readouterr().out
        assert main(["verify", str(cfg), "--points", "50",
                     "--cert", "0.001,0.001"]) == 1
        assert "FAIL" in capsys.readouterr().out

    def test_lemmas_pass(self, tmp_path, capsys):
        cfg = write_config(tmp_path, BASIC)
        assert main(["lemmas", str(cfg), "--points", "40"]) == 0
        assert "PASS" in capsys.readouterr().out

    def test_unknown_experiment_lists_available(self, capsys):
        assert main(["experiment", "nope"]) == 2
        err = capsys.readouterr().err
        assert "lower-bound-demo" in err

    def test_divergent_run_is_recorded_not_an_error(self, tmp_path, capsys,
                                                    monkeypatch):
        monkeypatch.setenv(OUT_ENV_VAR, str(tmp_path / "out"))
        text = BASIC.replace("eta = 0.05", "eta = 5.0").replace(
            "h1 = 1.0", "h1 = 1.0\nw0 = 6.0")
        cfg = write_config(tmp_path, text)
        assert main(["run", str(cfg)]) == 0
        assert "diverged" in capsys.readouterr().out
