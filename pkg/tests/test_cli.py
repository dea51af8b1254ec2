import json
from pathlib import Path

import pytest
from click.testing import CliRunner

from copa.cli import AppConfig, ConfigError, main

ROOT = Path(__file__).resolve().parents[1]


@pytest.fixture(scope="module")
def workspace(tmp_path_factory):
    """A tiny self-contained dataset + stores + config for CLI runs."""
    root = tmp_path_factory.mktemp("cliws")
    dataset = {
        "actions": [
            {"id": "ban", "surface": "ban"},
            {"id": "legalize", "surface": "legalize"},
        ],
        "copas": [
            {
                "id": "c1", "name": "Theme one", "topic_related": True,
                "manual_titles": ["alpha"],
                "claims": [
                    {"stance": "pro", "template": "[TOPIC] helps"},
                    {"stance": "con", "template": "[TOPIC] hurts"},
                ],
            },
            {
                "id": "c2", "name": "Theme two", "topic_related": True,
                "manual_titles": ["beta"],
                "claims": [
                    {"stance": "pro", "template": "more [TOPIC] please"},
                    {"stance": "con", "template": "less [TOPIC] please"},
                ],
            },
        ],
        "motions": [
            {"id": "m0", "action": "ban", "topic": "t0"},
            {"id": "m1", "action": "ban", "topic": "t1"},
            {"id": "m2", "action": "ban", "topic": "t2"},
            {"id": "m3", "action": "legalize", "topic": "u0"},
            {"id": "m4", "action": "legalize", "topic": "u1"},
            {"id": "m5", "action": "legalize", "topic": "u2"},
        ],
        "labels": [
            {"motion": "m0", "copa": "c1"},
            {"motion": "m1", "copa": "c1"},
            {"motion": "m2", "copa": "c1"},
            {"motion": "m3", "copa": "c2"},
            {"motion": "m4", "copa": "c2"},
            {"motion": "m5", "copa": "c2"},
        ],
    }
    (root / "ds.json").write_text(json.dumps(dataset))

    lines = ["6 3"]
    vectors = {
        "t0": "1.0 0.1 0.0", "t1": "0.9 0.2 0.0", "t2": "0.95 0.0 0.1",
        "u0": "0.0 0.1 1.0", "u1": "0.1 0.0 0.9", "u2": "0.0 0.2 0.95",
    }
    lines += [f"{w} {v}" for w, v in vectors.items()]
    (root / "emb.txt").write_text("\n".join(lines) + "\n")

    corpus_lines = [
        json.dumps({"topic": t, "sentence": f"something about {t} and banning"})
        for t in ("t0", "t1", "t2")
    ] + [
        json.dumps({"topic": u, "sentence": f"different words for {u} entirely"})
        for u in ("u0", "u1", "u2")
    ]
    (root / "sent.jsonl").write_text("\n".join(corpus_lines) + "\n")

    config = {
        "dataset": str(root / "ds.json"),
        "embeddings": str(root / "emb.txt"),
        "sentence_corpus": str(root / "sent.jsonl"),
        "ba_k": 1,
        "knn_min_neighbors": 1,
        "topic_min_motions": 1,
        "tol": 0.0001,
        "max_iters": 150,
        "threshold_step": 0.25,
        "methods": ["ba", "knn", "w2v", "nb", "lr"],
    }
    (root / "config.json").write_text(json.dumps(config))

    ba_only = dict(config)
    ba_only["methods"] = ["ba"]
    del ba_only["embeddings"]
    del ba_only["sentence_corpus"]
    (root / "config_ba.json").write_text(json.dumps(ba_only))
    return root


@pytest.fixture()
def runner():
    return CliRunner()


class TestStatsCommand:
    def test_sample_dataset_stats(self, runner, monkeypatch):
        monkeypatch.chdir(ROOT)
        result = runner.invoke(main, ["--config", "data/config.json", "stats"])
        assert result.exit_code == 0
        assert "motions: 15" in result.output
        assert "copas: 6" in result.output

    def test_exclude_general_flag(self, runner, monkeypatch):
        monkeypatch.chdir(ROOT)
        result = runner.invoke(
            main, ["--config", "data/config.json", "--exclude-general", "stats"]
        )
        assert result.exit_code == 0
        assert "general_excluded: True" in result.output
        assert "size framework" not in result.output


class TestExitCodes:
    def test_missing_config_file(self, runner):
        result = runner.invoke(main, ["--config", "/nope/missing.json", "stats"])
        assert result.exit_code == 2

    def test_unknown_config_key(self, runner, tmp_path):
        bad = tmp_path / "c.json"
        bad.write_text('{"no_such_key": 1}')
        result = runner.invoke(main, ["--config", str(bad), "stats"])
        assert result.exit_code == 2

    def test_invalid_hyperparameter(self, runner, tmp_path, workspace):
        bad = tmp_path / "c.json"
        bad.write_text(json.dumps({"dataset": str(workspace / "ds.json"), "ba_k": 0}))
        result = runner.invoke(main, ["--config", str(bad), "stats"])
        assert result.exit_code == 2

    def test_no_dataset_configured(self, runner, tmp_path):
        empty = tmp_path / "c.json"
        empty.write_text("{}")
        result = runner.invoke(main, ["--config", str(empty), "stats"])
        assert result.exit_code == 2

    def test_unknown_action_is_domain_error(self, runner, workspace):
        result = runner.invoke(
            main, ["--config", str(workspace / "config.json"), "match", "zap", "t0"]
        )
        assert result.exit_code == 3

    def test_unknown_copa_is_domain_error(self, runner, workspace):
        result = runner.invoke(
            main,
            ["--config", str(workspace / "config.json"), "invent", "ban", "t0", "nope"],
        )
        assert result.exit_code == 3

    def test_missing_dataset_file_is_io_error(self, runner, tmp_path):
        cfg = tmp_path / "c.json"
        cfg.write_text(json.dumps({"dataset": str(tmp_path / "absent.json")}))
        result = runner.invoke(main, ["--config", str(cfg), "stats"])
        assert result.exit_code == 4

    def test_malformed_dataset_is_io_error(self, runner, tmp_path):
        broken = tmp_path / "ds.json"
        broken.write_text("{oops")
        cfg = tmp_path / "c.json"
        cfg.write_text(json.dumps({"dataset": str(broken)}))
        result = runner.invoke(main, ["--config", str(cfg), "stats"])
        assert result.exit_code == 4


class TestMatchCommand:
    def test_impossible_threshold_empty_success(self, runner, workspace):
        result = runner.invoke(
            main,
            ["--config", str(workspace / "config.json"), "match", "ban", "t0",
             "--method", "ba", "--threshold", "1.01"],
        )
        assert result.exit_code == 0
        assert result.output.strip() == ""

    def test_ba_scores_ranked(self, runner, workspace):
        result = runner.invoke(
            main,
            ["--config", str(workspace / "config.json"), "match", "ban", "fresh",
             "--method", "ba"],
        )
        assert result.exit_code == 0
        lines = [l for l in result.output.splitlines() if l and not l.startswith(" ")]
        assert lines[0].startswith("c1\t1\t")
        assert "pro: fresh helps" in result.output

    def test_matched_copa_prints_instantiated_claims(self, runner, monkeypatch):
        monkeypatch.chdir(ROOT)
        result = runner.invoke(
            main,
            ["--config", "data/config.json", "match", "disband", "NATO",
             "--method", "lr"],
        )
        assert result.exit_code == 0
        assert "pro: NATO works efficiently" in result.output
        assert "con: NATO fails to achieve its goals" in result.output

    def test_ensemble_takes_max_of_methods(self, runner, workspace, monkeypatch):
        cfgpath = workspace / "config.json"
        out_ens = runner.invoke(
            main, ["--config", str(cfgpath), "match", "ban", "t0", "--method", "ensemble"]
        )
        assert out_ens.exit_code == 0
        per_method = {}
        for m in ("ba", "knn", "w2v", "nb", "lr"):
            r = runner.invoke(
                main, ["--config", str(cfgpath), "match", "ban", "t0", "--method", m]
            )
            assert r.exit_code == 0
            for line in r.output.splitlines():
                if line and not line.startswith(" "):
                    cid, score, _ = line.split("\t")
                    per_method[cid] = max(per_method.get(cid, 0.0), float(score))
        for line in out_ens.output.splitlines():
            if line and not line.startswith(" "):
                cid, score, _ = line.split("\t")
                assert float(score) == pytest.approx(per_method[cid], abs=1e-9)


class TestInventCommand:
    def test_reference_syllogism(self, runner, monkeypatch):
        monkeypatch.chdir(ROOT)
        result = runner.invoke(
            main,
            ["--config", "data/config.json", "invent", "further_exploit",
             "solar energy", "clean_energy", "--stance", "pro",
             "--minor", "Solar energy is a form of clean energy."],
        )
        assert result.exit_code == 0
        assert result.output.splitlines() == [
            "Humanity must embrace clean energy in order to fight climate change.",
            "Solar energy is a form of clean energy.",
            "Therefore, humanity must further exploit solar energy.",
        ]


class TestEvalCommand:
    def test_ba_only_without_embeddings_succeeds(self, runner, workspace, tmp_path):
        out = tmp_path / "out"
        result = runner.invoke(
            main,
            ["--config", str(workspace / "config_ba.json"), "eval", "--out", str(out)],
        )
        assert result.exit_code == 0, result.output
        assert (out / "pr_ba.csv").exists()
        assert (out / "p_at_1_ba.csv").exists()
        assert (out / "summary.json").exists()
        assert not (out / "pr_knn.csv").exists()

    def test_summary_contents(self, runner, workspace, tmp_path):
        out = tmp_path / "out"
        runner.invoke(
            main,
            ["--config", str(workspace / "config_ba.json"), "eval", "--out", str(out)],
        )
        summary = json.loads((out / "summary.json").read_text())
        assert summary["dataset"]["motions"] == 6
        assert summary["dataset"]["copas"] == 2
        assert summary["baseline_largest"]["precision"] == 0.5
        assert summary["stats"]["covered_fraction"] == 1.0

    def test_reruns_are_byte_identical(self, runner, workspace, tmp_path):
        outs = []
        for name in ("a", "b"):
            out = tmp_path / name
            result = runner.invoke(
                main,
                ["--config", str(workspace / "config.json"), "eval", "--out", str(out)],
            )
            assert result.exit_code == 0, result.output
            outs.append(out)
        files_a = sorted(p.name for p in outs[0].iterdir())
        files_b = sorted(p.name for p in outs[1].iterdir())
        assert files_a == files_b
        for name in files_a:
            assert (outs[0] / name).read_bytes() == (outs[1] / name).read_bytes()


class TestFeaturesCommand:
    def test_row_count_and_header(self, runner, workspace):
        result = runner.invoke(
            main, ["--config", str(workspace / "config.json"), "features"]
        )
        assert result.exit_code == 0
        lines = result.output.strip().splitlines()
        header = lines[0].split(",")
        assert len(header) == 20  # 17 features + motion_id + copa_id + label
        assert header[-3:] == ["motion_id", "copa_id", "label"]
        assert len(lines) - 1 == 6 * 2

    def test_written_file(self, runner, workspace, tmp_path):
        out = tmp_path / "features.csv"
        result = runner.invoke(
            main,
            ["--config", str(workspace / "config.json"), "features", "--out", str(out)],
        )
        assert result.exit_code == 0
        assert out.read_text().count("\n") == 13  # header + 12 rows


class TestEnvOverrides:
    def test_env_dataset_override(self, runner, workspace, tmp_path):
        cfg = tmp_path / "c.json"
        cfg.write_text(json.dumps({"dataset": "/nonexistent.json"}))
        result = runner.invoke(
            main,
            ["--config", str(cfg), "stats"],
            env={"COPA_DATASET": str(workspace / "ds.json")},
        )
        assert result.exit_code == 0
        assert "motions: 6" in result.output

    def test_env_bad_value_is_config_error(self, runner, workspace):
        result = runner.invoke(
            main,
            ["--config", str(workspace / "config.json"), "stats"],
            env={"COPA_BA_K": "not-a-number"},
        )
        assert result.exit_code == 2


class TestAppConfig:
    def test_defaults(self):
        cfg = AppConfig.load(None, env={})
        assert cfg.ba_k == 5
        assert cfg.methods == ("ba", "knn", "w2v", "nb", "lr")

    def test_env_methods_comma_list(self):
        cfg = AppConfig.load(None, env={"COPA_METHODS": "ba,knn"})
        assert cfg.methods == ("ba", "knn")

    def test_env_bool_parsing(self):
        cfg = AppConfig.load(None, env={"COPA_EXCLUDE_GENERAL": "true"})
        assert cfg.exclude_general is True
        with pytest.raises(ConfigError):
            AppConfig.load(None, env={"COPA_EXCLUDE_GENERAL": "maybe"})

    def test_unknown_method_rejected(self):
        with pytest.raises(ConfigError):
            AppConfig.load(None, env={"COPA_METHODS": "ba,rnn"})
