import json

import pytest

from readability_lab.cli import main as cli_main
from readability_lab.errors import ConfigError
from readability_lab.experiments import (
    ExperimentConfig,
    load_config,
    run_ablation,
    run_pca_sweep,
    run_substitution,
)

pytestmark = pytest.mark.filterwarnings("ignore:embedding dim")


def toy_experiment_config(toy_dir, **overrides) -> ExperimentConfig:
    base = dict(
        corpus=str(toy_dir / "manifest.csv"),
        embeddings=str(toy_dir / "embeddings.jsonl"),
        profile="english",
        k=3,
        seed=7,
    )
    base.update(overrides)
    return ExperimentConfig(**base)


class TestLoadConfig:
    def test_toy_config_loads_with_resolved_paths(self, toy_config, toy_dir):
        config = load_config(toy_config)
        assert config.k == 3
        assert config.corpus == str((toy_dir / "manifest.csv").resolve())

    def test_missing_required_key(self, tmp_path):
        path = tmp_path / "c.toml"
        path.write_text('corpus = "x.csv"\n')
        with pytest.raises(ConfigError, match="embeddings"):
            load_config(path)

    def test_unknown_key_rejected(self, tmp_path, toy_dir):
        path = tmp_path / "c.toml"
        path.write_text(
            f'corpus = "{toy_dir}/manifest.csv"\n'
            f'embeddings = "{toy_dir}/embeddings.jsonl"\n'
            "typo_key = 3\n"
        )
        with pytest.raises(ConfigError, match="typo_key"):
            load_config(path)

    def test_invalid_toml(self, tmp_path):
        path = tmp_path / "c.toml"
        path.write_text("corpus = [unclosed\n")
        with pytest.raises(ConfigError, match="TOML"):
            load_config(path)

    def test_bad_percentages(self, toy_dir):
        with pytest.raises(ConfigError, match="pca_percentages"):
            toy_experiment_config(toy_dir, pca_percentages=(30,)).validate()

    def test_missing_paths(self, toy_dir):
        with pytest.raises(ConfigError, match="corpus path"):
            toy_experiment_config(toy_dir, corpus="nope.csv").validate()

    def test_seed_override(self, toy_config):
        assert load_config(toy_config, overrides={"seed": 99}).seed == 99
        assert load_config(toy_config, overrides={"seed": None}).seed == 7


def test_prepare_warns_on_nonstandard_embedding_dim(toy_dir):
    from readability_lab.experiments import prepare

    config = toy_experiment_config(toy_dir)
    with pytest.warns(UserWarning, match="embedding dim is 16"):
        prep = prepare(config)
    assert any("embedding dim" in note for note in prep.notes)


class TestAblation:
    def test_report_shape_and_ranges(self, toy_dir, tmp_path):
        config = toy_experiment_config(toy_dir)
        paths = run_ablation(config, out_dir=tmp_path)
        report = json.loads(paths["json"].read_text())
        cells = [
            report["results"][algo][mode]["mean_f1"]
            for algo in ("logreg", "svm", "rf")
            for mode in ("ling_only", "emb_only", "combined")
        ]
        assert len(cells) == 9
        assert all(0.0 <= s <= 1.0 for s in cells)
        assert set(report["best_mode_per_algorithm"]) == {"logreg", "svm", "rf"}

    def test_combined_columns_are_sum_of_blocks(self, toy_dir, tmp_path):
        config = toy_experiment_config(toy_dir)
        report = json.loads(run_ablation(config, out_dir=tmp_path)["json"].read_text())
        res = report["results"]["logreg"]
        n_ling = res["ling_only"]["setup"]["n_features"]
        n_emb = res["emb_only"]["setup"]["n_features"]
        assert res["combined"]["setup"]["n_features"] == n_ling + n_emb

    def test_rerun_is_byte_identical(self, toy_dir, tmp_path):
        config = toy_experiment_config(toy_dir)
        first = run_ablation(config, out_dir=tmp_path / "a")["json"].read_bytes()
        second = run_ablation(config, out_dir=tmp_path / "b")["json"].read_bytes()
        assert first == second

    def test_thread_cap_does_not_change_bytes(self, toy_dir, tmp_path, monkeypatch):
        config = toy_experiment_config(toy_dir)
        monkeypatch.setenv("READABILITY_LAB_THREADS", "1")
        serial = run_ablation(config, out_dir=tmp_path / "s")["json"].read_bytes()
        monkeypatch.setenv("READABILITY_LAB_THREADS", "3")
        threaded = run_ablation(config, out_dir=tmp_path / "t")["json"].read_bytes()
        assert serial == threaded

    def test_markdown_flags_best_mode(self, toy_dir, tmp_path):
        config = toy_experiment_config(toy_dir)
        md = run_ablation(config, out_dir=tmp_path)["markdown"].read_text()
        assert md.count("**") >= 2  # at least one bolded best cell

    def test_inputs_are_never_mutated(self, toy_dir, tmp_path):
        before = {
            p.name: p.read_bytes() for p in toy_dir.iterdir() if p.is_file()
        }
        run_ablation(toy_experiment_config(toy_dir), out_dir=tmp_path)
        after = {p.name: p.read_bytes() for p in toy_dir.iterdir() if p.is_file()}
        assert before == after

    def test_rerun_from_embedded_config_reproduces_bytes(self, toy_dir, tmp_path):
        config = toy_experiment_config(toy_dir)
        first = run_ablation(config, out_dir=tmp_path / "a")["json"]
        embedded = json.loads(first.read_text())["config"]
        embedded = {
            k: tuple(v) if isinstance(v, list) else v for k, v in embedded.items()
        }
        second = run_ablation(
            ExperimentConfig(**embedded), out_dir=tmp_path / "b"
        )["json"]
        assert first.read_bytes() == second.read_bytes()


class TestSubstitution:
    def test_removing_sem_drops_exactly_two_columns(self, toy_dir, tmp_path):
        config = toy_experiment_config(toy_dir, removed_groups=("SEM",))
        report = json.loads(
            run_substitution(config, out_dir=tmp_path)["json"].read_text()
        )
        assert len(report["removed_feature_ids"]) == 2
        full_cols = report["full"]["logreg"]["setup"]["n_features"]
        reduced_cols = report["reduced"]["logreg"]["setup"]["n_features"]
        assert full_cols - reduced_cols == 2

    def test_report_carries_both_tests_with_method_tags(self, toy_dir, tmp_path):
        config = toy_experiment_config(toy_dir)
        report = json.loads(
            run_substitution(config, out_dir=tmp_path)["json"].read_text()
        )
        assert report["difference_test"]["method"] in ("exact", "normal-approximation")
        assert report["variance_test"]["method"] == "median-levene"
        assert 0.0 < report["difference_test"]["p_value"] <= 1.0
        assert 0.0 < report["variance_test"]["p_value"] <= 1.0
        assert report["score_pairing"] == "per_fold"

    def test_algorithm_means_pairing(self, toy_dir, tmp_path):
        config = toy_experiment_config(
            toy_dir, substitution_pairing="algorithm_means"
        )
        report = json.loads(
            run_substitution(config, out_dir=tmp_path)["json"].read_text()
        )
        assert report["difference_test"]["sample_sizes"] == [3, 3]

    def test_removing_everything_rejected(self, toy_dir, tmp_path):
        config = toy_experiment_config(
            toy_dir, removed_groups=("TRAD", "LEX", "SYN", "SEM", "MORPH", "ORTHO")
        )
        with pytest.raises(ConfigError, match="empty"):
            run_substitution(config, out_dir=tmp_path)

    def test_removing_nothing_present_rejected(self, toy_dir, tmp_path):
        # english registry has no MORPH features
        config = toy_experiment_config(toy_dir, removed_groups=("MORPH",))
        with pytest.raises(ConfigError, match="no registry features"):
            run_substitution(config, out_dir=tmp_path)


class TestPcaSweep:
    def test_csv_shape_and_monotone_dims(self, toy_dir, tmp_path):
        config = toy_experiment_config(toy_dir)
        paths = run_pca_sweep(config, out_dir=tmp_path)
        lines = paths["csv"].read_text().strip().splitlines()
        assert lines[0] == "algorithm,variance_pct,mean_weighted_f1,retained_dims"
        rows = [line.split(",") for line in lines[1:]]
        assert len(rows) == 15  # 3 algorithms x 5 percentages
        report = json.loads(paths["json"].read_text())
        full_dim = report["results"]["logreg"]["100"]["setup"]["n_features"]
        for algo in ("logreg", "svm", "rf"):
            dims = [float(r[3]) for r in rows if r[0] == algo]
            assert dims == sorted(dims)
            assert dims[-1] == full_dim  # pct 100 reports the full dimension

    def test_subset_of_percentages(self, toy_dir, tmp_path):
        config = toy_experiment_config(toy_dir, pca_percentages=(50, 100))
        lines = (
            run_pca_sweep(config, out_dir=tmp_path)["csv"].read_text().strip().splitlines()
        )
        assert len(lines) == 1 + 3 * 2


class TestCli:
    def test_ablation_success(self, toy_config, tmp_path, capsys):
        code = cli_main(
            ["ablation", "--config", str(toy_config), "--out", str(tmp_path)]
        )
        assert code == 0
        out = capsys.readouterr().out
        assert "ablation.json" in out
        assert (tmp_path / "ablation.json").exists()

    def test_config_error_exit_1(self, tmp_path, capsys):
        bad = tmp_path / "bad.toml"
        bad.write_text('corpus = "missing.csv"\nembeddings = "missing.jsonl"\n')
        code = cli_main(["ablation", "--config", str(bad)])
        assert code == 1
        assert "config error" in capsys.readouterr().err

    def test_data_error_exit_2(self, toy_dir, tmp_path, capsys):
        manifest = tmp_path / "manifest.csv"
        manifest.write_text("id,label,path\na,easy,gone.txt\nb,hard,gone2.txt\n")
        config = tmp_path / "c.toml"
        config.write_text(
            f'corpus = "{manifest}"\n'
            f'embeddings = "{toy_dir / "embeddings.jsonl"}"\n'
        )
        code = cli_main(["ablation", "--config", str(config)])
        assert code == 2
        assert "data error" in capsys.readouterr().err

    def test_seed_override_changes_report(self, toy_config, tmp_path):
        cli_main(["ablation", "--config", str(toy_config), "--out", str(tmp_path / "a")])
        cli_main(
            ["ablation", "--config", str(toy_config), "--out", str(tmp_path / "b"),
             "--seed", "123"]
        )
        a = json.loads((tmp_path / "a" / "ablation.json").read_text())
        b = json.loads((tmp_path / "b" / "ablation.json").read_text())
        assert a["config"]["seed"] == 7
        assert b["config"]["seed"] == 123

    def test_pca_sweep_and_substitution_commands(self, toy_config, tmp_path):
        assert cli_main(
            ["pca-sweep", "--config", str(toy_config), "--out", str(tmp_path)]
        ) == 0
        assert cli_main(
            ["substitution", "--config", str(toy_config), "--out", str(tmp_path)]
        ) == 0
        assert (tmp_path / "pca_sweep.csv").exists()
        assert (tmp_path / "substitution.md").exists()
