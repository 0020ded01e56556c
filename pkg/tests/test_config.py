import pytest

from reconbench import config
from reconbench.config import ExperimentConfig, config_from_dict, validate_config


def test_default_grid():
    assert config.default_k_grid(784) == [16, 32, 64, 128, 256, 512, 784]
    assert config.default_k_grid(16) == [2, 4, 8, 16]


def test_defaults_validate_clean():
    cfg = ExperimentConfig()
    assert validate_config(cfg) == []
    assert cfg.d == 784 and [a.name for a in cfg.attacks] == ["attack1", "attack2", "attack3", "attack4"]


def test_k_above_d_is_reported():
    cfg = config_from_dict({"image_size": 4, "k_grid": [4, 17]})
    assert "K=17 exceeds D=16" in validate_config(cfg)


def test_empty_methods_reported():
    assert "methods list is empty" in validate_config(config_from_dict({"methods": []}))


def test_all_findings_are_collected():
    cfg = config_from_dict(
        {
            "methods": ["pca", "bogus"],
            "classifiers": ["knn"],
            "typo": 1,
            "attacks": [{"name": "a", "kind": "regression", "dataset": "nowhere"}],
            "split": {"train_fraction": 1.5},
        }
    )
    findings = validate_config(cfg)
    assert len(findings) >= 5
    text = "\n".join(findings)
    assert "bogus" in text and "knn" in text and "'typo'" in text and "nowhere" in text


def test_images_source_requires_path(tmp_path):
    cfg = config_from_dict({"data": {"source": "images"}})
    assert any("data.path" in f for f in validate_config(cfg))
    cfg = config_from_dict({"data": {"source": "images", "path": str(tmp_path / "nope")}})
    assert any("does not exist" in f for f in validate_config(cfg))


def test_bad_train_parameters():
    cfg = config_from_dict({"train": {"rf_trees": 0, "unknown": 3}})
    findings = validate_config(cfg)
    assert any("train.unknown" in f for f in findings)
    assert any("invalid training parameters" in f for f in findings)


def test_load_toml_resolves_paths_and_env(tmp_path):
    (tmp_path / "cfg.toml").write_text(
        'seed = 7\nk_grid = [4, 16]\nimage_size = 4\n[data]\nsource = "images"\npath = "imgs"\n'
        '[[attacks]]\nkind = "pinv"\n'
    )
    cfg = config.load_config(tmp_path / "cfg.toml", env={"RECONBENCH_OUT_DIR": "/x", "RECONBENCH_JOBS": "3"})
    assert cfg.seed == 7 and cfg.grid == [4, 16]
    assert cfg.data.path == str(tmp_path / "imgs")
    assert cfg.output_dir == "/x" and cfg.jobs == 3
    assert cfg.attacks[0].name == "attack1"


def test_digest_ignores_output_location():
    a, b = ExperimentConfig(), ExperimentConfig(output_dir="elsewhere", jobs=4)
    assert a.digest() == b.digest()
    assert a.digest() != ExperimentConfig(seed=1).digest()


def test_train_config_forwarding():
    cfg = config_from_dict({"train": {"rf_trees": 5}})
    tc = cfg.train_config(11)
    assert tc.seed == 11 and tc.rf_trees == 5


@pytest.mark.parametrize("path", ["configs/protocol_synth.toml"])
def test_shipped_config_is_valid(path):
    from pathlib import Path

    cfg = config.load_config(Path(__file__).parent.parent / path, env={})
    assert validate_config(cfg) == []
