import pytest

from app.config import Settings, load_experiment_config, read_toml
from app.core.errors import ConfigError
from app.schemas import CentroidRunConfig, MeanRunConfig, SweepConfig, TrackingRunConfig


def test_settings_read_environment(monkeypatch, tmp_path):
    monkeypatch.setenv("PLASMODIUM_OUTPUT_DIR", str(tmp_path / "elsewhere"))
    monkeypatch.setenv("PLASMODIUM_WORKERS", "3")
    settings = Settings()
    assert settings.output_dir == tmp_path / "elsewhere"
    assert settings.workers == 3


def test_load_tracking_config(tmp_path):
    path = tmp_path / "track.toml"
    path.write_text(
        'stimulus = "positive"\n'
        "noise_sigma = 20.0\n"
        "[engine]\n"
        "damping = 0.93\n"
        "[engine.motor]\n"
        'kind = "oscillatory"\n'
    )
    cfg = load_experiment_config(path, TrackingRunConfig)
    assert cfg.stimulus == "positive"
    assert cfg.noise_sigma == 20.0
    assert cfg.engine.motor.kind == "oscillatory"
    assert cfg.population == 1500


def test_defaults_follow_published_parameters():
    cfg = CentroidRunConfig()
    assert (cfg.engine.sensor.so, cfg.engine.sensor.sa, cfg.engine.sensor.ra) == (9.0, 90.0, 45.0)
    assert cfg.engine.deposit == 5.0
    assert cfg.engine.damping == 0.9
    assert cfg.hold_steps == 50
    assert cfg.p_remove == 0.0005
    assert cfg.halt_population == 50
    track = TrackingRunConfig()
    assert track.engine.damping == 0.93
    assert track.engine.motor.pid == 0.05
    assert track.engine.illumination_weight == 0.1


def test_unknown_keys_are_config_errors(tmp_path):
    path = tmp_path / "bad.toml"
    path.write_text("hold_stepz = 3\n")
    with pytest.raises(ConfigError):
        load_experiment_config(path, CentroidRunConfig)


def test_invalid_values_are_config_errors(tmp_path):
    path = tmp_path / "bad.toml"
    path.write_text("[engine]\ndamping = 1.5\n")
    with pytest.raises(ConfigError):
        load_experiment_config(path, CentroidRunConfig)


def test_malformed_toml(tmp_path):
    path = tmp_path / "broken.toml"
    path.write_text("this is = = not toml\n")
    with pytest.raises(ConfigError):
        read_toml(path)


def test_missing_file(tmp_path):
    with pytest.raises(FileNotFoundError):
        read_toml(tmp_path / "absent.toml")


def test_mask_source_needs_exactly_one_origin():
    with pytest.raises(ValueError):
        CentroidRunConfig(mask={"builtin": "circle", "image": "shape.pgm"})


def test_sweep_grid_must_not_be_empty():
    with pytest.raises(ValueError):
        SweepConfig(experiment="mean", grid={})
    with pytest.raises(ValueError):
        SweepConfig(experiment="mean", grid={"hold_steps": []})


def test_margins_are_checked_when_loading(tmp_path):
    path = tmp_path / "centroid.toml"
    path.write_text("margin = 4\n")
    with pytest.raises(ConfigError):
        load_experiment_config(path, CentroidRunConfig)

    path = tmp_path / "mean.toml"
    path.write_text("[encoding]\nmargin = 12\n")
    with pytest.raises(ConfigError):
        load_experiment_config(path, MeanRunConfig)


def test_mean_defaults_shrink_after_the_hold():
    cfg = MeanRunConfig()
    assert cfg.hold_steps == 20
    assert cfg.p_remove == 0.0005
    assert cfg.engine.turnover.enabled
    assert cfg.engine.turnover.birth_limit == "replacement"
    assert (cfg.encoding.spacing, cfg.encoding.stroke_width) == (20, 6)
