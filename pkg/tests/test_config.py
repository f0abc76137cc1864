from pytest import raises

from entlab.core.config import Settings, configure, load_settings, settings
from entlab.core.exceptions import ConfigError


def test_defaults():
    defaults = Settings()
    assert defaults.sigma_bound == 4.0
    assert defaults.forr_failure_budget == 1 / 3
    assert defaults.oracle_n == 4


def test_load_settings_from_file(tmp_path):
    path = tmp_path / "lab.conf"
    path.write_text("forr_n = 32\nSTRIP_SHOTS = 500\natol=1e-8\n")
    loaded = load_settings(str(path))
    assert loaded.forr_n == 32
    assert loaded.strip_shots == 500
    assert loaded.atol == 1e-8


def test_overrides_take_precedence(tmp_path):
    path = tmp_path / "lab.conf"
    path.write_text("jobs = 2\n")
    assert load_settings(str(path), jobs=4).jobs == 4


def test_unknown_key(tmp_path):
    path = tmp_path / "lab.conf"
    path.write_text("forr_n = 32\nteleport = yes\n")
    with raises(ConfigError, match="teleport"):
        load_settings(str(path))


def test_ill_typed_value(tmp_path):
    path = tmp_path / "lab.conf"
    path.write_text("forr_trials = many\n")
    with raises(ConfigError):
        load_settings(str(path))


def test_missing_file(tmp_path):
    with raises(ConfigError):
        load_settings(str(tmp_path / "absent.conf"))


def test_environment_prefix(monkeypatch):
    monkeypatch.setenv("ENTLAB_BHM_TRIALS", "77")
    assert load_settings().bhm_trials == 77


def test_configure_updates_the_shared_instance(lab_settings):
    configure(Settings(forr_n=16, run_log_path=lab_settings.run_log_path, results_dir=lab_settings.results_dir))
    assert settings.forr_n == 16
    assert settings.snapshot()["forr_n"] == 16
