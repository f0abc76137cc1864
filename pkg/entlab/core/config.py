"""Configuration management using pydantic-settings."""
from pathlib import Path
from typing import Any, Dict, Optional

from dotenv import dotenv_values
from pydantic import ValidationError
from pydantic_settings import BaseSettings

from entlab.core.exceptions import ConfigError


class Settings(BaseSettings):
    """Laboratory settings.

    Every field can be overridden by an ``ENTLAB_<FIELD>`` environment
    variable, a ``.env`` file, or a flat ``key = value`` file passed to
    :func:`load_settings`.
    """

    # Numeric tolerances
    atol: float = 1e-10
    completeness_atol: float = 1e-9
    probability_floor: float = 1e-12
    sigma_bound: float = 4.0

    # Boolean Hidden Matching
    bhm_alpha: float = 0.25

    # Forrelation
    forr_epsilon: float = 0.5
    forr_planting_constant: float = 0.25
    forr_max_rejections: int = 1_000_000
    forr_failure_budget: float = 1.0 / 3.0

    # Protocol generators
    memory_qubits: int = 1

    # Suite scales
    decompose_cases_d1: int = 100
    decompose_cases_d2: int = 25
    completeness_protocols: int = 50
    monte_carlo_protocols: int = 20
    monte_carlo_shots: int = 100_000
    levelk_scalar_cases: int = 1000
    levelk_scalar_n: int = 6
    levelk_matrix_cases: int = 500
    levelk_matrix_n: int = 4
    levelk_matrix_c: int = 2
    growth_protocols: int = 50
    growth_n: int = 4
    bhm_trials: int = 10_000
    bhm_relation_shots: int = 1000
    strip_shots: int = 100_000
    strip_random_protocols: int = 20
    oneway_pairs: int = 100
    forr_n: int = 64
    forr_trials: int = 200
    oracle_n: int = 4
    oracle_m: int = 1
    oracle_c: int = 1

    # Outputs
    run_log_path: str = "./data/runs/runs.jsonl"
    results_dir: str = "./data/results"

    # Execution
    default_seed: int = 1
    jobs: int = 1
    log_level: str = "WARNING"

    class Config:
        env_file = ".env"
        env_file_encoding = "utf-8"
        env_prefix = "ENTLAB_"
        extra = "ignore"

    def snapshot(self) -> Dict[str, Any]:
        """JSON-ready copy of every setting, stored with each run record."""
        return self.model_dump(mode="json")

    def ensure_directories(self) -> None:
        Path(self.run_log_path).parent.mkdir(parents=True, exist_ok=True)
        Path(self.results_dir).mkdir(parents=True, exist_ok=True)


def load_settings(config_path: Optional[str] = None, **overrides: Any) -> Settings:
    """
    Build settings from defaults, the environment and an optional config file.

    Args:
        config_path: Flat ``key = value`` file; keys are field names
        **overrides: Values that take precedence over the file

    Returns:
        Validated settings instance

    Raises:
        ConfigError: Missing file, unknown key or ill-typed value
    """
    values: Dict[str, Any] = {}
    if config_path is not None:
        path = Path(config_path)
        if not path.is_file():
            raise ConfigError(f"Config file not found: {config_path}")
        for key, value in dotenv_values(path).items():
            if value is None:
                raise ConfigError(f"Config key '{key}' has no value")
            values[key.strip().lower()] = value.strip()
    values.update({k: v for k, v in overrides.items() if v is not None})
    unknown = sorted(set(values) - set(Settings.model_fields))
    if unknown:
        raise ConfigError(f"Unknown config keys: {', '.join(unknown)}")
    try:
        return Settings(**values)
    except ValidationError as e:
        raise ConfigError(f"Invalid configuration: {e}") from e


def configure(new: Settings) -> Settings:
    """Copy ``new`` into the process-wide settings that every service reads."""
    for name in Settings.model_fields:
        setattr(settings, name, getattr(new, name))
    return settings


# Global settings instance
settings = Settings()
