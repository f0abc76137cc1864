import numpy as np
import pytest

from entlab.core.config import Settings, configure, settings


@pytest.fixture
def rng():
    return np.random.default_rng(20240613)


@pytest.fixture
def lab_settings(tmp_path):
    """Process settings pointed at a temporary directory, restored afterwards."""
    saved = settings.model_copy()
    configure(
        Settings(
            run_log_path=str(tmp_path / "runs" / "runs.jsonl"),
            results_dir=str(tmp_path / "results"),
        )
    )
    yield settings
    configure(saved)
