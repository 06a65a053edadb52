"""Named experiments, configuration files and run persistence."""

from .config import ConfigError, ScenarioConfig, build_config
from .runners import (
    BatchAborted,
    OverlayError,
    RUNNERS,
    overlay_experimental,
    run_batch,
    run_compare,
    run_evolution,
    run_sweep,
)
from .scenarios import REGISTRY

__all__ = [
    "BatchAborted", "ConfigError", "OverlayError", "REGISTRY", "RUNNERS", "ScenarioConfig",
    "build_config", "overlay_experimental", "run_batch", "run_compare", "run_evolution",
    "run_sweep",
]
