"""Scenario lookup by name and per-scenario run defaults."""
from __future__ import annotations

import logging
from typing import Dict, Optional, Type

from core.errors import ConfigError
from core.models.base import ScenarioModel, ScenarioParams
from core.models.dogs import DogsModel, DogsParams
from core.models.piper import PiperModel, PiperParams
from core.models.prey import PreyModel, PreyParams

logger = logging.getLogger(__name__)

SCENARIOS: Dict[str, tuple[Type[ScenarioParams], Type[ScenarioModel]]] = {
    "piper": (PiperParams, PiperModel),
    "dogs": (DogsParams, DogsModel),
    "prey": (PreyParams, PreyModel),
}

# Longer names accepted on the command line and in config files
SCENARIO_ALIASES = {
    "pied_piper": "piper",
    "shepherd": "dogs",
    "shepherd_dogs": "dogs",
    "predator": "prey",
    "predator_prey": "prey",
}

# Domain, resolution, horizon and snapshot schedule used when a config does
# not set them. Snapshot times are the reference times of each scenario.
# Every default grid has h = 0.01. Dogs and prey get room for the herd
# thrown outward by the agents, so no mass reaches the zero ghost cells.
SCENARIO_DEFAULTS = {
    "piper": {
        "extent": (-2.0, 2.0, -2.0, 2.0),
        "cells": 400,
        "t_end": 1.93,
        "snapshot_times": [0.0, 0.171, 0.543, 0.945, 1.447, 1.93],
    },
    "dogs": {
        "extent": (-3.5, 3.5, -3.5, 3.5),
        "cells": 700,
        "t_end": 0.2,
        "snapshot_times": [0.0, 0.044, 0.067, 0.111, 0.156, 0.2],
    },
    "prey": {
        "extent": (-2.5, 2.5, -2.5, 2.5),
        "cells": 500,
        "t_end": 0.5,
        "snapshot_times": [0.0, 0.091, 0.267, 0.358, 0.449, 0.491],
    },
}


def resolve_scenario(name: Optional[str]) -> str:
    """Canonical scenario name; unknown names are an error naming the valid ones."""
    requested = (name or "").strip().lower()
    canonical = SCENARIO_ALIASES.get(requested, requested)
    if canonical not in SCENARIOS:
        raise ConfigError(
            f"Unknown scenario '{name}'; valid scenarios: {', '.join(sorted(SCENARIOS))}"
        )
    return canonical


def params_class(name: str) -> Type[ScenarioParams]:
    return SCENARIOS[resolve_scenario(name)][0]


def build_model(name: str, params: Optional[ScenarioParams] = None) -> ScenarioModel:
    canonical = resolve_scenario(name)
    params_cls, model_cls = SCENARIOS[canonical]
    if params is None:
        params = params_cls()
    elif not isinstance(params, params_cls):
        raise ConfigError(f"Scenario '{canonical}' expects {params_cls.__name__}, got {type(params).__name__}")
    model = model_cls(params)
    logger.debug(f"Built scenario '{canonical}' (V_cfl={model.v_cfl:.4g}, N_p={model.state_size})")
    return model
