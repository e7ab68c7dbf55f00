"""Run configuration: one serializable object captures everything a run needs.

The resolved config is embedded in every trial log header, so a log alone
is enough to rerun the experiment that produced it.
"""

from __future__ import annotations

import copy
import json
from dataclasses import dataclass, field

import yaml

from .planner import ActionKind, PlannerConfig
from .speech import AgeGroup, AgeNoiseConfig, NoiseConfig
from .world import Location, WorldState


DEFAULT_WORLD = {
    "robot_start": "table",
    "containers": {"cabinet": "closed", "dishwasher": "closed"},
    "objects": [
        {"type": "milk", "color": "white", "size": "normal", "location": "countertop"},
        {"type": "cereal", "color": "red", "size": "big", "location": "countertop"},
        {"type": "bowl", "color": "blue", "size": "normal", "location": "cabinet"},
        {"type": "cup", "color": "red", "size": "small", "location": "cabinet"},
        {"type": "spoon", "color": "green", "size": "small", "location": "dishwasher"},
    ],
}

DEFAULT_SUBSTITUTIONS = {
    "bowl": "pole",
    "cup": "cap",
    "milk": "silk",
    "cereal": "serial",
    "spoon": "spool",
    "breakfast": "break",
    "stop": "shop",
}

#: Per-field confusion rates measured for the reference chat model
#: (1 - accuracy, in fractions), applied to fields the gold carries.
#: ``hallucination`` is the rate of inventing a slot the gold lacks.
REFERENCE_CONFUSION = {
    "command": 0.1843,
    "add_type": 0.1092,
    "add_color": 0.1340,
    "add_size": 0.3160,
    "add_location": 0.1547,
    "delete_type": 0.1688,
    "delete_color": 0.1446,
    "delete_size": 0.1623,
    "delete_location": 0.0004,
    "hallucination": 0.005,
}


def _default_speech() -> dict:
    return {
        "p_cutoff": 0.0,
        "p_substitute": 0.0,
        "substitution_table": dict(DEFAULT_SUBSTITUTIONS),
        "clean_confidence": [0.85, 1.0],
        "corrupt_confidence": [0.2, 0.6],
        "p_adjacent_age": 0.0,
        "binary_split_first_old": "fifties",
    }


def _default_planner() -> dict:
    return {
        "durations": {
            "navigate": 3, "open_container": 2, "close_container": 2,
            "perceive": 1, "grasp": 2, "place": 2, "return_object": 5,
        },
        "interruptable": {
            "navigate": True, "open_container": False, "close_container": False,
            "perceive": True, "grasp": False, "place": False, "return_object": True,
        },
        "search_order": ["countertop", "cabinet", "dishwasher"],
        "breakfast_set": ["bowl", "cereal", "milk", "spoon"],
        "default_destination": "table",
        "max_retries": 2,
        "p_grasp_fail": 0.0,
    }


def _default_nlu() -> dict:
    return {
        "backend": "grammar",  # grammar | external | stub
        "forward_other": True,
        "min_confidence": None,
        "stub_confusion": dict(REFERENCE_CONFUSION),
        "external": {
            "base_url": None,
            "model": "local-model",
            "api_key_env": "KITCHENHRI_API_KEY",
            "timeout_s": 10.0,
            "log_bodies": False,
        },
    }


def _default_trial() -> dict:
    return {
        "confirm_timeout_ticks": 2,
        "max_resubmits": 6,
        "max_ticks": 300,
        "true_age_group": "thirties",
    }


@dataclass
class RunConfig:
    seed: int = 0
    world: dict = field(default_factory=lambda: copy.deepcopy(DEFAULT_WORLD))
    speech: dict = field(default_factory=_default_speech)
    planner: dict = field(default_factory=_default_planner)
    nlu: dict = field(default_factory=_default_nlu)
    trial: dict = field(default_factory=_default_trial)
    gateway_port: int = 8765

    # -- materialized views -------------------------------------------------

    def build_world(self) -> WorldState:
        return WorldState.from_manifest(self.world)

    def noise_config(self) -> NoiseConfig:
        s = self.speech
        return NoiseConfig(
            p_cutoff=float(s["p_cutoff"]),
            p_substitute=float(s["p_substitute"]),
            substitution_table=dict(s["substitution_table"]),
            clean_confidence_range=tuple(s["clean_confidence"]),
            corrupt_confidence_range=tuple(s["corrupt_confidence"]),
        )

    def age_noise_config(self) -> AgeNoiseConfig:
        return AgeNoiseConfig(p_adjacent=float(self.speech["p_adjacent_age"]))

    def binary_split(self) -> AgeGroup:
        return AgeGroup(self.speech["binary_split_first_old"])

    def planner_config(self) -> PlannerConfig:
        p = self.planner
        return PlannerConfig(
            durations={ActionKind(k): int(v) for k, v in p["durations"].items()},
            interruptable={ActionKind(k): bool(v) for k, v in p["interruptable"].items()},
            search_order=tuple(Location(loc) for loc in p["search_order"]),
            breakfast_set=tuple(p["breakfast_set"]),
            default_destination=Location(p["default_destination"]),
            max_retries=int(p["max_retries"]),
            p_grasp_fail=float(p["p_grasp_fail"]),
        )

    # -- serialization -------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "world": copy.deepcopy(self.world),
            "speech": copy.deepcopy(self.speech),
            "planner": copy.deepcopy(self.planner),
            "nlu": copy.deepcopy(self.nlu),
            "trial": copy.deepcopy(self.trial),
            "gateway_port": self.gateway_port,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        cfg = cls()
        for key in ("world", "speech", "planner", "nlu", "trial"):
            if key in data:
                _deep_update(getattr(cfg, key), data[key])
        if "seed" in data:
            cfg.seed = int(data["seed"])
        if "gateway_port" in data:
            cfg.gateway_port = int(data["gateway_port"])
        return cfg

    @classmethod
    def load(cls, path: str) -> "RunConfig":
        with open(path, "r", encoding="utf-8") as fh:
            data = yaml.safe_load(fh) or {}
        if not isinstance(data, dict):
            raise ValueError(f"config root must be a mapping, got {type(data).__name__}")
        return cls.from_dict(data)

    def save(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            yaml.safe_dump(self.to_dict(), fh, sort_keys=True)


def _deep_update(base: dict, override: dict) -> None:
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(base.get(key), dict):
            _deep_update(base[key], value)
        else:
            base[key] = copy.deepcopy(value)


def calibrated_noise_config() -> RunConfig:
    """Preset whose injected noise mirrors the reference trial statistics:
    transcript corruption lands near 29% and command misrouting near 18%.
    """
    cfg = RunConfig()
    cfg.speech["p_cutoff"] = 0.16
    cfg.speech["p_substitute"] = 0.16
    cfg.speech["p_adjacent_age"] = 0.3
    cfg.planner["p_grasp_fail"] = 0.04
    cfg.nlu["backend"] = "stub"
    return cfg
