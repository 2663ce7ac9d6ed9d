"""Planner configuration with file overrides.

A config file (TOML or JSON) holds one table per section; every key
overrides the default of the same name, for example::

    [allocation]
    n_max = 2
    [predictor]
    gamma = 1.1
"""
from __future__ import annotations

import json
import sys
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Mapping

from ..allocation import AllocationConfig
from ..generation import TimePredictorConfig
from ..stl.semantics import RobustnessConfig
from ..world import DynamicsParams, ExecutionConfig
from .templates import TemplateConfig

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib


@dataclass(frozen=True)
class MonitorConfig:
    eta: int = 1
    rho_max: float = 10.0

    def robustness(self) -> RobustnessConfig:
        return RobustnessConfig(self.rho_max)


@dataclass(frozen=True)
class PlannerConfig:
    allocation: AllocationConfig = field(default_factory=AllocationConfig)
    predictor: TimePredictorConfig = field(default_factory=TimePredictorConfig)
    dynamics: DynamicsParams = field(default_factory=DynamicsParams)
    execution: ExecutionConfig = field(default_factory=ExecutionConfig)
    monitor: MonitorConfig = field(default_factory=MonitorConfig)
    templates: TemplateConfig = field(default_factory=TemplateConfig)

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


def _coerce(value: Any, default: Any) -> Any:
    if isinstance(default, tuple):
        return tuple(value)
    if isinstance(default, bool):
        return bool(value)
    if isinstance(default, int):
        if int(value) != value:
            raise ValueError(f"expected an integer, got {value!r}")
        return int(value)
    if isinstance(default, float):
        return float(value)
    return value


def apply_overrides(cfg: PlannerConfig, data: Mapping[str, Any]) -> PlannerConfig:
    sections = {f.name for f in fields(cfg)}
    updates = {}
    for section, values in data.items():
        if section not in sections:
            raise KeyError(f"unknown config section {section!r}")
        current = getattr(cfg, section)
        known = {f.name for f in fields(current)}
        changes = {}
        for key, value in values.items():
            if key not in known:
                raise KeyError(f"unknown key {section}.{key}")
            changes[key] = _coerce(value, getattr(current, key))
        updates[section] = replace(current, **changes)
    return replace(cfg, **updates)


def load_config(path: str | Path | None) -> PlannerConfig:
    cfg = PlannerConfig()
    if path is None:
        return cfg
    path = Path(path)
    text = path.read_text()
    if path.suffix.lower() == ".json":
        data = json.loads(text)
    else:
        data = tomllib.loads(text)
    return apply_overrides(cfg, data)
