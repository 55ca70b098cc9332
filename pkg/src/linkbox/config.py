"""Declarative pipeline configuration, one INI section per stage."""

from __future__ import annotations

import configparser
import dataclasses
from dataclasses import dataclass, field
from pathlib import Path

from .gmeans import ClusterConfig
from .labeler import LabelConfig
from .noise_filter import AggregationConfig
from .relatedness import SR_NOISE_THRESHOLD
from .reuse_scheduler import EcgConfig
from .taxonomy import TaxonomyConfig


@dataclass(frozen=True)
class RelatednessConfig:
    sr_threshold: float = SR_NOISE_THRESHOLD


@dataclass(frozen=True)
class PipelineConfig:
    aggregation: AggregationConfig = field(default_factory=AggregationConfig)
    relatedness: RelatednessConfig = field(default_factory=RelatednessConfig)
    taxonomy: TaxonomyConfig = field(default_factory=TaxonomyConfig)
    cluster: ClusterConfig = field(default_factory=ClusterConfig)
    label: LabelConfig = field(default_factory=LabelConfig)
    ecg: EcgConfig = field(default_factory=EcgConfig)
    reuse: bool = True

    def replace(self, **sections) -> "PipelineConfig":
        """Copy with per-section overrides, e.g. ``replace(cluster={"rng_seed": 3})``."""
        changes = {}
        for name, value in sections.items():
            if isinstance(value, dict):
                value = dataclasses.replace(getattr(self, name), **value)
            changes[name] = value
        return dataclasses.replace(self, **changes)

    def to_ini(self) -> str:
        lines = []
        for name in SECTIONS:
            section = getattr(self, name)
            lines.append(f"[{name}]")
            lines += [f"{f.name} = {_render(getattr(section, f.name))}" for f in dataclasses.fields(section)]
            lines.append("")
        lines += ["[pipeline]", f"reuse = {_render(self.reuse)}", ""]
        return "\n".join(lines)

    @classmethod
    def from_ini(cls, text: str) -> "PipelineConfig":
        parser = configparser.ConfigParser()
        parser.read_string(text)
        unknown = set(parser.sections()) - set(SECTIONS) - {"pipeline"}
        if unknown:
            raise ValueError(f"unknown config sections: {sorted(unknown)}")
        cfg = cls()
        overrides: dict = {}
        for name in SECTIONS:
            if not parser.has_section(name):
                continue
            section = getattr(cfg, name)
            types = {f.name: f for f in dataclasses.fields(section)}
            values = {}
            for key, raw in parser[name].items():
                if key not in types:
                    raise ValueError(f"unknown key {name}.{key}")
                values[key] = _parse(raw, getattr(section, key), key)
            overrides[name] = values
        if parser.has_section("pipeline"):
            for key in parser["pipeline"]:
                if key != "reuse":
                    raise ValueError(f"unknown key pipeline.{key}")
            overrides["reuse"] = parser.getboolean("pipeline", "reuse")
        return cfg.replace(**overrides)

    @classmethod
    def load(cls, path: str | Path) -> "PipelineConfig":
        return cls.from_ini(Path(path).read_text(encoding="utf-8"))


SECTIONS = ("aggregation", "relatedness", "taxonomy", "cluster", "label", "ecg")


def _render(value) -> str:
    if value is None:
        return "none"
    if isinstance(value, bool):
        return "on" if value else "off"
    return str(value)


def _parse(raw: str, default, key: str):
    raw = raw.strip()
    if key == "max_depth":
        return None if raw.lower() == "none" else int(raw)
    if isinstance(default, bool):
        return raw.lower() in ("1", "true", "yes", "on")
    if isinstance(default, int):
        return int(raw)
    if isinstance(default, float):
        return float(raw)
    return raw
