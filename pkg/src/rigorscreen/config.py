"""Pipeline configuration: a JSON file with paths, seeds, and stage
settings. Seeds are carried into every report for provenance."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path

from . import criteria as criteria_mod
from .adapters import AdapterSpec

ENV_PORT = "RIGORSCREEN_PORT"

DEFAULT_SEEDS = {
    "sample": 0,
    "queue": 1,
    "controls": 2,
    "evidence": 3,
    "ensemble": 4,
}


@dataclass
class EnsembleSettings:
    family: str = "logistic"
    fraction: float = 0.8
    trials: int = 100


@dataclass
class PipelineConfig:
    corpus_dir: str = ""
    criteria: list[str] = field(default_factory=list)
    detectors: list[str] = field(default_factory=lambda: [
        "trn-scanner", "nct-naive", "opencode-screener",
    ])
    adapters: list[str] = field(default_factory=list)
    seeds: dict[str, int] = field(default_factory=lambda: dict(DEFAULT_SEEDS))
    ensemble: EnsembleSettings = field(default_factory=EnsembleSettings)
    output_dir: str = "out"
    port: int = 8000
    control_size: int = 100
    lease_timeout_seconds: float = 15 * 60.0

    def __post_init__(self):
        for criterion in self.criteria:
            criteria_mod.validate_criterion(criterion)
        merged = dict(DEFAULT_SEEDS)
        merged.update(self.seeds)
        self.seeds = merged
        if isinstance(self.ensemble, dict):
            self.ensemble = EnsembleSettings(**self.ensemble)

    @property
    def effective_port(self) -> int:
        """The configured port; the environment variable overrides it."""
        env = os.environ.get(ENV_PORT)
        return int(env) if env else self.port

    @classmethod
    def from_json_file(cls, path: str | Path) -> "PipelineConfig":
        obj = json.loads(Path(path).read_text(encoding="utf-8"))
        return cls(**obj)

    def to_dict(self) -> dict:
        return {
            "corpus_dir": self.corpus_dir,
            "criteria": list(self.criteria),
            "detectors": list(self.detectors),
            "adapters": list(self.adapters),
            "seeds": dict(self.seeds),
            "ensemble": {
                "family": self.ensemble.family,
                "fraction": self.ensemble.fraction,
                "trials": self.ensemble.trials,
            },
            "output_dir": self.output_dir,
            "port": self.port,
            "control_size": self.control_size,
            "lease_timeout_seconds": self.lease_timeout_seconds,
        }

    def validate_paths(self):
        """Referenced paths must exist before a run starts."""
        missing = []
        if self.corpus_dir and not Path(self.corpus_dir).is_dir():
            missing.append(self.corpus_dir)
        for entry in self.adapters:
            if not Path(entry).is_file():
                missing.append(entry)
        if missing:
            raise FileNotFoundError(f"missing configured paths: {missing}")


def load_adapter_entry(path: str | Path) -> tuple[AdapterSpec, Path]:
    """An adapter entry file holds AdapterSpec fields plus a `source` key
    naming the tool's native output, resolved relative to the entry."""
    path = Path(path)
    obj = json.loads(path.read_text(encoding="utf-8"))
    source = obj.pop("source", None)
    if not source:
        raise ValueError(f"{path}: adapter entry needs a 'source' path")
    spec = AdapterSpec(**obj)
    source_path = Path(source)
    if not source_path.is_absolute():
        source_path = path.parent / source_path
    return spec, source_path
