"""Run configuration for the ``generate`` command."""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field
from decimal import Decimal
from importlib import resources
from pathlib import Path

from .artifacts import MAX_CYCLES_CEILING
from .event_forest import DEFAULT_CAP
from .gateway import PER_ARTIFACT_BOUND_USD
from .providers import ConfigError

DATA = resources.files("lifetrace") / "data"


def data_path(name: str) -> str:
    return str(DATA / name)


@dataclass
class RunConfig:
    provider_config: str | None = None
    prior: str = field(default_factory=lambda: data_path("example_prior.json"))
    personas: int = 1
    seed: int = 0
    forest_cap: int = DEFAULT_CAP
    allow_large_cap: bool = False
    max_cycles: int = 3
    out_dir: str = "out"
    budget_cap_usd: str | None = None
    memory: str | None = None
    descriptions: str = field(default_factory=lambda: data_path("persona_descriptions.txt"))
    per_persona: int = 10
    workers: int = 4

    def __post_init__(self):
        if self.personas < 1:
            raise ConfigError("personas must be positive")
        if self.forest_cap < 1 or self.per_persona < 1 or self.workers < 1:
            raise ConfigError("forest_cap, per_persona and workers must be positive")
        if self.forest_cap > DEFAULT_CAP and not self.allow_large_cap:
            raise ConfigError(f"forest_cap above {DEFAULT_CAP} needs allow_large_cap")
        if not 1 <= self.max_cycles <= MAX_CYCLES_CEILING:
            raise ConfigError(f"max_cycles must be in [1, {MAX_CYCLES_CEILING}]")

    @property
    def budget_cap(self) -> Decimal:
        """Explicit cap, else the per-artifact bound times the most artifacts the run can emit."""
        if self.budget_cap_usd is not None:
            return Decimal(str(self.budget_cap_usd))
        return PER_ARTIFACT_BOUND_USD * self.personas * self.forest_cap

    @classmethod
    def load(cls, path: str | Path, **overrides) -> "RunConfig":
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read run config {path}: {exc}") from exc
        base = Path(path).parent
        for key in ("provider_config", "prior", "memory", "descriptions"):
            if data.get(key) and not Path(data[key]).is_absolute():
                data[key] = str(base / data[key])
        data.update({k: v for k, v in overrides.items() if v is not None})
        unknown = set(data) - set(cls.__dataclass_fields__)
        if unknown:
            raise ConfigError(f"unknown run config keys: {sorted(unknown)}")
        return cls(**data)

    def fingerprint(self, provider: dict | None = None) -> str:
        """Hash of everything that determines output bytes (the output dir excluded)."""
        d = asdict(self)
        d.pop("out_dir")
        d.pop("workers")
        for key in ("prior", "descriptions", "memory", "provider_config"):
            if d.get(key):
                p = Path(d[key])
                d[key] = hashlib.sha256(p.read_bytes()).hexdigest() if p.is_file() else d[key]
        d["provider"] = provider or {}
        return hashlib.sha256(json.dumps(d, sort_keys=True).encode()).hexdigest()
