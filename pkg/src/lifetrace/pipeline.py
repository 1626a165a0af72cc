"""End-to-end footprint generation for one persona, and the run driver."""

from __future__ import annotations

import hashlib
import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .artifacts import ArtifactEngine, GenerationFailed, OutlineFailed
from .demographics import DemographicPrior, sample_draw
from .event_forest import build_forest
from .event_memory import EventMemory, build_memory, retrieve_seeds
from .footprint import DigitalFootprint, assemble, export_ics, export_jsonl
from .gateway import BudgetExceeded, Gateway
from .persona import generate_profile

logger = logging.getLogger(__name__)


def persona_seed(run_seed: int, index: int) -> int:
    digest = hashlib.sha256(f"{run_seed}:{index}".encode()).digest()
    return int.from_bytes(digest[:4], "big")


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def canonical_hash(obj) -> str:
    return hashlib.sha256(json.dumps(obj, sort_keys=True, ensure_ascii=False).encode("utf-8")).hexdigest()


@dataclass
class PersonaResult:
    persona_id: str
    footprint: DigitalFootprint | None = None
    error: str | None = None
    warnings: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.footprint is not None


def generate_footprint(
    gateway: Gateway,
    prior: DemographicPrior,
    memory: EventMemory,
    persona_id: str,
    seed: int,
    *,
    forest_cap: int = 300,
    max_cycles: int = 3,
    workers: int = 1,
) -> tuple[DigitalFootprint, list[str]]:
    draw = sample_draw(prior, seed)
    profile = generate_profile(gateway, draw)
    bundle = retrieve_seeds(gateway, profile, memory, seed)
    forest = build_forest(gateway, bundle, profile, forest_cap, workers=workers)
    engine = ArtifactEngine(gateway, max_cycles)
    warnings = list(memory.warnings) + list(forest.warnings)

    def make(node):
        try:
            return engine.refine(node.payload, profile, event_id=node.id, scope=f"{persona_id}:{node.id}")
        except (GenerationFailed, OutlineFailed) as exc:
            return exc
        except BudgetExceeded as exc:
            if exc.scope is None:  # the run cap, not this artifact's
                raise
            return exc

    artifacts = []
    cycles = approved = 0
    with ThreadPoolExecutor(max_workers=workers) as pool:
        for node, result in zip(forest.nodes, pool.map(make, forest.nodes)):
            if isinstance(result, Exception):
                warnings.append(f"event {node.id}: no artifact ({result})")
                continue
            artifacts.append(result.artifact)
            cycles += result.cycles_used
            approved += result.approved
    provenance = {
        "persona_id": persona_id,
        "persona_seed": seed,
        "backend": gateway.provider_id,
        "embedder": gateway.embedder.provider_id if gateway.embedder else None,
        "draw": draw.attributes,
        "node_count": forest.node_count,
        "artifact_count": len(artifacts),
        "approved_artifacts": approved,
        "critique_cycles": cycles,
        "warning_count": len(warnings),
    }
    return assemble(persona_id, profile, forest, artifacts, provenance), warnings


def write_footprint(footprint: DigitalFootprint, out_dir: Path, extra_provenance: dict) -> dict:
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "profile.json").write_text(
        json.dumps(footprint.profile.to_dict(), ensure_ascii=False, indent=2) + "\n", encoding="utf-8")
    footprint.forest.save(out_dir / "forest.json", out_dir / "trace.json")
    export_jsonl(footprint, out_dir / "footprint.jsonl")
    export_ics(footprint, out_dir / "calendar.ics")
    files = {name: _sha256(out_dir / name)
             for name in ("profile.json", "forest.json", "trace.json", "footprint.jsonl", "calendar.ics")}
    prov = {**footprint.provenance, **extra_provenance, "files": files}
    prov["provenance_hash"] = canonical_hash(prov)
    (out_dir / "provenance.json").write_text(json.dumps(prov, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    footprint.provenance = prov
    return prov


def prepare_memory(gateway: Gateway, memory_path: str | None, descriptions_path: str, per_persona: int,
                   seed: int) -> EventMemory:
    if memory_path:
        return EventMemory.load(memory_path)
    descriptions = read_descriptions(descriptions_path)
    return build_memory(gateway, descriptions, per_persona, seed=seed)


def read_descriptions(path: str | Path) -> list[str]:
    text = Path(path).read_text(encoding="utf-8")
    if text.lstrip().startswith("["):
        return [str(d) for d in json.loads(text)]
    return [line.strip() for line in text.splitlines() if line.strip() and not line.startswith("#")]


def run(gateway: Gateway, prior: DemographicPrior, memory: EventMemory, *, personas: int, seed: int,
        out_dir: Path, forest_cap: int, max_cycles: int, workers: int, config_hash: str) -> list[PersonaResult]:
    """Generate and write every persona; failures are recorded, not raised."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    def one(i: int) -> PersonaResult:
        pid = f"persona-{i:03d}"
        try:
            fp, warnings = generate_footprint(gateway, prior, memory, pid, persona_seed(seed, i),
                                              forest_cap=forest_cap, max_cycles=max_cycles, workers=workers)
        except Exception as exc:  # one persona must not sink the run
            logger.error("%s failed: %s: %s", pid, type(exc).__name__, exc)
            return PersonaResult(pid, error=f"{type(exc).__name__}: {exc}")
        write_footprint(fp, out_dir / pid, {"run_seed": seed, "config_hash": config_hash})
        return PersonaResult(pid, fp, warnings=warnings)

    with ThreadPoolExecutor(max_workers=max(1, min(workers, personas))) as pool:
        results = list(pool.map(one, range(personas)))
    summary = {
        "seed": seed,
        "config_hash": config_hash,
        "personas": [
            {"persona_id": r.persona_id, "ok": r.ok, "error": r.error,
             "provenance_hash": r.footprint.provenance["provenance_hash"] if r.ok else None}
            for r in results
        ],
    }
    (out_dir / "run.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return results
