"""Event memory: seed-event brainstorming, MinHash LSH dedup, retrieval."""

from __future__ import annotations

import hashlib
import json
import logging
import random
import re
from collections import defaultdict
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import prompts
from .gateway import BudgetExceeded, Gateway, GatewayError, GenerationRequest, ask_json, validate_json
from .persona import PersonaProfile

logger = logging.getLogger(__name__)

INDEX_VERSION = 1
DEFAULT_K = 256
DEFAULT_BANDS = 32
DEFAULT_THRESHOLD = 0.8
N_SIMILAR, N_UNIFORM, N_GENERATED = 30, 30, 40

_MERSENNE61 = (1 << 61) - 1
_TOKEN = re.compile(r"\w+", re.UNICODE)


class EmptyTokenSet(ValueError):
    pass


class SignatureMismatch(ValueError):
    pass


class MemoryFormatError(ValueError):
    pass


@dataclass(frozen=True)
class SeedEvent:
    event: str
    detailed_description: str
    frequency: str

    @classmethod
    def from_dict(cls, d: dict) -> "SeedEvent":
        return cls(d["event"], d["detailed_description"], d["frequency"])

    def to_dict(self) -> dict:
        return asdict(self)

    @property
    def text(self) -> str:
        return f"{self.event} {self.detailed_description}"


@dataclass(frozen=True)
class MinHashSignature:
    values: tuple[int, ...]
    seed: int

    @property
    def k(self) -> int:
        return len(self.values)


def tokenize(text: str) -> set[str]:
    return set(_TOKEN.findall(text.lower()))


def _token_hash(token: str) -> int:
    return int.from_bytes(hashlib.blake2b(token.encode("utf-8"), digest_size=4).digest(), "big")


def _hash_family(k: int, seed: int) -> tuple[tuple[int, ...], tuple[int, ...]]:
    rng = random.Random(seed)
    a = tuple(rng.randrange(1, _MERSENNE61) for _ in range(k))
    b = tuple(rng.randrange(0, _MERSENNE61) for _ in range(k))
    return a, b


_FAMILIES: dict[tuple[int, int], tuple[tuple[int, ...], tuple[int, ...]]] = {}


def minhash_signature(text: str, k: int = DEFAULT_K, seed: int = 0) -> MinHashSignature:
    if k < 16:
        raise ValueError("k must be >= 16")
    tokens = tokenize(text)
    if not tokens:
        raise EmptyTokenSet(f"no word tokens in {text[:40]!r}")
    return signature_of_set(tokens, k, seed)


def signature_of_set(tokens: set[str], k: int = DEFAULT_K, seed: int = 0) -> MinHashSignature:
    if not tokens:
        raise EmptyTokenSet("empty token set")
    fam = _FAMILIES.get((k, seed))
    if fam is None:
        fam = _FAMILIES[(k, seed)] = _hash_family(k, seed)
    xs = [_token_hash(t) for t in tokens]
    # Exact integer arithmetic: a*x overflows 64 bits for a drawn from [1, p).
    return MinHashSignature(tuple(min((a * x + b) % _MERSENNE61 for x in xs) for a, b in zip(*fam)), seed)


def estimate_jaccard(a: MinHashSignature, b: MinHashSignature) -> float:
    if a.k != b.k or a.seed != b.seed:
        raise SignatureMismatch(f"k/seed differ: ({a.k},{a.seed}) vs ({b.k},{b.seed})")
    return sum(x == y for x, y in zip(a.values, b.values)) / a.k


class LSHIndex:
    """Band/row bucketing of MinHash signatures."""

    def __init__(self, k: int = DEFAULT_K, bands: int = DEFAULT_BANDS):
        if k % bands:
            raise ValueError(f"bands ({bands}) must divide k ({k})")
        self.k, self.bands, self.rows = k, bands, k // bands
        self.buckets: list[dict[tuple[int, ...], list[int]]] = [defaultdict(list) for _ in range(bands)]

    def _keys(self, sig: MinHashSignature):
        for i in range(self.bands):
            yield i, sig.values[i * self.rows:(i + 1) * self.rows]

    def insert(self, key: int, sig: MinHashSignature) -> None:
        for i, band in self._keys(sig):
            self.buckets[i][band].append(key)

    def query(self, sig: MinHashSignature) -> list[int]:
        found: set[int] = set()
        for i, band in self._keys(sig):
            found.update(self.buckets[i].get(band, ()))
        return sorted(found)


def dedup(
    events: list[SeedEvent],
    threshold: float = DEFAULT_THRESHOLD,
    *,
    k: int = DEFAULT_K,
    bands: int = DEFAULT_BANDS,
    seed: int = 0,
) -> list[SeedEvent]:
    """Greedy near-duplicate removal in input order."""
    if not 0.0 < threshold < 1.0:
        raise ValueError("threshold must be in (0, 1)")
    index = LSHIndex(k, bands)
    kept: list[SeedEvent] = []
    sigs: list[MinHashSignature] = []
    for ev in events:
        try:
            sig = minhash_signature(ev.text, k, seed)
        except EmptyTokenSet:
            kept.append(ev)
            sigs.append(None)
            continue
        if any(estimate_jaccard(sig, sigs[c]) >= threshold for c in index.query(sig)):
            continue
        index.insert(len(kept), sig)
        kept.append(ev)
        sigs.append(sig)
    return kept


@dataclass
class EventMemory:
    events: list[SeedEvent]
    signatures: list[MinHashSignature | None]
    lsh_index: LSHIndex
    embeddings: np.ndarray
    embedding_provider: str = ""
    seed: int = 0
    warnings: list[str] = field(default_factory=list)

    def __post_init__(self):
        if not (len(self.events) == len(self.signatures) == len(self.embeddings)):
            raise ValueError("events, signatures and embeddings must be parallel")

    def __len__(self):
        return len(self.events)

    @classmethod
    def from_events(cls, events: list[SeedEvent], gateway: Gateway, *, k: int = DEFAULT_K,
                    bands: int = DEFAULT_BANDS, seed: int = 0, warnings: list[str] | None = None) -> "EventMemory":
        index = LSHIndex(k, bands)
        sigs: list[MinHashSignature | None] = []
        for i, ev in enumerate(events):
            try:
                sig = minhash_signature(ev.text, k, seed)
                index.insert(i, sig)
            except EmptyTokenSet:
                sig = None
            sigs.append(sig)
        emb = gateway.embed_many([ev.text for ev in events])
        provider = gateway.embedder.provider_id if gateway.embedder is not None else ""
        return cls(events, sigs, index, emb, provider, seed, list(warnings or []))

    def save(self, path: str | Path) -> Path:
        """Write events as JSONL plus a ``.index.json`` sidecar."""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", encoding="utf-8") as fh:
            for ev in self.events:
                fh.write(json.dumps(ev.to_dict(), ensure_ascii=False, sort_keys=True) + "\n")
        sidecar = {
            "version": INDEX_VERSION,
            "k": self.lsh_index.k,
            "bands": self.lsh_index.bands,
            "seed": self.seed,
            "count": len(self.events),
            "embedding_provider": self.embedding_provider,
            "signatures": [list(s.values) if s else None for s in self.signatures],
            "embeddings": self.embeddings.tolist(),
        }
        side = sidecar_path(path)
        side.write_text(json.dumps(sidecar), encoding="utf-8")
        return side

    @classmethod
    def load(cls, path: str | Path) -> "EventMemory":
        path = Path(path)
        events = [SeedEvent.from_dict(json.loads(line)) for line in path.read_text(encoding="utf-8").splitlines() if line.strip()]
        side = json.loads(sidecar_path(path).read_text(encoding="utf-8"))
        if side.get("version") != INDEX_VERSION:
            raise MemoryFormatError(f"index version {side.get('version')!r} != {INDEX_VERSION}")
        if side["count"] != len(events):
            raise MemoryFormatError("sidecar count does not match event file")
        index = LSHIndex(side["k"], side["bands"])
        sigs = []
        for i, vals in enumerate(side["signatures"]):
            sig = MinHashSignature(tuple(vals), side["seed"]) if vals is not None else None
            if sig is not None:
                index.insert(i, sig)
            sigs.append(sig)
        emb = np.asarray(side["embeddings"], dtype=np.float64).reshape(len(events), -1)
        return cls(events, sigs, index, emb, side.get("embedding_provider", ""), side["seed"])


def sidecar_path(path: Path) -> Path:
    return path.with_name(path.name + ".index.json")


def parse_seed_events(value: list, warnings: list[str], source: str = "") -> list[SeedEvent]:
    out = []
    for i, item in enumerate(value):
        problems = validate_json(item, "seed_event")
        if problems:
            msg = f"{source}event {i} skipped: {'; '.join(problems)}"
            logger.warning(msg)
            warnings.append(msg)
            continue
        out.append(SeedEvent.from_dict(item))
    return out


def brainstorm(gateway: Gateway, profile_text: str, n: int, *, role: str = "event_seed") -> list:
    request = GenerationRequest(
        system_prompt=prompts.EVENT_SYSTEM,
        user_prompt=prompts.SEED_EVENTS.substitute(num_seed_events=n, profile=profile_text),
        agent_role=role,
        context={"num_seed_events": n},
    )
    return ask_json(gateway, request, "seed_events")


def build_memory(
    gateway: Gateway,
    persona_descriptions: list[str],
    per_persona: int = 10,
    *,
    threshold: float = DEFAULT_THRESHOLD,
    k: int = DEFAULT_K,
    bands: int = DEFAULT_BANDS,
    seed: int = 0,
) -> EventMemory:
    pooled: list[SeedEvent] = []
    warnings: list[str] = []
    for i, desc in enumerate(persona_descriptions):
        try:
            raw = brainstorm(gateway, desc, per_persona, role="memory_seed")
        except BudgetExceeded:
            raise
        except GatewayError as exc:
            msg = f"description {i} failed: {exc}"
            logger.warning(msg)
            warnings.append(msg)
            continue
        pooled.extend(parse_seed_events(raw, warnings, f"description {i}: ")[:per_persona])
    kept = dedup(pooled, threshold, k=k, bands=bands, seed=seed)
    return EventMemory.from_events(kept, gateway, k=k, bands=bands, seed=seed, warnings=warnings)


@dataclass
class SeedBundle:
    similar: list[SeedEvent]
    uniform: list[SeedEvent]
    generated: list[SeedEvent]

    def all(self) -> list[SeedEvent]:
        return [*self.similar, *self.uniform, *self.generated]

    def __len__(self):
        return len(self.similar) + len(self.uniform) + len(self.generated)


def rank_similar(memory: EventMemory, query: np.ndarray, n: int = N_SIMILAR) -> list[int]:
    """Top-n memory indices by cosine similarity, ties to the lower index."""
    if len(memory) == 0:
        return []
    m = memory.embeddings
    norms = np.linalg.norm(m, axis=1) * np.linalg.norm(query)
    norms[norms == 0] = 1.0
    sims = (m @ query) / norms
    order = np.lexsort((np.arange(len(sims)), -sims))
    return [int(i) for i in order[:n]]


def generate_seed_events(gateway: Gateway, profile: PersonaProfile, n: int = N_GENERATED,
                         max_requests: int = 3) -> list[SeedEvent]:
    out: list[SeedEvent] = []
    warnings: list[str] = []
    profile_text = prompts.dump(profile.to_dict())
    for _ in range(max_requests):
        need = n - len(out)
        raw = brainstorm(gateway, profile_text + ("" if not out else f"\n\nAlready listed: {[e.event for e in out]}"), need)
        out.extend(parse_seed_events(raw, warnings))
        if len(out) >= n:
            break
    if len(out) < n:
        logger.warning("only %d of %d generated seed events were valid", len(out), n)
    return out[:n]


def retrieve_seeds(gateway: Gateway, profile: PersonaProfile, memory: EventMemory, seed: int) -> SeedBundle:
    if len(memory) == 0:
        raise ValueError("event memory is empty")
    query = gateway.embed(profile.query_digest()).values
    sim_idx = rank_similar(memory, query, N_SIMILAR)
    taken = set(sim_idx)
    rest = [i for i in range(len(memory)) if i not in taken]
    uni_idx = random.Random(seed).sample(rest, min(N_UNIFORM, len(rest)))
    generated = generate_seed_events(gateway, profile, N_GENERATED)
    return SeedBundle(
        [memory.events[i] for i in sim_idx],
        [memory.events[i] for i in uni_idx],
        generated,
    )
