"""Event Agent stage 2: align seeds, expand breadth-first with reflection."""

from __future__ import annotations

import json
import logging
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from datetime import datetime
from pathlib import Path
from typing import Any

from . import prompts
from .event_memory import SeedBundle, SeedEvent
from .gateway import (
    Gateway,
    GenerationRequest,
    NoJsonFound,
    SchemaViolation,
    ask_json,
    validate_json,
)
from .persona import PersonaProfile

logger = logging.getLogger(__name__)

DEFAULT_CAP = 300


class AlignmentFailed(RuntimeError):
    pass


class ExpansionFailed(RuntimeError):
    pass


class ReflectionFailed(RuntimeError):
    pass


def parse_local_time(ts: str) -> datetime:
    dt = datetime.fromisoformat(ts)
    if dt.tzinfo is not None:
        raise ValueError(f"{ts!r} carries a time zone")
    return dt


@dataclass(frozen=True)
class ExpandedEvent:
    event: str
    detailed_description: str
    frequency: str
    location: str
    other_participants: tuple[str, ...]
    start_time: str
    end_time: str

    @classmethod
    def from_dict(cls, d: dict) -> "ExpandedEvent":
        parts = d.get("other_participants") or []
        if isinstance(parts, str):
            parts = [parts] if parts.strip() else []
        return cls(d["event"], d["detailed_description"], d["frequency"], d.get("location") or "",
                   tuple(parts), d["start_time"], d["end_time"])

    def to_dict(self) -> dict:
        out = asdict(self)
        out["other_participants"] = list(self.other_participants)
        return out


def event_violations(d: Any) -> list[str]:
    problems = validate_json(d, "expanded_event")
    if problems:
        return problems
    try:
        start, end = parse_local_time(d["start_time"]), parse_local_time(d["end_time"])
    except ValueError as exc:
        return [f"start_time: {exc}"]
    if end < start:
        return [f"end_time: {d['end_time']} precedes start_time {d['start_time']}"]
    return []


def filter_participants(event: ExpandedEvent, profile: PersonaProfile, warnings: list[str] | None = None) -> ExpandedEvent:
    allowed = set(profile.social_graph)
    kept = tuple(p for p in event.other_participants if p in allowed)
    if len(kept) != len(event.other_participants):
        dropped = [p for p in event.other_participants if p not in allowed]
        msg = f"dropped unknown participants {dropped} from {event.event!r}"
        logger.warning(msg)
        if warnings is not None:
            warnings.append(msg)
        event = ExpandedEvent(**{**event.__dict__, "other_participants": kept})
    return event


def _ctx(profile: PersonaProfile, **extra) -> dict:
    return {"participants_pool": profile.social_graph, "occupation": profile.occupation, **extra}


def align_seed(gateway: Gateway, seed: SeedEvent, profile: PersonaProfile,
               warnings: list[str] | None = None) -> ExpandedEvent:
    request = GenerationRequest(
        system_prompt=prompts.EVENT_SYSTEM,
        user_prompt=prompts.ALIGN.substitute(profile=prompts.dump(profile.to_dict()), seed=prompts.dump(seed.to_dict())),
        agent_role="event_align",
        context=_ctx(profile, event=seed.to_dict()),
    )
    try:
        data = ask_json(gateway, request, "expanded_event", check=event_violations)
    except (SchemaViolation, NoJsonFound) as exc:
        raise AlignmentFailed(str(exc)) from exc
    return filter_participants(ExpandedEvent.from_dict(data), profile, warnings)


def expand_event(gateway: Gateway, node: ExpandedEvent, profile: PersonaProfile,
                 warnings: list[str] | None = None) -> list[ExpandedEvent]:
    """Children of ``node``; an empty list marks it atomic.

    Invalid children are dropped individually. A response that is not a
    JSON list even after one repair is treated as atomic.
    """
    request = GenerationRequest(
        system_prompt=prompts.EVENT_SYSTEM,
        user_prompt=prompts.EXPANSION.substitute(
            names=", ".join(profile.social_graph),
            examples=prompts.EXPANSION_EXAMPLES,
            input_event=json.dumps(node.to_dict(), ensure_ascii=False),
        ),
        agent_role="event_expand",
        context=_ctx(profile, event=node.to_dict()),
    )
    try:
        raw = ask_json(gateway, request, "expanded_events")
    except (SchemaViolation, NoJsonFound) as exc:
        msg = f"expansion of {node.event!r} failed, treated as atomic: {exc}"
        logger.warning(msg)
        if warnings is not None:
            warnings.append(msg)
        return []
    children = []
    for i, item in enumerate(raw):
        problems = event_violations(item)
        if problems:
            msg = f"child {i} of {node.event!r} dropped: {'; '.join(problems)}"
            logger.info(msg)
            if warnings is not None:
                warnings.append(msg)
            continue
        children.append(filter_participants(ExpandedEvent.from_dict(item), profile, warnings))
    return children


def reflect_event(gateway: Gateway, node: ExpandedEvent, profile: PersonaProfile,
                  parent: ExpandedEvent | None = None) -> tuple[ExpandedEvent, bool]:
    """Returns (event, reflected). A failed reflection keeps the original."""
    request = GenerationRequest(
        system_prompt=prompts.EVENT_SYSTEM,
        user_prompt=prompts.REFLECTION.substitute(
            profile=prompts.dump(profile.summary()),
            parent=prompts.dump(parent.to_dict()) if parent else "(none: this is a root event)",
            event=prompts.dump(node.to_dict()),
        ),
        agent_role="event_reflect",
        context=_ctx(profile, event=node.to_dict()),
    )
    try:
        verdict = ask_json(gateway, request, "reflection")
    except (SchemaViolation, NoJsonFound) as exc:
        logger.warning("reflection on %r failed: %s", node.event, exc)
        return node, False
    if verdict["approved"]:
        return node, True
    revised = verdict.get("revised_event")
    if revised is None or event_violations(revised):
        logger.warning("reflection revision of %r invalid; keeping original", node.event)
        return node, False
    return filter_participants(ExpandedEvent.from_dict(revised), profile), True


@dataclass
class EventNode:
    id: int
    payload: ExpandedEvent
    parent: int | None
    depth: int
    children: list[int] = field(default_factory=list)
    reflected: bool = False

    def to_dict(self) -> dict:
        return {"id": self.id, "parent": self.parent, "depth": self.depth, "children": list(self.children),
                "reflected": self.reflected, "payload": self.payload.to_dict()}


@dataclass
class EventForest:
    nodes: list[EventNode] = field(default_factory=list)
    trees: list[int] = field(default_factory=list)
    trace: list[tuple[int, int]] = field(default_factory=list)  # (node id, depth) in expansion order
    warnings: list[str] = field(default_factory=list)

    @property
    def node_count(self) -> int:
        return len(self.nodes)

    def add(self, payload: ExpandedEvent, parent: int | None, reflected: bool) -> int:
        nid = len(self.nodes)
        depth = 0 if parent is None else self.nodes[parent].depth + 1
        self.nodes.append(EventNode(nid, payload, parent, depth, reflected=reflected))
        if parent is None:
            self.trees.append(nid)
        else:
            self.nodes[parent].children.append(nid)
        return nid

    def __contains__(self, node_id) -> bool:
        return isinstance(node_id, int) and 0 <= node_id < len(self.nodes)

    def check(self, cap: int | None = None) -> list[str]:
        """Structural invariants; returns the list of problems."""
        problems = []
        if cap is not None and self.node_count > cap:
            problems.append(f"node_count {self.node_count} > cap {cap}")
        for n in self.nodes:
            if n.parent is None:
                if n.depth != 0 or n.id not in self.trees:
                    problems.append(f"root {n.id} malformed")
            else:
                p = self.nodes[n.parent]
                if n.id not in p.children or n.depth != p.depth + 1 or p.id >= n.id:
                    problems.append(f"node {n.id} link to parent {p.id} inconsistent")
            for c in n.children:
                if self.nodes[c].parent != n.id:
                    problems.append(f"child {c} of {n.id} points elsewhere")
        return problems

    def to_dict(self) -> dict:
        return {"node_count": self.node_count, "trees": list(self.trees), "nodes": [n.to_dict() for n in self.nodes]}

    @classmethod
    def from_dict(cls, d: dict) -> "EventForest":
        nodes = [EventNode(n["id"], ExpandedEvent.from_dict(n["payload"]), n["parent"], n["depth"],
                           list(n["children"]), n["reflected"]) for n in d["nodes"]]
        return cls(nodes, list(d["trees"]))

    def save(self, path: str | Path, trace_path: str | Path | None = None) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), ensure_ascii=False, indent=1), encoding="utf-8")
        if trace_path is not None:
            Path(trace_path).write_text(
                json.dumps([{"node": n, "depth": d} for n, d in self.trace]), encoding="utf-8")


def build_forest(
    gateway: Gateway,
    bundle: SeedBundle,
    profile: PersonaProfile,
    cap: int = DEFAULT_CAP,
    *,
    workers: int = 1,
    max_depth: int | None = None,
    max_children: int | None = None,
) -> EventForest:
    """Breadth-first expansion under a hard node cap.

    With ``workers > 1`` a batch of queued nodes is expanded and reflected
    concurrently, but insertion and the cap check stay sequential, so the
    result equals the single-worker forest whenever provider output does
    not depend on call order.
    """
    seeds = bundle.all()
    if not seeds:
        raise ValueError("seed bundle is empty")
    forest = EventForest()

    def align_and_reflect(seed: SeedEvent):
        try:
            ev = align_seed(gateway, seed, profile, forest.warnings)
        except AlignmentFailed as exc:
            forest.warnings.append(f"seed {seed.event!r} dropped: alignment failed ({exc})")
            return None
        return reflect_event(gateway, ev, profile)

    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        for result in pool.map(align_and_reflect, seeds[:cap]):
            if result is not None and forest.node_count < cap:
                forest.add(result[0], None, result[1])

        def grow(nid: int):
            node = forest.nodes[nid]
            if max_depth is not None and node.depth >= max_depth:
                return []
            kids = expand_event(gateway, node.payload, profile, forest.warnings)
            if max_children is not None:
                kids = kids[:max_children]
            return [reflect_event(gateway, k, profile, node.payload) for k in kids]

        queue = deque(forest.trees)
        while queue and forest.node_count < cap:
            batch = [queue.popleft() for _ in range(min(max(1, workers), len(queue)))]
            results = pool.map(grow, batch)
            for nid, kids in zip(batch, results):
                if forest.node_count >= cap:
                    break
                forest.trace.append((nid, forest.nodes[nid].depth))
                for payload, reflected in kids[: cap - forest.node_count]:
                    queue.append(forest.add(payload, nid, reflected))
    return forest
