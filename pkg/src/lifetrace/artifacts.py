"""Artifact types and the outline -> generate -> critique -> revise loop."""

from __future__ import annotations

import json
import logging
from dataclasses import asdict, dataclass, field, fields
from typing import Any, NamedTuple, Union

from . import prompts
from .event_forest import ExpandedEvent, parse_local_time
from .gateway import (
    Gateway,
    GenerationRequest,
    NoJsonFound,
    ProviderUnavailable,
    SchemaViolation,
    ask_json,
    extract_json,
    validate_json,
)
from .persona import PersonaProfile
from .schemas import ARTIFACT_KINDS, CRITIQUE_AXES, DIRECTIONS, PASS_KINDS, is_valid_email

logger = logging.getLogger(__name__)

MAX_CYCLES_CEILING = 5
DEFAULT_MAX_CYCLES = 3


class OutlineFailed(RuntimeError):
    pass


class GenerationFailed(RuntimeError):
    pass


class RevisionFailed(RuntimeError):
    pass


def _ts_ok(value: str) -> bool:
    try:
        parse_local_time(value)
        return True
    except (TypeError, ValueError):
        return False


@dataclass(frozen=True)
class EmailArtifact:
    sender_name: str
    from_address: str
    to_address: str
    send_time: str
    subject: str
    body: str

    def problems(self) -> list[str]:
        out = [f"{f.name}: empty" for f in fields(self) if not getattr(self, f.name)]
        for key in ("from_address", "to_address"):
            if getattr(self, key) and not is_valid_email(getattr(self, key)):
                out.append(f"{key}: invalid address {getattr(self, key)!r}")
        if self.send_time and not _ts_ok(self.send_time):
            out.append(f"send_time: unparseable {self.send_time!r}")
        return out

    def timestamp(self) -> str:
        return self.send_time

    def text(self) -> str:
        return f"{self.subject}\n\n{self.body}"


@dataclass(frozen=True)
class Message:
    sender: str
    send_time: str
    text: str


@dataclass(frozen=True)
class MessageThread:
    participants: tuple[str, ...]
    messages: tuple[Message, ...]

    @classmethod
    def from_dict(cls, d: dict) -> "MessageThread":
        return cls(tuple(d["participants"]), tuple(Message(**m) for m in d["messages"]))

    def to_dict(self) -> dict:
        return {"participants": list(self.participants), "messages": [asdict(m) for m in self.messages]}

    def problems(self) -> list[str]:
        out = []
        if len(self.participants) < 2:
            out.append("participants: need at least two")
        if not self.messages:
            out.append("messages: empty")
        prev = None
        for i, m in enumerate(self.messages):
            if m.sender not in self.participants:
                out.append(f"messages.{i}.sender: {m.sender!r} not a participant")
            if not _ts_ok(m.send_time):
                out.append(f"messages.{i}.send_time: unparseable")
                continue
            t = parse_local_time(m.send_time)
            if prev is not None and t < prev:
                out.append(f"messages.{i}.send_time: goes backwards")
            prev = t
        return out

    def timestamp(self) -> str:
        return self.messages[0].send_time

    def text(self) -> str:
        return "\n".join(f"{m.sender}: {m.text}" for m in self.messages)


@dataclass(frozen=True)
class CalendarEntry:
    title: str
    start_time: str
    end_time: str
    attendees: tuple[str, ...] = ()
    location: str = ""

    @classmethod
    def from_dict(cls, d: dict) -> "CalendarEntry":
        return cls(d["title"], d["start_time"], d["end_time"], tuple(d.get("attendees") or ()), d.get("location") or "")

    def to_dict(self) -> dict:
        return {"title": self.title, "start_time": self.start_time, "end_time": self.end_time,
                "location": self.location, "attendees": list(self.attendees)}

    def problems(self) -> list[str]:
        if not self.title:
            return ["title: empty"]
        if not (_ts_ok(self.start_time) and _ts_ok(self.end_time)):
            return ["start_time: unparseable times"]
        if parse_local_time(self.end_time) < parse_local_time(self.start_time):
            return ["end_time: precedes start_time"]
        return []

    def timestamp(self) -> str:
        return self.start_time

    def text(self) -> str:
        where = f" at {self.location}" if self.location else ""
        return f"{self.title}{where}, {self.start_time} to {self.end_time}"


@dataclass(frozen=True)
class Reminder:
    title: str
    due_time: str
    note: str = ""

    def problems(self) -> list[str]:
        out = [] if self.title else ["title: empty"]
        if not _ts_ok(self.due_time):
            out.append("due_time: unparseable")
        return out

    def timestamp(self) -> str:
        return self.due_time

    def text(self) -> str:
        return f"{self.title}\n{self.note}".strip()


@dataclass(frozen=True)
class WalletPass:
    pass_kind: str
    title: str
    reference_code: str
    valid_from: str
    valid_until: str

    def problems(self) -> list[str]:
        out = []
        if self.pass_kind not in PASS_KINDS:
            out.append(f"pass_kind: {self.pass_kind!r} not in {PASS_KINDS}")
        if not (_ts_ok(self.valid_from) and _ts_ok(self.valid_until)):
            out.append("valid_from: unparseable times")
        elif parse_local_time(self.valid_until) < parse_local_time(self.valid_from):
            out.append("valid_until: precedes valid_from")
        return out

    def timestamp(self) -> str:
        return self.valid_from

    def text(self) -> str:
        return f"{self.title} ({self.pass_kind}) ref {self.reference_code}"


Payload = Union[EmailArtifact, MessageThread, CalendarEntry, Reminder, WalletPass]

KIND_TYPES: dict[str, type] = {
    "email": EmailArtifact,
    "message_thread": MessageThread,
    "calendar_entry": CalendarEntry,
    "reminder": Reminder,
    "wallet_pass": WalletPass,
}


def payload_from_dict(kind: str, d: dict) -> Payload:
    cls = KIND_TYPES[kind]
    if hasattr(cls, "from_dict"):
        return cls.from_dict(d)
    names = {f.name for f in fields(cls)}
    return cls(**{k: v if v is not None else "" for k, v in d.items() if k in names})


def payload_to_dict(payload: Payload) -> dict:
    if hasattr(payload, "to_dict"):
        return payload.to_dict()
    return asdict(payload)


def payload_problems(kind: str, d: Any) -> list[str]:
    problems = validate_json(d, kind)
    if problems:
        return problems
    return payload_from_dict(kind, d).problems()


@dataclass(frozen=True)
class Artifact:
    kind: str
    direction: str
    event_id: int
    payload: Payload

    def __post_init__(self):
        if self.kind not in KIND_TYPES:
            raise ValueError(f"unknown artifact kind {self.kind!r}")
        if not isinstance(self.payload, KIND_TYPES[self.kind]):
            raise TypeError(f"payload {type(self.payload).__name__} does not match kind {self.kind!r}")
        if self.direction not in DIRECTIONS:
            raise ValueError(f"direction must be one of {DIRECTIONS}")

    def problems(self) -> list[str]:
        return self.payload.problems()

    def timestamp(self) -> str:
        return self.payload.timestamp()

    def text(self) -> str:
        return self.payload.text()


@dataclass(frozen=True)
class Critique:
    axis: str
    verdict: str
    feedback: str

    def __post_init__(self):
        if self.axis not in CRITIQUE_AXES:
            raise ValueError(f"unknown critique axis {self.axis!r}")
        if self.verdict == "revise" and not self.feedback.strip():
            raise ValueError("revise verdict needs feedback")


class ArtifactChoice(NamedTuple):
    kind: str
    direction: str
    pass_kind: str | None = None


FALLBACK_CHOICE = ArtifactChoice("email", "received")


@dataclass
class RefinedArtifact:
    artifact: Artifact
    cycles_used: int
    approved: bool
    history: list[list[Critique]] = field(default_factory=list)


def _event_json(event: ExpandedEvent) -> str:
    return json.dumps(event.to_dict(), ensure_ascii=False, indent=2)


class ArtifactEngine:
    """Generator/critic agents bound to one gateway.

    ``scope`` keys every call of one artifact's refinement into the same
    cost-ledger scope, which is what the per-artifact budget guard checks.
    """

    def __init__(self, gateway: Gateway, max_cycles: int = DEFAULT_MAX_CYCLES):
        if not 1 <= max_cycles <= MAX_CYCLES_CEILING:
            raise ValueError(f"max_cycles must be in [1, {MAX_CYCLES_CEILING}]")
        self.gateway = gateway
        self.max_cycles = max_cycles

    def _request(self, role, prompt, system=prompts.ARTIFACT_SYSTEM, scope=None, **context):
        return GenerationRequest(system_prompt=system, user_prompt=prompt, agent_role=role,
                                 context=context, scope=scope)

    def choose_artifact_kind(self, event: ExpandedEvent, profile: PersonaProfile, scope: str | None = None) -> ArtifactChoice:
        req = self._request(
            "artifact_route",
            prompts.ARTIFACT_CHOICE.substitute(full_name=profile.name, event=_event_json(event)),
            scope=scope, event=event.to_dict(),
        )
        req.schema_hint = "artifact_choice"
        try:
            data = extract_json(self.gateway.complete(req).text, "artifact_choice")
        except (SchemaViolation, NoJsonFound):
            logger.info("unparseable artifact choice for %r; falling back to email/received", event.event)
            return FALLBACK_CHOICE
        pass_kind = data.get("pass_kind") if data["kind"] == "wallet_pass" else None
        return ArtifactChoice(data["kind"], data["direction"], pass_kind)

    def generate_outline(self, event: ExpandedEvent, profile: PersonaProfile, direction: str,
                         kind: str = "email", scope: str | None = None) -> str:
        prompt = prompts.OUTLINE.substitute(
            label=prompts.KIND_LABELS[kind], full_name=profile.name, sent_or_received=direction,
            event=_event_json(event),
        )
        for _ in range(2):
            text = self.gateway.complete(
                self._request("artifact_outline", prompt, scope=scope, event=event.to_dict(), kind=kind)
            ).text.strip()
            if text:
                return text
        raise OutlineFailed(f"empty outline for {event.event!r}")

    def generate_artifact(self, outline: str, event: ExpandedEvent, profile: PersonaProfile,
                          choice: ArtifactChoice, event_id: int = 0, scope: str | None = None) -> Artifact:
        if not outline.strip():
            raise ValueError("outline must be non-empty")
        kind = choice.kind
        prompt = prompts.GENERATION.substitute(
            label=prompts.KIND_LABELS[kind], contract=prompts.OUTPUT_CONTRACTS[kind],
            full_name=profile.name, email=profile.email, sent_or_received=choice.direction,
            outline=outline, event=_event_json(event),
        )
        req = self._request(
            "artifact_generate", prompt, scope=scope, event=event.to_dict(), direction=choice.direction,
            pass_kind=choice.pass_kind, participants_pool=profile.social_graph,
            profile={"name": profile.name, "email": profile.email},
        )
        try:
            data = ask_json(self.gateway, req, kind, check=lambda d: payload_from_dict(kind, d).problems())
        except (SchemaViolation, NoJsonFound) as exc:
            raise GenerationFailed(str(exc)) from exc
        return Artifact(kind, choice.direction, event_id, payload_from_dict(kind, data))

    def critique(self, artifact: Artifact, event: ExpandedEvent, profile: PersonaProfile,
                 scope: str | None = None) -> list[Critique]:
        label = prompts.KIND_LABELS[artifact.kind]
        body = json.dumps(payload_to_dict(artifact.payload), ensure_ascii=False, indent=2)
        out = []
        for axis in CRITIQUE_AXES:
            prompt = prompts.REVIEW.substitute(
                focus=prompts.CRITIC_FOCUS[axis], label=label, event=_event_json(event),
                profile=prompts.dump(profile.summary()), artifact=body,
            )
            req = self._request(f"critic_{axis}", prompt, system=prompts.CRITIC_SYSTEM, scope=scope,
                                axis=axis, artifact=payload_to_dict(artifact.payload))
            req.schema_hint = "critique"
            try:
                data = extract_json(self.gateway.complete(req).text, "critique")
                feedback = data.get("feedback", "").strip()
                if data["verdict"] == "revise" and not feedback:
                    raise SchemaViolation(["feedback: required when verdict is revise"])
                out.append(Critique(axis, data["verdict"], feedback or "approved"))
            except (SchemaViolation, NoJsonFound, ProviderUnavailable) as exc:
                logger.warning("critic %s unavailable for event %d: %s", axis, artifact.event_id, exc)
                out.append(Critique(axis, "approve", "critic unavailable"))
        return out

    def revise(self, artifact: Artifact, critiques: list[Critique], scope: str | None = None) -> Artifact:
        """Apply critic feedback; keeps the prior version if revision fails."""
        flagged = [c for c in critiques if c.verdict == "revise"]
        if not flagged:
            raise ValueError("revise needs at least one revise verdict")
        kind = artifact.kind
        suggestions = "\n".join(f"- [{c.axis}] {c.feedback}" for c in flagged)
        original = payload_to_dict(artifact.payload)
        prompt = prompts.REVISION.substitute(
            label=prompts.KIND_LABELS[kind], contract=prompts.OUTPUT_CONTRACTS[kind],
            original=json.dumps(original, ensure_ascii=False, indent=2), suggestions=suggestions,
        )
        req = self._request("artifact_revise", prompt, scope=scope, artifact=original,
                            feedback=[c.feedback for c in flagged])
        req.schema_hint = kind
        try:
            data = extract_json(self.gateway.complete(req).text, kind)
            problems = payload_from_dict(kind, data).problems()
            if problems:
                raise SchemaViolation(problems, data)
        except (SchemaViolation, NoJsonFound) as exc:
            logger.warning("revision failed (%s); keeping prior version", exc)
            return artifact
        return Artifact(kind, artifact.direction, artifact.event_id, payload_from_dict(kind, data))

    def refine(self, event: ExpandedEvent, profile: PersonaProfile, max_cycles: int | None = None, *,
               event_id: int = 0, choice: ArtifactChoice | None = None, scope: str | None = None) -> RefinedArtifact:
        max_cycles = self.max_cycles if max_cycles is None else max_cycles
        if not 1 <= max_cycles <= MAX_CYCLES_CEILING:
            raise ValueError(f"max_cycles must be in [1, {MAX_CYCLES_CEILING}]")
        if choice is None:
            choice = self.choose_artifact_kind(event, profile, scope)
        outline = self.generate_outline(event, profile, choice.direction, choice.kind, scope)
        artifact = self.generate_artifact(outline, event, profile, choice, event_id, scope)
        history = []
        for cycle in range(1, max_cycles + 1):
            critiques = self.critique(artifact, event, profile, scope)
            history.append(critiques)
            if all(c.verdict == "approve" for c in critiques):
                return RefinedArtifact(artifact, cycle, True, history)
            artifact = self.revise(artifact, critiques, scope)
        return RefinedArtifact(artifact, max_cycles, False, history)


def generation_call_bound(max_cycles: int) -> int:
    """Upper bound on generation calls per artifact: outline + generate + cycles x (3 critics + revise)."""
    return 1 + 1 + max_cycles * (len(CRITIQUE_AXES) + 1)


__all__ = [
    "ARTIFACT_KINDS", "Artifact", "ArtifactChoice", "ArtifactEngine", "CalendarEntry", "Critique",
    "EmailArtifact", "GenerationFailed", "Message", "MessageThread", "OutlineFailed", "RefinedArtifact",
    "Reminder", "RevisionFailed", "WalletPass", "generation_call_bound", "payload_from_dict",
    "payload_problems", "payload_to_dict",
]
