"""Per-persona timeline assembly and export (JSONL envelope, iCalendar)."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

from .artifacts import Artifact, CalendarEntry, payload_from_dict, payload_to_dict
from .event_forest import EventForest, parse_local_time
from .persona import PersonaProfile

ENVELOPE_VERSION = 1
SORT_RULE = "email.send_time|message_thread.first_message|calendar_entry.start_time|reminder.due_time|wallet_pass.valid_from"


class DanglingEventRef(ValueError):
    def __init__(self, index: int, event_id):
        super().__init__(f"artifact {index} references missing event {event_id!r}")
        self.index = index
        self.event_id = event_id


class FootprintIOError(OSError):
    pass


@dataclass
class DigitalFootprint:
    persona_id: str
    profile: PersonaProfile
    forest: EventForest
    artifacts: list[Artifact]
    provenance: dict = field(default_factory=dict)


def assemble(persona_id: str, profile: PersonaProfile, forest: EventForest, artifacts: Iterable[Artifact],
             provenance: dict | None = None) -> DigitalFootprint:
    artifacts = list(artifacts)
    for i, a in enumerate(artifacts):
        if a.event_id not in forest:
            raise DanglingEventRef(i, a.event_id)
    # sorted() is stable, so equal timestamps keep input order.
    ordered = sorted(artifacts, key=lambda a: parse_local_time(a.timestamp()))
    prov = dict(provenance or {})
    prov.setdefault("sort_rule", SORT_RULE)
    return DigitalFootprint(persona_id, profile, forest, ordered, prov)


def to_envelope(persona_id: str, artifact: Artifact) -> dict:
    return {
        "version": ENVELOPE_VERSION,
        "persona_id": persona_id,
        "event_id": artifact.event_id,
        "kind": artifact.kind,
        "direction": artifact.direction,
        "payload": payload_to_dict(artifact.payload),
    }


def from_envelope(record: dict) -> Artifact:
    if record.get("version", ENVELOPE_VERSION) != ENVELOPE_VERSION:
        raise ValueError(f"unsupported envelope version {record.get('version')!r}")
    return Artifact(record["kind"], record["direction"], record["event_id"],
                    payload_from_dict(record["kind"], record["payload"]))


def write_jsonl(persona_id: str, artifacts: Iterable[Artifact], path: str | Path) -> int:
    n = 0
    try:
        with Path(path).open("w", encoding="utf-8") as fh:
            for a in artifacts:
                fh.write(json.dumps(to_envelope(persona_id, a), ensure_ascii=False, sort_keys=True) + "\n")
                n += 1
    except OSError as exc:
        raise FootprintIOError(f"cannot write {path}: {exc}") from exc
    return n


def export_jsonl(footprint: DigitalFootprint, path: str | Path) -> int:
    return write_jsonl(footprint.persona_id, footprint.artifacts, path)


def load_jsonl(path: str | Path) -> list[Artifact]:
    with Path(path).open(encoding="utf-8") as fh:
        return [from_envelope(json.loads(line)) for line in fh if line.strip()]


# --- iCalendar -----------------------------------------------------------------

def ics_time(ts: str) -> str:
    """Floating local time: 2024-03-01T09:00:00 -> 20240301T090000."""
    return parse_local_time(ts).strftime("%Y%m%dT%H%M%S")


def _escape(text: str) -> str:
    return (text.replace("\\", "\\\\").replace(";", "\\;").replace(",", "\\,")
            .replace("\r\n", "\\n").replace("\n", "\\n"))


def _fold(line: str) -> list[str]:
    # Content lines are limited to 75 octets; continuation lines start with a space.
    out, current, size = [], "", 0
    for ch in line:
        n = len(ch.encode("utf-8"))
        limit = 75 if not out else 74
        if size + n > limit:
            out.append(current)
            current, size = "", 0
        current += ch
        size += n
    out.append(current)
    return [out[0]] + [" " + part for part in out[1:]]


def render_ics(persona_id: str, entries: Iterable[tuple[int, CalendarEntry]]) -> str:
    lines = ["BEGIN:VCALENDAR", "VERSION:2.0", "PRODID:-//lifetrace//footprint export//EN", "CALSCALE:GREGORIAN"]
    seen: dict[str, int] = {}
    for event_id, entry in entries:
        uid = f"{persona_id}:{event_id}"
        # One event can in principle own several entries; keep UIDs unique.
        if uid in seen:
            seen[uid] += 1
            uid = f"{uid}:{seen[uid]}"
        else:
            seen[uid] = 0
        lines += ["BEGIN:VEVENT", f"UID:{uid}", f"DTSTART:{ics_time(entry.start_time)}",
                  f"DTEND:{ics_time(entry.end_time)}", f"SUMMARY:{_escape(entry.title)}"]
        if entry.location:
            lines.append(f"LOCATION:{_escape(entry.location)}")
        lines.append("END:VEVENT")
    lines.append("END:VCALENDAR")
    folded = [part for line in lines for part in _fold(line)]
    return "\r\n".join(folded) + "\r\n"


def export_ics(footprint: DigitalFootprint, path: str | Path) -> int:
    entries = [(a.event_id, a.payload) for a in footprint.artifacts if a.kind == "calendar_entry"]
    text = render_ics(footprint.persona_id, entries)
    try:
        Path(path).write_bytes(text.encode("utf-8"))
    except OSError as exc:
        raise FootprintIOError(f"cannot write {path}: {exc}") from exc
    return len(entries)
