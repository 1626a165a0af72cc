"""JSON schemas for every structured model output, keyed by schema id.

The ids double as ``schema_hint`` values on generation requests; the mock
provider uses them to decide what shape of JSON to emit.
"""

from __future__ import annotations

import copy
import re
from typing import Any

SCHEMA_VERSION = 1

FREQUENCIES = ["daily", "weekly", "monthly", "seasonally", "yearly", "once"]
COLORS = ["black", "blue", "brown", "gold", "gray", "green", "silver", "white"]
ARTIFACT_KINDS = ["email", "message_thread", "calendar_entry", "reminder", "wallet_pass"]
DIRECTIONS = ["sent", "received"]
PASS_KINDS = ["boarding_pass", "ticket", "membership", "coupon"]
CRITIQUE_AXES = ["event_consistency", "persona_consistency", "realism_fluency"]
VERDICTS = ["approve", "revise"]
JUDGE_AXES = ["Tone", "Fluency", "Coherence", "Informativeness", "Engagement"]

# RFC3339 date-time with no offset / zone designator.
LOCAL_TIME_PATTERN = r"^\d{4}-\d{2}-\d{2}T\d{2}:\d{2}:\d{2}(\.\d+)?$"
EMAIL_PATTERN = r"^[A-Za-z0-9._%+\-]+@[A-Za-z0-9\-]+(\.[A-Za-z0-9\-]+)+$"
EMAIL_RE = re.compile(EMAIL_PATTERN)

_text = {"type": "string", "minLength": 1}
_maybe_text = {"type": "string"}
_time = {"type": "string", "pattern": LOCAL_TIME_PATTERN}
_names = {"type": "array", "items": _text}


def _obj(required: dict[str, Any], optional: dict[str, Any] | None = None, *, closed=False) -> dict:
    props = dict(required)
    props.update(optional or {})
    out = {"type": "object", "properties": props, "required": list(required)}
    if closed:
        out["additionalProperties"] = False
    return out


_family_member = _obj(
    {"name": _text, "age": {"type": ["string", "integer"]}, "relation": _text,
     "occupation": _maybe_text, "address": _maybe_text}
)

PROFILE = _obj(
    {
        "name": _text, "surname": _text, "given_name": _text,
        "nicknames": _names,
        "locale": _text, "timezone": _text, "age": _text, "gender": _text,
        "income": _text, "ethnicity": _text, "family_setup": _text, "nationality": _text,
        "email": {"type": "string", "pattern": EMAIL_PATTERN},
        "phone": _text,
        "eye_color": {"enum": COLORS}, "hair_color": {"enum": COLORS},
        "height": _text, "weight": _text, "occupation": _text,
        "weekdays_routines": _text, "weekend_routines": _text,
        "life_events_for_holidays_and_vacations": _text,
        "family_members": {"type": "array", "items": _family_member},
        "friends": {**_names, "minItems": 5, "maxItems": 5},
        "coworkers": {**_names, "minItems": 8, "maxItems": 8},
        "home_address": _text,
    },
    {
        "middle_name": _text,
        "classmates": {**_names, "minItems": 10, "maxItems": 10},
        "office_address": _text,
        "school_address": _text,
    },
)

SEED_EVENT = _obj({"event": _text, "detailed_description": _text, "frequency": {"enum": FREQUENCIES}})
# Items are validated one by one so a single bad event does not sink the batch.
SEED_EVENTS = {"type": "array", "items": {"type": "object"}}

EXPANDED_EVENT = _obj(
    {
        "event": _text, "detailed_description": _text, "frequency": {"enum": FREQUENCIES},
        "location": _maybe_text,
        "other_participants": {"anyOf": [_names, {"type": "string", "maxLength": 0}]},
        "start_time": _time, "end_time": _time,
    }
)
EXPANDED_EVENTS = {"type": "array", "items": {"type": "object"}}

REFLECTION = {
    "type": "object",
    "properties": {"approved": {"type": "boolean"}, "revised_event": {"type": "object"}},
    "required": ["approved"],
}

ARTIFACT_CHOICE = _obj(
    {"kind": {"enum": ARTIFACT_KINDS}, "direction": {"enum": DIRECTIONS}},
    {"pass_kind": {"enum": PASS_KINDS}},
)

EMAIL = _obj(
    {
        "sender_name": _text,
        "from_address": {"type": "string", "pattern": EMAIL_PATTERN},
        "to_address": {"type": "string", "pattern": EMAIL_PATTERN},
        "send_time": _time, "subject": _text, "body": _text,
    },
    closed=True,
)
MESSAGE_THREAD = _obj(
    {
        "participants": {**_names, "minItems": 2},
        "messages": {
            "type": "array", "minItems": 1,
            "items": _obj({"sender": _text, "send_time": _time, "text": _text}),
        },
    }
)
CALENDAR_ENTRY = _obj(
    {"title": _text, "start_time": _time, "end_time": _time, "attendees": {"type": "array", "items": _text}},
    {"location": _maybe_text},
)
REMINDER = _obj({"title": _text, "due_time": _time}, {"note": _maybe_text})
WALLET_PASS = _obj(
    {"pass_kind": {"enum": PASS_KINDS}, "title": _text, "reference_code": _text,
     "valid_from": _time, "valid_until": _time}
)

CRITIQUE = _obj({"verdict": {"enum": VERDICTS}, "feedback": _maybe_text})

_judge_axis = _obj({"score": {"type": "number", "minimum": 1, "maximum": 5}, "explanation": _maybe_text})
JUDGE = _obj(
    {**{axis: _judge_axis for axis in JUDGE_AXES},
     "Overall": _obj({"score": {"type": "number", "minimum": 1, "maximum": 5}, "summary": _maybe_text})}
)

REGISTRY: dict[str, dict] = {
    "profile": PROFILE,
    "seed_event": SEED_EVENT,
    "seed_events": SEED_EVENTS,
    "expanded_event": EXPANDED_EVENT,
    "expanded_events": EXPANDED_EVENTS,
    "reflection": REFLECTION,
    "artifact_choice": ARTIFACT_CHOICE,
    "email": EMAIL,
    "message_thread": MESSAGE_THREAD,
    "calendar_entry": CALENDAR_ENTRY,
    "reminder": REMINDER,
    "wallet_pass": WALLET_PASS,
    "critique": CRITIQUE,
    "judge": JUDGE,
}


def get_schema(schema_id: str) -> dict:
    try:
        return REGISTRY[schema_id]
    except KeyError:
        raise KeyError(f"unregistered schema {schema_id!r}") from None


def register_schema(schema_id: str, schema: dict) -> None:
    REGISTRY[schema_id] = copy.deepcopy(schema)


def is_valid_email(address: str) -> bool:
    return bool(EMAIL_RE.match(address or ""))
