"""Offline, deterministic providers.

``MockProvider`` emits schema-valid JSON for whatever ``schema_hint`` a
request carries. Every response is a pure function of (prompt text, schema,
seed), so call order and concurrency never change the output.
"""

from __future__ import annotations

import hashlib
import json
import math
import random
import re
import threading
import time
from dataclasses import dataclass, field
from datetime import datetime, timedelta
from typing import Callable

import numpy as np

from .gateway import GenerationRequest, GenerationResponse
from .schemas import COLORS, FREQUENCIES, JUDGE_AXES, PASS_KINDS

GIVEN_NAMES = [
    "Maya", "Daniel", "Priya", "Lucas", "Amara", "Ethan", "Sofia", "Mateo", "Hannah", "Omar",
    "Grace", "Leo", "Aisha", "Noah", "Chloe", "Diego", "Yuki", "Samuel", "Elena", "Kwame",
    "Isabel", "Ravi", "Nora", "Jamal", "Lily", "Tomas", "Zara", "Victor", "Mei", "Andre",
    "Fatima", "Jonah", "Camila", "Arjun", "Ruby", "Malik", "Ines", "Felix", "Hana", "Caleb",
]
SURNAMES = [
    "Garcia", "Nguyen", "Patel", "Johnson", "Okafor", "Kim", "Rossi", "Hernandez", "Cohen", "Silva",
    "Brown", "Tanaka", "Walker", "Novak", "Ahmed", "Lopez", "Murphy", "Chen", "Dubois", "Mensah",
    "Fischer", "Singh", "Reyes", "Clarke", "Haddad", "Kowalski", "Ortiz", "Sato", "Bennett", "Ali",
]
OCCUPATIONS = [
    "registered nurse", "software engineer", "high school teacher", "electrician", "accountant",
    "retail store manager", "graduate student in computer science", "truck driver", "chef",
    "pharmacist", "graphic designer", "construction foreman", "social worker", "dental hygienist",
    "marketing coordinator", "bus driver", "veterinary technician", "paralegal", "barista",
]
STREETS = ["Maple Ave", "Oak St", "Cedar Ln", "Elm St", "Park Blvd", "River Rd", "Hill St", "Lake Dr"]
CITIES = ["Springfield", "Riverton", "Fairview", "Lakeside", "Georgetown", "Madison", "Ashland"]
DOMAINS = ["mail.com", "inbox.net", "example.org", "postbox.io", "webmail.us"]
VERBS = [
    "attend", "book", "schedule", "pay", "renew", "organize", "plan", "join", "pick up", "review",
    "visit", "prepare", "order", "cancel", "confirm", "host", "submit", "return", "buy", "register for",
]
NOUNS = [
    "dentist appointment", "flight to Denver", "electricity bill", "team meeting", "yoga class",
    "birthday dinner", "car service", "library books", "grocery delivery", "concert tickets",
    "parent-teacher conference", "gym membership", "tax filing", "hotel reservation", "doctor visit",
    "book club", "soccer practice", "rent payment", "project deadline", "farmers market trip",
    "vet checkup", "phone plan", "holiday party", "moving boxes", "online course", "coffee catch-up",
    "insurance claim", "museum visit", "hiking trip", "school fundraiser", "haircut", "job interview",
]
WORDS = (
    "morning evening weekend schedule update reminder receipt invoice confirmation order shipment "
    "package delivery payment balance account statement ticket seat gate boarding terminal hotel "
    "checkin checkout room booking itinerary flight train bus parking garage address directions "
    "meeting agenda notes slides deadline project client review draft feedback report budget "
    "quarter planning team manager colleague office lunch dinner breakfast restaurant menu table "
    "friend family kids school teacher homework practice game score season coach uniform field "
    "doctor clinic prescription pharmacy insurance claim coverage copay appointment follow "
    "birthday party gift cake invitation guest celebration anniversary wedding holiday vacation "
    "beach mountain trail camping tent weather rain sunny forecast jacket umbrella garden plants "
    "groceries milk bread coffee recipe kitchen oven laundry cleaning repair plumber electrician "
    "car tire oil mechanic service warranty subscription renewal membership gym class trainer "
    "music concert band venue theater movie premiere museum exhibit gallery library book author "
    "bank transfer deposit savings loan mortgage rent landlord lease utility bill electricity "
    "water internet phone plan upgrade device laptop charger software password security login "
    "volunteer charity donation community neighbor street park dog walk vet cat pet adoption "
    "course lecture exam grade semester tuition scholarship application interview resume offer "
    "thanks please soon tomorrow tonight next week great looking forward quick question details "
    "attached confirm available time works let know see there bring share plan call text"
).split()

LOCALE_TZ = {
    "en-US/New York": "America/New_York", "en-US/Chicago": "America/Chicago",
    "en-US/Los Angeles": "America/Los_Angeles", "en-US/Houston": "America/Chicago",
    "en-US/Phoenix": "America/Phoenix", "es-US/Miami": "America/New_York",
    "en-US/Seattle": "America/Los_Angeles", "en-US/Denver": "America/Denver",
}

_BRACKET = re.compile(r"^\s*(\d+)\s*(?:-\s*(\d+)|\+)\s*$")


def _fmt(dt: datetime) -> str:
    return dt.strftime("%Y-%m-%dT%H:%M:%S")


def _parse(ts: str | None) -> datetime | None:
    if not ts:
        return None
    try:
        return datetime.fromisoformat(ts)
    except ValueError:
        return None


def _words(rng: random.Random, n: int) -> str:
    return " ".join(rng.choice(WORDS) for _ in range(n))


def _sentences(rng: random.Random, n: int, topic: str = "") -> str:
    out = []
    for i in range(n):
        s = _words(rng, rng.randint(6, 14))
        if topic and i == 0:
            s = f"{topic} {s}"
        out.append(s[0].upper() + s[1:] + ".")
    return " ".join(out)


def _email_of(rng: random.Random, given: str, surname: str) -> str:
    sep = rng.choice([".", "_", ""])
    return f"{given.lower()}{sep}{surname.lower()}{rng.randint(1, 99)}@{rng.choice(DOMAINS)}"


@dataclass
class MockProvider:
    seed: int = 0
    expand_policy: str = "random"  # random | always | never
    expand_children: int = 3
    revise_rate: float = 0.15
    reflect_revise_rate: float = 0.1
    kind_weights: dict[str, float] = field(
        default_factory=lambda: {"email": 0.5, "message_thread": 0.15, "calendar_entry": 0.15,
                                 "reminder": 0.1, "wallet_pass": 0.1}
    )
    fixed_tokens: tuple[int, int] | None = None
    responder: Callable[[GenerationRequest], str | None] | None = None
    latency: float = 0.0
    provider_id: str = "mock"

    def __post_init__(self):
        self._lock = threading.Lock()
        self.calls = 0
        self.in_flight = 0
        self.max_in_flight = 0

    def rng_for(self, request: GenerationRequest) -> random.Random:
        h = hashlib.sha256()
        for part in (request.system_prompt, request.user_prompt, request.schema_hint or "", str(self.seed)):
            h.update(part.encode("utf-8"))
            h.update(b"\x00")
        return random.Random(int.from_bytes(h.digest()[:8], "big"))

    def generate(self, request: GenerationRequest) -> GenerationResponse:
        with self._lock:
            self.calls += 1
            self.in_flight += 1
            self.max_in_flight = max(self.max_in_flight, self.in_flight)
        try:
            if self.latency:
                time.sleep(self.latency)
            text = None
            if self.responder is not None:
                text = self.responder(request)
            if text is None:
                text = self.respond(request)
        finally:
            with self._lock:
                self.in_flight -= 1
        if self.fixed_tokens is not None:
            tin, tout = self.fixed_tokens
        else:
            tin = math.ceil((len(request.system_prompt) + len(request.user_prompt)) / 4)
            tout = math.ceil(len(text) / 4)
        return GenerationResponse(text, tin, tout, self.provider_id)

    # -- default schema-driven behaviour -----------------------------------

    def respond(self, request: GenerationRequest) -> str:
        rng = self.rng_for(request)
        ctx = request.context
        hint = request.schema_hint
        if hint is None:
            return self._outline(rng, ctx)
        maker = getattr(self, f"_make_{hint}", None)
        if maker is None:
            raise KeyError(f"mock has no generator for schema {hint!r}")
        return json.dumps(maker(rng, ctx), ensure_ascii=False)

    def _make_profile(self, rng, ctx):
        draw = dict(ctx.get("draw", {}))
        given, surname = rng.choice(GIVEN_NAMES), rng.choice(SURNAMES)
        age_label = str(draw.get("age", "30"))
        m = _BRACKET.match(age_label)
        if m:
            lo = int(m.group(1))
            hi = int(m.group(2)) if m.group(2) else lo + 20
            age = str(rng.randint(lo, hi))
        else:
            age = age_label
        locale = draw.get("locale", "en-US/Springfield")
        city = locale.split("/", 1)[1] if "/" in locale else rng.choice(CITIES)
        occupation = rng.choice(OCCUPATIONS)
        pool = [f"{g} {s}" for g in GIVEN_NAMES for s in SURNAMES if g != given]
        social = rng.sample(pool, 5 + 8 + 3)
        profile = {
            "name": f"{given} {surname}", "surname": surname, "given_name": given,
            "nicknames": [given[:3]],
            "locale": locale, "timezone": LOCALE_TZ.get(locale, "America/New_York"),
            "age": age,
            "gender": draw.get("gender", rng.choice(["female", "male"])),
            "income": draw.get("income", "$50,000-$74,999"),
            "ethnicity": draw.get("ethnicity", "White"),
            "family_setup": draw.get("family_setup", "lives alone"),
            "nationality": draw.get("nationality", "United States"),
            "email": _email_of(rng, given, surname),
            "phone": f"+1-{rng.randint(200, 989)}-{rng.randint(200, 999)}-{rng.randint(1000, 9999)}",
            "eye_color": rng.choice(COLORS[:4]), "hair_color": rng.choice(COLORS),
            "height": f"{rng.randint(150, 195)} cm", "weight": f"{rng.randint(50, 110)} kg",
            "occupation": occupation,
            "weekdays_routines": f"Works as a {occupation}. " + _sentences(rng, 3),
            "weekend_routines": _sentences(rng, 3),
            "life_events_for_holidays_and_vacations": _sentences(rng, 2),
            "family_members": [
                {"name": n, "age": str(rng.randint(5, 80)), "relation": rng.choice(["sibling", "parent", "child", "spouse"]),
                 "occupation": rng.choice(OCCUPATIONS), "address": f"{rng.randint(10, 999)} {rng.choice(STREETS)}, {city}"}
                for n in social[13:16]
            ],
            "friends": social[:5],
            "coworkers": social[5:13],
            "home_address": f"{rng.randint(10, 9999)} {rng.choice(STREETS)}, {city}",
            "office_address": f"{rng.randint(10, 999)} {rng.choice(STREETS)}, {city}",
        }
        return profile

    def _seed_event(self, rng):
        title = f"{rng.choice(VERBS)} {rng.choice(NOUNS)}"
        return {"event": title, "detailed_description": _sentences(rng, 2, title),
                "frequency": rng.choice(FREQUENCIES)}

    def _make_seed_events(self, rng, ctx):
        n = int(ctx.get("num_seed_events", 10))
        return [self._seed_event(rng) for _ in range(n)]

    def _expanded(self, rng, ctx, base: dict, anchor: datetime | None):
        pool = list(ctx.get("participants_pool", []))
        if anchor is None:
            anchor = datetime(2024, 1, 1, 8) + timedelta(days=rng.randint(0, 540), hours=rng.randint(0, 12))
        else:
            anchor = anchor + timedelta(days=rng.randint(-7, 7), hours=rng.randint(-6, 6))
        end = anchor + timedelta(minutes=rng.choice([15, 30, 60, 90, 120, 240]))
        k = rng.randint(0, min(3, len(pool)))
        return {
            "event": base["event"], "detailed_description": base["detailed_description"],
            "frequency": base.get("frequency", "once"),
            "location": rng.choice(["", f"{rng.randint(10, 999)} {rng.choice(STREETS)}, {rng.choice(CITIES)}"]),
            "other_participants": rng.sample(pool, k),
            "start_time": _fmt(anchor), "end_time": _fmt(end),
        }

    def _make_expanded_event(self, rng, ctx):
        seed = ctx.get("event") or self._seed_event(rng)
        focus = ctx.get("occupation")
        base = dict(seed)
        if focus:
            base["detailed_description"] = f"{seed['detailed_description']} As a {focus}, {_words(rng, 6)}."
        return self._expanded(rng, ctx, base, _parse(seed.get("start_time")))

    def _make_expanded_events(self, rng, ctx):
        if self.expand_policy == "never":
            n = 0
        elif self.expand_policy == "always":
            n = self.expand_children
        else:
            n = rng.choice([0, 0, 0, 1, 2, 3])
        parent = ctx.get("event", {})
        anchor = _parse(parent.get("start_time"))
        out = []
        for _ in range(n):
            title = f"{rng.choice(VERBS)} {rng.choice(NOUNS)}"
            base = {"event": title, "detailed_description": _sentences(rng, 2, title),
                    "frequency": rng.choice(FREQUENCIES)}
            out.append(self._expanded(rng, ctx, base, anchor))
        return out

    def _make_reflection(self, rng, ctx):
        event = ctx.get("event")
        if event is None or rng.random() >= self.reflect_revise_rate:
            return {"approved": True}
        revised = dict(event)
        revised["detailed_description"] = f"{event['detailed_description']} {_sentences(rng, 1)}"
        return {"approved": False, "revised_event": revised}

    def _make_artifact_choice(self, rng, ctx):
        kinds = list(self.kind_weights)
        kind = rng.choices(kinds, weights=[self.kind_weights[k] for k in kinds])[0]
        out = {"kind": kind, "direction": rng.choice(["sent", "received"])}
        if kind == "wallet_pass":
            out["pass_kind"] = rng.choice(PASS_KINDS)
        return out

    def _outline(self, rng, ctx):
        title = (ctx.get("event") or {}).get("event", "")
        points = "\n".join(f"- {_words(rng, rng.randint(5, 10))}" for _ in range(rng.randint(3, 5)))
        return f"Outline: {title}\n{points}" if title else f"Outline\n{points}"

    def _parties(self, rng, ctx):
        profile = ctx.get("profile", {})
        me = profile.get("name", "Alex Doe")
        my_email = profile.get("email", "alex.doe@mail.com")
        others = list((ctx.get("event") or {}).get("other_participants") or []) or list(ctx.get("participants_pool", []))
        other = rng.choice(others) if others else f"{rng.choice(GIVEN_NAMES)} {rng.choice(SURNAMES)}"
        parts = other.split()
        other_email = _email_of(rng, parts[0], parts[-1]) if len(parts) > 1 else f"info@{rng.choice(DOMAINS)}"
        return me, my_email, other, other_email

    def _revise(self, rng, ctx):
        art = json.loads(json.dumps(ctx["artifact"]))
        if art.get("body"):
            art["body"] += " " + _sentences(rng, 1)
        elif art.get("messages"):
            art["messages"][-1]["text"] += " " + _words(rng, 4)
        elif "note" in art or "due_time" in art:
            art["note"] = (art.get("note", "") + " " + _sentences(rng, 1)).strip()
        else:
            art["title"] = f"{art['title']} ({rng.choice(WORDS)})"
        return art

    def _make_email(self, rng, ctx):
        if "artifact" in ctx:
            return self._revise(rng, ctx)
        event = ctx.get("event", {})
        me, my_email, other, other_email = self._parties(rng, ctx)
        sent = ctx.get("direction") == "sent"
        start = _parse(event.get("start_time")) or datetime(2024, 5, 1, 9)
        send = start - timedelta(hours=rng.randint(1, 72))
        body = "\n\n".join(_sentences(rng, rng.randint(2, 5), event.get("event", "") if i == 0 else "")
                           for i in range(rng.randint(2, 4)))
        if rng.random() < 0.25:
            body += f"\n\nMore details: https://{rng.choice(DOMAINS)}/{rng.choice(WORDS)}/{rng.randint(100, 9999)}"
        return {
            "sender_name": me if sent else other,
            "from_address": my_email if sent else other_email,
            "to_address": other_email if sent else my_email,
            "send_time": _fmt(send),
            "subject": f"{event.get('event', _words(rng, 3)).capitalize()} {rng.choice(['update', 'details', 'reminder', 'plans', 'confirmation'])}",
            "body": body,
        }

    def _make_message_thread(self, rng, ctx):
        if "artifact" in ctx:
            return self._revise(rng, ctx)
        event = ctx.get("event", {})
        me, _, other, _ = self._parties(rng, ctx)
        t = (_parse(event.get("start_time")) or datetime(2024, 5, 1, 9)) - timedelta(hours=rng.randint(1, 48))
        msgs = []
        for i in range(rng.randint(2, 6)):
            t += timedelta(minutes=rng.randint(1, 90))
            msgs.append({"sender": [me, other][i % 2], "send_time": _fmt(t), "text": _words(rng, rng.randint(4, 16))})
        return {"participants": [me, other], "messages": msgs}

    def _make_calendar_entry(self, rng, ctx):
        if "artifact" in ctx:
            return self._revise(rng, ctx)
        event = ctx.get("event", {})
        return {
            "title": event.get("event") or _words(rng, 3),
            "start_time": event.get("start_time") or "2024-05-01T09:00:00",
            "end_time": event.get("end_time") or "2024-05-01T10:00:00",
            "location": event.get("location", ""),
            "attendees": list(event.get("other_participants") or []),
        }

    def _make_reminder(self, rng, ctx):
        if "artifact" in ctx:
            return self._revise(rng, ctx)
        event = ctx.get("event", {})
        start = _parse(event.get("start_time")) or datetime(2024, 5, 1, 9)
        return {"title": event.get("event") or _words(rng, 3),
                "due_time": _fmt(start - timedelta(minutes=rng.choice([15, 30, 60, 1440]))),
                "note": _sentences(rng, 1)}

    def _make_wallet_pass(self, rng, ctx):
        if "artifact" in ctx:
            return self._revise(rng, ctx)
        event = ctx.get("event", {})
        start = _parse(event.get("start_time")) or datetime(2024, 5, 1, 9)
        end = _parse(event.get("end_time")) or start + timedelta(hours=2)
        return {
            "pass_kind": ctx.get("pass_kind") or rng.choice(PASS_KINDS),
            "title": event.get("event") or _words(rng, 3),
            "reference_code": "".join(rng.choice("ABCDEFGHJKLMNPQRSTUVWXYZ23456789") for _ in range(6)),
            "valid_from": _fmt(start - timedelta(hours=rng.randint(1, 24))),
            "valid_until": _fmt(max(end, start)),
        }

    def _make_critique(self, rng, ctx):
        if rng.random() < self.revise_rate:
            return {"verdict": "revise", "feedback": f"Improve the {rng.choice(['tone', 'detail', 'clarity', 'timing'])}: {_words(rng, 8)}."}
        return {"verdict": "approve", "feedback": "Consistent and realistic."}

    def _make_judge(self, rng, ctx):
        out = {axis: {"score": rng.randint(3, 5), "explanation": _sentences(rng, 1)} for axis in JUDGE_AXES}
        mean = sum(v["score"] for v in out.values()) / len(JUDGE_AXES)
        out["Overall"] = {"score": round(mean, 1), "summary": _sentences(rng, 1)}
        return out


class MockEmbedder:
    """Feature-hashed bag-of-words embedder.

    Each lowercased word token maps to a Gaussian vector drawn from a PRNG
    seeded by the token's hash; a text embeds to the normalized sum. Equal
    texts embed equally and shared vocabulary pulls vectors together.
    """

    provider_id = "mock-embed"

    def __init__(self, dim: int = 64, seed: int = 0):
        self.dim = dim
        self.seed = seed
        self._cache: dict[str, np.ndarray] = {}
        self._lock = threading.Lock()
        sentinel_rng = np.random.default_rng([seed, 0xE3B0])
        s = sentinel_rng.standard_normal(dim)
        self.sentinel = s / np.linalg.norm(s)

    def _token_vec(self, token: str) -> np.ndarray:
        with self._lock:
            v = self._cache.get(token)
        if v is None:
            digest = hashlib.blake2b(token.encode("utf-8"), digest_size=8, key=str(self.seed).encode()).digest()
            v = np.random.default_rng(int.from_bytes(digest, "big")).standard_normal(self.dim)
            with self._lock:
                self._cache[token] = v
        return v

    def embed(self, text: str) -> np.ndarray:
        tokens = re.findall(r"\w+", text.lower())
        if not tokens:
            return self.sentinel.copy()
        acc = np.zeros(self.dim)
        for tok in tokens:
            acc += self._token_vec(tok)
        norm = np.linalg.norm(acc)
        if norm == 0.0:
            return self.sentinel.copy()
        return acc / norm

    def embed_batch(self, texts: list[str]) -> np.ndarray:
        if not texts:
            return np.zeros((0, self.dim))
        return np.stack([self.embed(t) for t in texts])


__all__ = ["MockProvider", "MockEmbedder"]
