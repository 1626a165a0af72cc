"""Agent-free baseline: a fixed event-type list filled into frozen templates.

Used only as a comparison fixture. Nothing here touches a gateway.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from datetime import datetime, timedelta

from .artifacts import Artifact, EmailArtifact
from .persona import PersonaProfile

EVENT_KINDS = ("appointment", "bill", "online_shopping", "ticketed_show", "work_meeting")

REQUIRED_SLOTS = {
    "appointment": ("time", "location", "participants"),
    "bill": ("time", "amount"),
    "online_shopping": ("time", "amount"),
    "ticketed_show": ("time", "location", "amount"),
    "work_meeting": ("time", "location", "participants"),
}

_SENDERS = {
    "appointment": ("Scheduling Desk", "appointments@clinic-mail.com"),
    "bill": ("Billing Department", "billing@utility-mail.com"),
    "online_shopping": ("Order Updates", "orders@shop-mail.com"),
    "ticketed_show": ("Box Office", "tickets@boxoffice-mail.com"),
    "work_meeting": (None, None),  # sent by a coworker
}

TEMPLATES = {
    "appointment": (
        "Appointment confirmation for {time}",
        "Dear {name},\n\nThis is a confirmation of your appointment on {time} at {location}. "
        "Please arrive 10 minutes early. You will be seen by {participants}.\n\nThank you.",
    ),
    "bill": (
        "Your bill is ready",
        "Dear {name},\n\nYour bill of {amount} is due on {time}. "
        "Please make your payment before the due date to avoid late fees.\n\nThank you.",
    ),
    "online_shopping": (
        "Your order has shipped",
        "Dear {name},\n\nYour order totaling {amount} has shipped and will arrive by {time}. "
        "Thank you for shopping with us.",
    ),
    "ticketed_show": (
        "Your tickets for {time}",
        "Dear {name},\n\nThank you for your purchase of {amount}. Your show is on {time} at {location}. "
        "Please bring this email to the venue.",
    ),
    "work_meeting": (
        "Meeting on {time}",
        "Hi {name},\n\nPlease join the meeting on {time} at {location} with {participants}. "
        "Let me know if you cannot attend.\n\nThanks.",
    ),
}


@dataclass(frozen=True)
class EventTemplate:
    kind: str
    slots: dict[str, str]

    def __post_init__(self):
        if self.kind not in EVENT_KINDS:
            raise ValueError(f"unknown event kind {self.kind!r}")
        missing = [s for s in REQUIRED_SLOTS[self.kind] if s not in self.slots]
        if missing:
            raise ValueError(f"{self.kind} is missing slots {missing}")


def _slots(kind: str, profile: PersonaProfile, rng: random.Random) -> dict[str, str]:
    when = datetime(2024, 1, 1, 8) + timedelta(days=rng.randint(0, 365), hours=rng.randint(0, 10))
    slots = {"time": when.strftime("%Y-%m-%d %H:%M")}
    if "location" in REQUIRED_SLOTS[kind]:
        slots["location"] = profile.office_address if kind == "work_meeting" and profile.office_address else profile.home_address
    if "participants" in REQUIRED_SLOTS[kind]:
        pool = profile.coworkers if kind == "work_meeting" else [m.name for m in profile.family_members] or profile.friends
        slots["participants"] = rng.choice(pool)
    if "amount" in REQUIRED_SLOTS[kind]:
        slots["amount"] = f"${rng.randint(10, 400)}.{rng.randint(0, 99):02d}"
    slots["_send"] = (when - timedelta(days=rng.randint(1, 5))).strftime("%Y-%m-%dT%H:%M:%S")
    return slots


def render(template: EventTemplate, profile: PersonaProfile, rng: random.Random) -> EmailArtifact:
    subject_t, body_t = TEMPLATES[template.kind]
    values = {**template.slots, "name": profile.given_name}
    sender, address = _SENDERS[template.kind]
    if sender is None:
        sender = rng.choice(profile.coworkers)
        first, *rest = sender.lower().split()
        address = f"{first}.{rest[-1] if rest else 'team'}@work-mail.com"
    return EmailArtifact(
        sender_name=sender, from_address=address, to_address=profile.email,
        send_time=template.slots["_send"], subject=subject_t.format(**values), body=body_t.format(**values),
    )


def generate_ablated(profile: PersonaProfile, count: int, seed: int) -> list[Artifact]:
    """Round-robin over the event kinds; each artifact is a received email."""
    if count <= 0:
        raise ValueError("count must be positive")
    rng = random.Random(seed)
    out = []
    for i in range(count):
        kind = EVENT_KINDS[i % len(EVENT_KINDS)]
        template = EventTemplate(kind, _slots(kind, profile, rng))
        out.append(Artifact("email", "received", i, render(template, profile, rng)))
    return out
