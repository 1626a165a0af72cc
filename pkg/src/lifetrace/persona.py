"""Persona Agent: expand a demographic draw into a full profile."""

from __future__ import annotations

import re
from dataclasses import asdict, dataclass, field, fields
from typing import Any

from . import prompts
from .demographics import DemographicDraw
from .gateway import Gateway, GenerationRequest, NoJsonFound, SchemaViolation, ask_json, validate_json
from .schemas import COLORS, is_valid_email

_BRACKET = re.compile(r"^\s*(\d+)\s*(?:-\s*(\d+)|\+)\s*$")
_OPTIONAL = ("middle_name", "classmates", "office_address", "school_address")
_CARDINALITY = {"friends": 5, "coworkers": 8, "classmates": 10}


class ProfileGenerationFailed(RuntimeError):
    def __init__(self, violations: list[str]):
        super().__init__("profile generation failed: " + "; ".join(violations))
        self.violations = violations


@dataclass
class FamilyMember:
    name: str
    age: str
    relation: str
    occupation: str = ""
    address: str = ""


@dataclass
class PersonaProfile:
    name: str
    surname: str
    given_name: str
    nicknames: list[str]
    locale: str
    timezone: str
    age: str
    gender: str
    income: str
    ethnicity: str
    family_setup: str
    nationality: str
    email: str
    phone: str
    eye_color: str
    hair_color: str
    height: str
    weight: str
    occupation: str
    weekdays_routines: str
    weekend_routines: str
    life_events_for_holidays_and_vacations: str
    family_members: list[FamilyMember]
    friends: list[str]
    coworkers: list[str]
    home_address: str
    middle_name: str | None = None
    classmates: list[str] | None = None
    office_address: str | None = None
    school_address: str | None = None

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "PersonaProfile":
        known = {f.name for f in fields(cls)}
        kwargs = {k: v for k, v in d.items() if k in known}
        kwargs["family_members"] = [
            FamilyMember(**{**m, "age": str(m.get("age", ""))}) if isinstance(m, dict) else m
            for m in d.get("family_members", [])
        ]
        return cls(**kwargs)

    def to_dict(self) -> dict[str, Any]:
        out = asdict(self)
        for key in _OPTIONAL:
            if out[key] is None:
                del out[key]
        return out

    @property
    def social_graph(self) -> list[str]:
        names = [m.name for m in self.family_members] + list(self.friends) + list(self.coworkers)
        names += list(self.classmates or [])
        return list(dict.fromkeys(names))

    def query_digest(self) -> str:
        """Text embedded on the persona side for event retrieval."""
        return " ".join([self.occupation, self.weekdays_routines, self.weekend_routines])

    def summary(self) -> dict[str, Any]:
        return {
            "name": self.name, "age": self.age, "gender": self.gender, "locale": self.locale,
            "occupation": self.occupation, "home_address": self.home_address,
            "office_address": self.office_address, "email": self.email,
            "family_members": [m.name for m in self.family_members],
            "friends": self.friends, "coworkers": self.coworkers,
        }


@dataclass
class ValidationReport:
    violations: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    @property
    def fields(self) -> list[str]:
        return sorted({v.split(":", 1)[0].split(".", 1)[0] for v in self.violations})

    def __bool__(self):
        return self.ok


def _age_matches(drawn: str, age: str) -> bool:
    if str(drawn).strip() == str(age).strip():
        return True
    m = _BRACKET.match(str(drawn))
    if not m or not str(age).strip().isdigit():
        return False
    lo = int(m.group(1))
    hi = int(m.group(2)) if m.group(2) else 200
    return lo <= int(age) <= hi


def draw_violations(data: dict[str, Any], draw: DemographicDraw) -> list[str]:
    """Every drawn attribute must survive unchanged (age: within the drawn bracket)."""
    out = []
    for key, value in draw.attributes.items():
        got = data.get(key)
        if key == "age":
            if got is None or not _age_matches(value, got):
                out.append(f"age: {got!r} is not within the specified age {value!r}")
        elif got != value:
            out.append(f"{key}: must equal the specified value {value!r}, got {got!r}")
    return out


def _dict_violations(data: dict[str, Any]) -> list[str]:
    problems = validate_json(data, "profile")
    # Extra rules the JSON schema expresses poorly or reports cryptically.
    for key, n in _CARDINALITY.items():
        if key in data and isinstance(data[key], list) and len(data[key]) != n:
            problems = [p for p in problems if not p.startswith(f"{key}:")]
            problems.append(f"{key}: expected exactly {n} names, got {len(data[key])}")
    if "email" in data and not is_valid_email(str(data["email"])):
        problems = [p for p in problems if not p.startswith("email:")]
        problems.append(f"email: {data['email']!r} is not a valid address")
    for key in ("eye_color", "hair_color"):
        if key in data and data[key] not in COLORS:
            problems = [p for p in problems if not p.startswith(f"{key}:")]
            problems.append(f"{key}: {data[key]!r} not one of {COLORS}")
    for key in ("middle_name", "office_address", "school_address"):
        if key in data and data[key] in (None, ""):
            problems.append(f"{key}: omit the field instead of leaving it empty")
    return problems


def validate_profile(profile: PersonaProfile | dict, draw: DemographicDraw | None = None) -> ValidationReport:
    data = profile.to_dict() if isinstance(profile, PersonaProfile) else dict(profile)
    problems = _dict_violations(data)
    if draw is not None:
        problems += draw_violations(data, draw)
    return ValidationReport(problems)


def generate_profile(gateway: Gateway, draw: DemographicDraw) -> PersonaProfile:
    request = GenerationRequest(
        system_prompt=prompts.PERSONA_SYSTEM,
        user_prompt=prompts.PROFILE.substitute(draw=prompts.dump(draw.attributes)),
        agent_role="persona",
        context={"draw": dict(draw.attributes)},
    )
    try:
        data = ask_json(gateway, request, "profile", check=lambda d: _dict_violations(d) + draw_violations(d, draw))
    except SchemaViolation as exc:
        raise ProfileGenerationFailed(exc.violations) from exc
    except NoJsonFound as exc:
        raise ProfileGenerationFailed([str(exc)]) from exc
    return PersonaProfile.from_dict(data)
