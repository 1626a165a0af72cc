import json

import pytest

from conftest import make_gateway
from lifetrace.demographics import DemographicDraw, sample_draw
from lifetrace.persona import (
    PersonaProfile,
    ProfileGenerationFailed,
    generate_profile,
    validate_profile,
)
from lifetrace.schemas import COLORS


def test_mock_profile_is_valid(profile):
    assert validate_profile(profile).ok
    assert len(profile.friends) == 5
    assert len(profile.coworkers) == 8
    assert profile.classmates is None or len(profile.classmates) == 10
    assert profile.eye_color in COLORS and profile.hair_color in COLORS


def test_profile_matches_draw(prior):
    for seed in range(20):
        draw = sample_draw(prior, seed)
        p = generate_profile(make_gateway(seed=seed), draw)
        assert p.locale == draw.attributes["locale"]
        assert validate_profile(p, draw).ok
        for key in ("gender", "ethnicity", "income", "family_setup", "nationality"):
            assert getattr(p, key) == draw.attributes[key]


def test_generation_deterministic(prior):
    draw = sample_draw(prior, 5)
    a = generate_profile(make_gateway(seed=1), draw)
    b = generate_profile(make_gateway(seed=1), draw)
    assert a == b


def test_valid_fixture_has_empty_report(profile_dict):
    report = validate_profile(profile_dict)
    assert report.ok and report.violations == []


def test_four_friends_single_violation(profile_dict):
    profile_dict["friends"] = profile_dict["friends"][:4]
    report = validate_profile(profile_dict)
    assert report.fields == ["friends"]
    assert len(report.violations) == 1


def test_malformed_email(profile_dict):
    profile_dict["email"] = "a@@b"
    assert validate_profile(profile_dict).fields == ["email"]


@pytest.mark.parametrize("address", ["ana@mail", "ana mail@x.com", "@x.com", "ana@x..com"])
def test_more_bad_emails(profile_dict, address):
    profile_dict["email"] = address
    assert "email" in validate_profile(profile_dict).fields


def test_bad_color(profile_dict):
    profile_dict["eye_color"] = "purple"
    assert validate_profile(profile_dict).fields == ["eye_color"]


def test_classmates_need_ten(profile_dict):
    profile_dict["classmates"] = ["A B"] * 9
    assert validate_profile(profile_dict).fields == ["classmates"]


def test_missing_required_field(profile_dict):
    del profile_dict["occupation"]
    assert "occupation" in validate_profile(profile_dict).fields


def test_empty_required_field(profile_dict):
    profile_dict["home_address"] = ""
    assert "home_address" in validate_profile(profile_dict).fields


def test_age_must_fall_in_bracket(profile_dict):
    draw = DemographicDraw({"age": "25-34"}, 0)
    profile_dict["age"] = "30"
    assert validate_profile(profile_dict, draw).ok
    profile_dict["age"] = "40"
    assert validate_profile(profile_dict, draw).fields == ["age"]


def test_contradicting_draw(profile_dict):
    draw = DemographicDraw({"locale": "en-US/Chicago"}, 0)
    profile_dict["locale"] = "en-US/Boston"
    assert validate_profile(profile_dict, draw).fields == ["locale"]


def test_roundtrip(profile):
    assert PersonaProfile.from_dict(json.loads(json.dumps(profile.to_dict()))) == profile


def _bad_color_responder(profile_dict, calls):
    def respond(request):
        if request.schema_hint != "profile":
            return None
        calls.append(request)
        return json.dumps({**profile_dict, "eye_color": "purple"})
    return respond


def test_repeated_enum_violation_fails_after_repair(profile_dict):
    calls = []
    gw = make_gateway(responder=_bad_color_responder(profile_dict, calls))
    draw = DemographicDraw({}, 0)
    with pytest.raises(ProfileGenerationFailed) as exc:
        generate_profile(gw, draw)
    assert len(calls) == 2
    assert "eye_color" in calls[1].user_prompt
    assert any(v.startswith("eye_color") for v in exc.value.violations)


def test_repair_succeeds(profile_dict):
    calls = []

    def respond(request):
        calls.append(request)
        color = "brown" if request.context.get("repair") else "purple"
        return json.dumps({**profile_dict, "eye_color": color})

    p = generate_profile(make_gateway(responder=respond), DemographicDraw({}, 0))
    assert p.eye_color == "brown"
    assert len(calls) == 2
