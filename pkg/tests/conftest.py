import json
from pathlib import Path

import pytest
from jsonschema import Draft202012Validator

from lifetrace.config import data_path
from lifetrace.demographics import load_prior, sample_draw
from lifetrace.gateway import Gateway
from lifetrace.mock import MockEmbedder, MockProvider
from lifetrace.persona import generate_profile, validate_profile
from lifetrace.schemas import get_schema


def make_gateway(seed=0, embed_dim=64, **provider_kw):
    provider = MockProvider(seed=seed, **provider_kw)
    return Gateway(provider, MockEmbedder(embed_dim, seed), sleep=lambda s: None)


@pytest.fixture
def gateway():
    return make_gateway()


@pytest.fixture(scope="session")
def prior():
    return load_prior(data_path("example_prior.json"))


@pytest.fixture(scope="session")
def profile(prior):
    return generate_profile(make_gateway(seed=3), sample_draw(prior, 11))


@pytest.fixture
def profile_dict(profile):
    return profile.to_dict()


def output_problems(persona_dir):
    """Schema problems in one ``generate`` output directory, checked with jsonschema directly."""
    d = Path(persona_dir)
    problems = list(validate_profile(json.loads((d / "profile.json").read_text())).violations)
    for i, line in enumerate((d / "footprint.jsonl").read_text().splitlines()):
        rec = json.loads(line)
        if set(rec) != {"version", "persona_id", "event_id", "kind", "direction", "payload"}:
            problems.append(f"line {i}: envelope keys {sorted(rec)}")
            continue
        for err in Draft202012Validator(get_schema(rec["kind"])).iter_errors(rec["payload"]):
            problems.append(f"line {i}: {err.message}")
    return problems


def tree_bytes(root):
    root = Path(root)
    return {str(p.relative_to(root)): p.read_bytes() for p in sorted(root.rglob("*")) if p.is_file()}
