import pytest

from conftest import make_gateway
from lifetrace.config import data_path
from lifetrace.event_memory import EventMemory, SeedEvent
from lifetrace.gateway import BudgetExceeded, Gateway
from lifetrace.mock import MockEmbedder, MockProvider
from lifetrace.pipeline import generate_footprint, persona_seed, run


@pytest.fixture(scope="module")
def memory():
    events = [SeedEvent(f"errand {i}", f"run errand {i} across town before noon", "weekly") for i in range(40)]
    return EventMemory.from_events(events, make_gateway())


def test_persona_seeds_distinct():
    seeds = [persona_seed(9, i) for i in range(200)]
    assert len(set(seeds)) == 200
    assert persona_seed(9, 0) != persona_seed(10, 0)


def test_footprint_provenance(prior, memory):
    fp, _ = generate_footprint(make_gateway(), prior, memory, "persona-000", 5, forest_cap=12)
    assert fp.provenance["node_count"] == 12
    assert fp.provenance["artifact_count"] == len(fp.artifacts) == 12
    assert {a.event_id for a in fp.artifacts} == set(range(12))


def test_artifact_scope_overrun_drops_only_that_artifact(prior, memory):
    # 20k + 20k tokens cost 0.25 USD per call, so every artifact overruns its 0.57 scope.
    gw = Gateway(MockProvider(fixed_tokens=(20_000, 20_000)), MockEmbedder(64), sleep=lambda s: None)
    fp, warnings = generate_footprint(gw, prior, memory, "p", 5, forest_cap=4)
    assert fp.artifacts == []
    assert sum("per-artifact cap" in w for w in warnings) == 4
    for node in range(4):
        assert gw.ledger.scope_total(f"p:{node}") > gw.scope_cap


def test_run_cap_stops_the_persona(prior, memory):
    gw = Gateway(MockProvider(), MockEmbedder(64), budget_cap="0.05", sleep=lambda s: None)
    with pytest.raises(BudgetExceeded) as exc:
        generate_footprint(gw, prior, memory, "p", 5, forest_cap=50)
    assert exc.value.scope is None


def test_run_records_failures(prior, memory, tmp_path):
    gw = Gateway(MockProvider(), MockEmbedder(64), budget_cap="0", sleep=lambda s: None)
    results = run(gw, prior, memory, personas=2, seed=0, out_dir=tmp_path, forest_cap=5, max_cycles=3,
                  workers=2, config_hash="x")
    assert [r.ok for r in results] == [False, False]
    assert all("BudgetExceeded" in r.error for r in results)
    assert (tmp_path / "run.json").exists()


def test_data_files_ship():
    for name in ("example_prior.json", "persona_descriptions.txt", "provider_mock.json"):
        with open(data_path(name), encoding="utf-8") as fh:
            assert fh.read().strip()
