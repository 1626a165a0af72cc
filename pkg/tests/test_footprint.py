import json
from datetime import datetime

import icalendar
import pytest
from hypothesis import HealthCheck, given, settings, strategies as st

from lifetrace.artifacts import Artifact, CalendarEntry, EmailArtifact, Reminder
from lifetrace.event_forest import EventForest, ExpandedEvent
from lifetrace.footprint import (
    DanglingEventRef,
    FootprintIOError,
    assemble,
    export_ics,
    export_jsonl,
    ics_time,
    load_jsonl,
    render_ics,
)
from strategies import artifacts, calendars


def forest_of(n):
    f = EventForest()
    ev = ExpandedEvent("e", "d", "once", "", (), "2024-01-01T00:00:00", "2024-01-01T01:00:00")
    for _ in range(n):
        f.add(ev, None, True)
    return f


def email(ts, event_id=0):
    return Artifact("email", "received", event_id, EmailArtifact("A", "a@x.com", "b@y.com", ts, "s", "b"))


def test_empty_footprint(profile):
    fp = assemble("p", profile, forest_of(1), [])
    assert fp.artifacts == []
    assert "sort_rule" in fp.provenance


def test_sorted_by_timestamp(profile):
    late, early = email("2024-05-02T00:00:00"), email("2024-05-01T00:00:00")
    assert assemble("p", profile, forest_of(1), [late, early]).artifacts == [early, late]


def test_sort_is_stable_across_kinds(profile):
    a = email("2024-05-01T09:00:00")
    b = Artifact("reminder", "sent", 0, Reminder("r", "2024-05-01T09:00:00"))
    c = Artifact("calendar_entry", "sent", 0, CalendarEntry("c", "2024-04-30T09:00:00", "2024-04-30T10:00:00"))
    assert assemble("p", profile, forest_of(1), [a, b, c]).artifacts == [c, a, b]


def test_dangling_reference(profile):
    with pytest.raises(DanglingEventRef) as exc:
        assemble("p", profile, forest_of(2), [email("2024-01-01T00:00:00", 0), email("2024-01-01T00:00:00", 5)])
    assert exc.value.index == 1


@settings(max_examples=60, suppress_health_check=[HealthCheck.too_slow, HealthCheck.function_scoped_fixture])
@given(st.lists(artifacts(max_event_id=9), max_size=20))
def test_assemble_sort_key_non_decreasing(profile, arts):
    fp = assemble("p", profile, forest_of(10), arts)
    keys = [datetime.fromisoformat(a.timestamp()) for a in fp.artifacts]
    assert keys == sorted(keys)
    assert sorted(map(repr, fp.artifacts)) == sorted(map(repr, arts))


def test_jsonl_three_lines(profile, tmp_path):
    fp = assemble("p", profile, forest_of(1), [email(f"2024-01-0{i}T00:00:00") for i in (1, 2, 3)])
    assert export_jsonl(fp, tmp_path / "f.jsonl") == 3
    lines = (tmp_path / "f.jsonl").read_text().splitlines()
    assert len(lines) == 3
    env = json.loads(lines[0])
    assert set(env) == {"version", "persona_id", "event_id", "kind", "direction", "payload"}


@settings(max_examples=50, suppress_health_check=[HealthCheck.too_slow, HealthCheck.function_scoped_fixture])
@given(st.lists(artifacts(max_event_id=9), max_size=25))
def test_jsonl_roundtrip(profile, tmp_path_factory, arts):
    path = tmp_path_factory.mktemp("rt") / "f.jsonl"
    fp = assemble("p", profile, forest_of(10), arts)
    export_jsonl(fp, path)
    assert load_jsonl(path) == fp.artifacts


def test_unwritable_path(profile, tmp_path):
    fp = assemble("p", profile, forest_of(1), [])
    with pytest.raises(FootprintIOError):
        export_jsonl(fp, tmp_path / "missing" / "f.jsonl")
    with pytest.raises(FootprintIOError):
        export_ics(fp, tmp_path / "missing" / "c.ics")


# --- ICS -----------------------------------------------------------------------------

def test_empty_calendar_wrapper():
    text = render_ics("p", [])
    assert text.startswith("BEGIN:VCALENDAR\r\n") and text.endswith("END:VCALENDAR\r\n")
    assert icalendar.Calendar.from_ical(text).walk("VEVENT") == []


def test_format_transcription():
    assert ics_time("2024-03-01T09:00:00") == "20240301T090000"
    text = render_ics("p", [(4, CalendarEntry("Standup", "2024-03-01T09:00:00", "2024-03-01T09:15:00"))])
    assert "DTSTART:20240301T090000\r\n" in text
    assert "UID:p:4\r\n" in text


def parse_triples(text):
    cal = icalendar.Calendar.from_ical(text)
    out = []
    for ev in cal.walk("VEVENT"):
        start, end = ev.decoded("DTSTART"), ev.decoded("DTEND")
        assert start.tzinfo is None and end.tzinfo is None
        out.append((str(ev["SUMMARY"]), start, end, str(ev["UID"])))
    return out


def test_five_entry_fixture():
    entries = [
        (i, CalendarEntry(f"Meeting {i}; room, 4\\B", f"2024-03-0{i + 1}T09:00:00", f"2024-03-0{i + 1}T10:30:00",
                          location="Main St, Suite 2"))
        for i in range(5)
    ]
    triples = parse_triples(render_ics("p", entries))
    assert len(triples) == 5
    assert len({t[3] for t in triples}) == 5
    assert [t[:3] for t in triples] == [
        (e.title, datetime.fromisoformat(e.start_time), datetime.fromisoformat(e.end_time)) for _, e in entries
    ]


def test_duplicate_event_ids_get_unique_uids():
    e = CalendarEntry("x", "2024-03-01T09:00:00", "2024-03-01T10:00:00")
    uids = [t[3] for t in parse_triples(render_ics("p", [(1, e), (1, e)]))]
    assert len(set(uids)) == 2


@settings(max_examples=80)
@given(st.lists(calendars, max_size=8))
def test_ics_independent_reader_roundtrip(entries):
    text = render_ics("persona-000", list(enumerate(entries)))
    for line in text.split("\r\n"):
        assert len(line.encode("utf-8")) <= 75
    got = [t[:3] for t in parse_triples(text)]
    want = [(e.title, datetime.fromisoformat(e.start_time), datetime.fromisoformat(e.end_time)) for e in entries]
    assert got == want


def test_export_ics_only_calendar_entries(profile, tmp_path):
    cal = Artifact("calendar_entry", "sent", 0, CalendarEntry("Dentist", "2024-02-01T08:00:00", "2024-02-01T09:00:00"))
    fp = assemble("p", profile, forest_of(1), [email("2024-01-01T00:00:00"), cal])
    assert export_ics(fp, tmp_path / "c.ics") == 1
    raw = (tmp_path / "c.ics").read_bytes()
    assert b"\r\n" in raw and raw.count(b"BEGIN:VEVENT") == 1
