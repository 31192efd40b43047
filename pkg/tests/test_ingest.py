import io
import json
from datetime import datetime, time, timedelta

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from iotconflict.errors import (
    InvalidEvent,
    InvertedInterval,
    IoFailure,
    MalformedLine,
    UnknownAttribute,
    UnknownService,
    UnmappedSensor,
    ValidationError,
)
from iotconflict.ingest import (
    SensorBinding,
    descriptor_from_dict,
    descriptor_to_dict,
    ingest_casas,
    load_registry,
    load_sensor_map,
    pair_on_off,
    parse_casas_line,
    parse_enriched,
    read_casas_file,
    registry_from_dict,
    registry_to_dict,
    write_enriched,
)
from iotconflict.model import EventSequence, ServiceEvent, TimeInterval

from conftest import DATA, DAY, make_home

CASAS = DATA / "casas"


@pytest.fixture(scope="module")
def sensors():
    return load_sensor_map(CASAS / "sensor_map.json")


@pytest.fixture(scope="module")
def casas_registry():
    return load_registry(CASAS / "registry.json")


def test_parse_line_truncates_fraction():
    rec = parse_casas_line("2011-06-15 21:00:05.5000009 T101 20.5 Cook begin", 3)
    assert rec.time == time(21, 0, 5, 500000)
    assert (rec.sensor, rec.status, rec.numeric, rec.line_no) == ("T101", "20.5", 20.5, 3)
    assert parse_casas_line("2011-06-15 07:00:00.9999999 L001 ON").time.microsecond == 999999
    assert parse_casas_line("2011-06-15 07:00:00 L001 ON").numeric is None


@pytest.mark.parametrize("line", ["2011-06-15 07:00:00", "junk 07:00:00 L001 ON", "2011-06-15 7h L001 ON"])
def test_parse_line_rejects_garbage(line):
    with pytest.raises(MalformedLine):
        parse_casas_line(line)


def _lines(*rows):
    return [f"2011-06-15 {t} {s} {v}" for t, s, v in rows]


MAP = {"L1": SensorBinding("light", "Living Room"), "T1": SensorBinding("ac", "Living Room"),
       "A1": SensorBinding("ac", "Living Room"), "B1": None}


def test_pairing_rules():
    seq, rep = ingest_casas(
        _lines(
            ("07:00:00", "L1", "OFF"),  # orphan
            ("08:00:00", "L1", "ON"),
            ("09:00:00", "L1", "ON"),  # repeated ON closes and reopens
            ("10:00:00", "L1", "OFF"),
            ("11:00:00", "B1", "88"),
            ("12:00:00", "L1", "ON"),  # still pending at end
            ("12:30:00", "L1", "FLICKER"),
        ),
        MAP,
        "R1",
    )
    spans = [(e.start.hour, e.end.hour, e.end.minute) for e in seq]
    assert spans == [(8, 9, 0), (9, 10, 0), (12, 12, 30)]
    assert (rep.unmatched_off, rep.unmatched_on, rep.on_records, rep.off_matched) == (1, 1, 3, 1)
    assert rep.events_emitted == rep.on_records == len(seq)
    assert rep.accounted == 7
    assert all(e.location == "living room" and e.user_id == "R1" for e in seq)
    assert [e.event_id for e in seq] == ["R1-000000", "R1-000001", "R1-000002"]


def test_unmapped_sensor_is_an_error():
    with pytest.raises(UnmappedSensor):
        ingest_casas(_lines(("08:00:00", "Z9", "ON")), MAP, "R1")


def test_unsorted_records_rejected_by_pairer():
    recs = [parse_casas_line(l) for l in _lines(("09:00:00", "L1", "ON"), ("08:00:00", "L1", "OFF"))]
    with pytest.raises(ValidationError):
        pair_on_off(recs, MAP, "R1")


def test_readings_fold_into_enclosing_interval(home):
    seq, rep = ingest_casas(
        _lines(("08:00:00", "A1", "ON"), ("08:10:00", "T1", "20"), ("08:20:00", "T1", "22"),
               ("09:00:00", "A1", "OFF"), ("09:30:00", "T1", "30")),
        MAP, "R1", home,
    )
    (only,) = seq
    assert only.quantitative_values == {"temperature": 21.0}
    assert rep.readings_folded == 2 and len(rep.discarded) == 1
    # without a registry there is no attribute to fold into
    _, bare = ingest_casas(_lines(("08:00:00", "A1", "ON"), ("08:10:00", "T1", "20")), MAP, "R1")
    assert bare.readings_folded == 0 and len(bare.discarded) == 1


def test_sample_corpus(sensors, casas_registry):
    s1, r1 = read_casas_file(CASAS / "resident1.txt", sensors, "R1", casas_registry)
    s2, r2 = read_casas_file(CASAS / "resident2.txt", sensors, "R2", casas_registry)
    rep = r1.merge(r2)
    assert rep.to_dict()["events_emitted"] == 18
    assert (rep.unmatched_on, rep.unmatched_off, rep.readings_folded, len(rep.discarded)) == (1, 2, 6, 7)
    assert r1.accounted == 27 and r2.accounted == 20
    ac = [e for e in s1 if e.service_id == "ac"]
    assert [e.quantitative_values["temperature"] for e in ac] == [21.0, 21.0]
    assert [e.quantitative_values["temperature"] for e in s2 if e.service_id == "ac"] == [26.0, 25.5, 25.0]


def test_read_missing_file(sensors):
    with pytest.raises(IoFailure):
        read_casas_file(CASAS / "nope.txt", sensors, "R1")


# ------------------------------------------------------------------ enriched


CSV = """event_id,service_id,location,user_id,start,end,state,capacity_demand,q:temperature,n:channel
e1,tv,Living Room,R1,2018-06-15T19:30:00,2018-06-15T20:30:00,Off,1,,
e2,tv,living room,R2,2018-06-15T19:00:00,2018-06-15T21:00:00,On,1,,news
e3,ac,living room,R1,2018-06-15T19:00:00.000001,2018-06-15T21:00:00,On,1,21.5,
"""


def test_parse_enriched_csv(home):
    seq = parse_enriched(io.StringIO(CSV), home, "csv")
    assert [e.event_id for e in seq] == ["e2", "e3", "e1"]
    e = seq.by_id()
    assert e["e1"].state.value == "Off" and e["e1"].location == "living room"
    assert e["e2"].qualitative_values == {"channel": "news"}
    assert e["e3"].quantitative_values == {"temperature": 21.5}
    assert e["e3"].start.microsecond == 1


@pytest.mark.parametrize(
    "edit, exc",
    [
        (lambda s: s.replace("2018-06-15T20:30:00", "2018-06-15T18:30:00"), InvertedInterval),
        (lambda s: s.replace(",tv,", ",fridge,", 1), UnknownService),
        (lambda s: s.replace("n:channel", "n:volume"), UnknownAttribute),
        (lambda s: s.replace(",On,1,21.5,", ",On,1,21.5"), MalformedLine),
        (lambda s: s.replace("Off,1", "Maybe,1"), InvalidEvent),
        (lambda s: s.replace("2018-06-15T19:00:00,", "yesterday,", 1), MalformedLine),
    ],
)
def test_parse_enriched_errors(home, edit, exc):
    with pytest.raises(exc):
        parse_enriched(io.StringIO(edit(CSV)), home, "csv")


def test_jsonl_nested_and_prefixed(home):
    rows = [
        {"event_id": "x", "service_id": "ac", "location": "Den", "user_id": "R1",
         "start": "2018-06-15T19:00:00+02:00", "end": "2018-06-15T20:00:00+02:00", "state": "On",
         "quantitative": {"temperature": 20}},
        {"event_id": "y", "service_id": "tv", "location": "den", "user_id": "R2",
         "start": "2018-06-15T17:00:00", "end": "2018-06-15T18:00:00", "state": "On", "n:channel": "sports"},
    ]
    seq = parse_enriched(io.StringIO("\n".join(json.dumps(r) for r in rows)), home, "jsonl")
    x = seq.by_id()["x"]
    assert x.start == datetime(2018, 6, 15, 17, 0)  # converted to UTC
    assert seq.by_id()["y"].qualitative_values == {"channel": "sports"}


def test_parse_records_iterable(home):
    rows = [{"event_id": "x", "service_id": "tv", "location": "den", "user_id": "R1",
             "start": "2018-06-15T17:00:00", "end": "2018-06-15T18:00:00", "state": "On"}]
    assert len(parse_enriched(rows, home)) == 1


values = st.floats(min_value=10, max_value=35, allow_nan=False)
stamps = st.integers(0, 10**11)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(stamps, st.integers(0, 10**9), values, st.sampled_from(["news", "sports", None]),
                          st.sampled_from(["On", "Off"]), st.sampled_from(["R1", "R2", "R3"])), max_size=15),
       st.sampled_from(["csv", "jsonl"]))
def test_enriched_roundtrip(rows, fmt):
    home = make_home()
    events = []
    for i, (t0, length, temp, chan, state, user) in enumerate(rows):
        start = DAY + timedelta(microseconds=t0)
        svc = "tv" if chan else "ac"
        events.append(ServiceEvent(
            f"e{i}", svc, state, TimeInterval(start, start + timedelta(microseconds=length)), "Living Room", user,
            qualitative_values={"channel": chan} if chan else {},
            quantitative_values={} if chan else {"temperature": temp},
        ))
    seq = EventSequence(events)
    buf = io.StringIO()
    assert write_enriched(seq, buf, fmt) == len(seq)
    assert parse_enriched(io.StringIO(buf.getvalue()), home, fmt) == seq


def test_registry_roundtrip(home, tmp_path):
    again = registry_from_dict(registry_to_dict(home))
    assert list(again) == list(home) and all(again[k] == home[k] for k in home)
    d = descriptor_to_dict(home["ac"])
    assert descriptor_from_dict(d) == home["ac"]
    assert descriptor_from_dict({"service_id": "x", "capacity": "∞"}).capacity is None
    with pytest.raises(ValidationError):
        registry_from_dict({"services": [{"service_id": "a", "depends_on": ["ghost"]}]})
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    with pytest.raises(ValidationError):
        load_registry(path)
    with pytest.raises(IoFailure):
        load_registry(tmp_path / "missing.json")


def test_sensor_map_null_entries(sensors):
    assert sensors["BATV01"] is None
    assert sensors["TV01"] == SensorBinding("tv", "living room")
