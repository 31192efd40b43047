"""End-to-end acceptance criteria, one test each.

Every test records a PASS/FAIL line that is printed in the terminal summary
under "acceptance criteria".
"""

import io
import math
import time
from datetime import timedelta
from itertools import product

import numpy as np
import pytest

from iotconflict.detector import conflict_to_dict, evaluate, label_by_comfort_rule, run_pipeline
from iotconflict.ingest import (
    load_registry,
    load_sensor_map,
    parse_enriched,
    read_casas_file,
    registry_from_dict,
    write_enriched,
)
from iotconflict.model import EventSequence, ServiceEvent, TimeInterval
from iotconflict.rules import ConflictType, QuantMode, RuleConfig, Strictness, conflict_weight, learn_ranges
from iotconflict.selection import AllenRelation, allen_relation, find_overlaps, find_overlaps_bruteforce
from iotconflict.synth import demo_registry, generate_detailed, injection_preset, thermal_preset

from conftest import DATA, DAY, at, iv, make_home

# --------------------------------------------------------------------- 1


def test_ac1_weight(acceptance):
    t0 = time.perf_counter()
    w = conflict_weight(iv(19.5, 20.5), TimeInterval(at(20 + 10 / 60), at(20 + 40 / 60)))
    elapsed = time.perf_counter() - t0
    ok = abs(w - 20 / 60) <= 1e-9 and elapsed < 1
    acceptance("AC1 conflict weight", ok, f"w={w:.12f} expected={20 / 60:.12f}")
    assert ok


# --------------------------------------------------------------------- 2

HEADER = "event_id,service_id,location,user_id,start,end,state,capacity_demand,q:temperature,n:channel\n"

SCENARIO_ONE = HEADER + """\
tv-r2,tv,Living Room,R2,2018-06-15T19:00:00,2018-06-15T21:00:00,On,1,,
tv-r1,tv,Living Room,R1,2018-06-15T19:30:00,2018-06-15T20:30:00,Off,1,,
"""

# four private nights each, then the shared evening
SCENARIO_TWO = HEADER + "".join(
    f"h1-{d},ac,Bedroom 1,R1,2018-06-1{d}T22:00:00,2018-06-1{d}T23:00:00,On,1,{t},\n"
    for d, t in zip(range(1, 5), (20, 21, 22, 21))
) + "".join(
    f"h2-{d},ac,Bedroom 2,R2,2018-06-1{d}T22:00:00,2018-06-1{d}T23:00:00,On,1,{t},\n"
    for d, t in zip(range(1, 5), (25, 26, 27, 26))
) + """\
ac-r1,ac,Living Room,R1,2018-06-15T19:00:00,2018-06-15T21:00:00,On,1,21,
ac-r2,ac,Living Room,R2,2018-06-15T20:00:00,2018-06-15T22:00:00,On,1,26,
"""


def _only(result, kind):
    return result.counts_by_type[kind] == 1 and result.total == 1


def test_ac2_scenarios(acceptance):
    reg = make_home()
    one = parse_enriched(io.StringIO(SCENARIO_ONE), reg, "csv")
    r1, _, _ = run_pipeline(one, reg, RuleConfig(), train_fraction=None)
    two = parse_enriched(io.StringIO(SCENARIO_TWO), reg, "csv")
    r2h, ranges, _ = run_pipeline(two, reg, RuleConfig(mode=QuantMode.HYBRID))
    r2o, _, _ = run_pipeline(two, reg, RuleConfig(mode=QuantMode.ONTOLOGY))
    ok = (
        _only(r1, ConflictType.FUNCTIONAL)
        and _only(r2h, ConflictType.QUANTITATIVE)
        and _only(r2o, ConflictType.QUANTITATIVE)
        and r1.conflicts[0].weight == pytest.approx(0.5)
        and ranges[("R2", "ac", "temperature")].median == 26
    )
    acceptance("AC2 worked scenarios", ok,
               f"scenario1={r1.total} conflict(s), scenario2 hybrid={r2h.total} ontology={r2o.total}")
    assert ok


# --------------------------------------------------------------------- 3


def _random_world(rng):
    n_services = int(rng.integers(1, 21))
    sids = [f"s{i:02d}" for i in range(n_services)]
    props = ["temperature", "luminosity", "humidity"]
    services = []
    for sid in sids:
        desc = {"service_id": sid,
                "capacity": None if rng.random() < 0.5 else int(rng.integers(1, 4)),
                "qualitative": {"mode": ["a", "b", "c"]},
                "quantitative": {"level": {"min": 0, "max": 10}},
                "env_effects": {p: str(rng.choice(["raises", "lowers", "neutral"]))
                                for p in props if rng.random() < 0.3}}
        others = [o for o in sids if o != sid]
        if others and rng.random() < 0.2:
            desc["depends_on"] = [str(rng.choice(others))]
        services.append(desc)
    reg = registry_from_dict({"services": services})
    n_users = int(rng.integers(1, 5))
    n_events = int(rng.integers(0, 501))
    rooms = ["living room", "kitchen", "den"]
    events = []
    for i in range(n_events):
        # coarse grid so shared endpoints and equal intervals are common
        start = int(rng.integers(0, 2 * 24 * 6)) * 10
        length = int(rng.integers(0, 13)) * 10
        t0 = DAY + timedelta(minutes=start)
        q = {"level": float(rng.integers(0, 11))} if rng.random() < 0.7 else {}
        n = {"mode": str(rng.choice(["a", "b", "c"]))} if rng.random() < 0.7 else {}
        events.append(ServiceEvent(
            f"e{i:04d}", str(rng.choice(sids)), "On" if rng.random() < 0.7 else "Off",
            TimeInterval(t0, t0 + timedelta(minutes=length)), str(rng.choice(rooms)),
            f"R{int(rng.integers(n_users))}", n, q, int(rng.integers(1, 3)),
        ))
    return reg, EventSequence(events), n_services


def _signature(pairs):
    return [(p.first.event_id, p.second.event_id, p.relation, p.overlap) for p in pairs]


def test_ac3_sweep_matches_bruteforce(acceptance):
    rng = np.random.default_rng(20180615)
    t0 = time.perf_counter()
    mismatches = 0
    total_pairs = 0
    for _ in range(100):
        reg, seq, n_services = _random_world(rng)
        fast, slow = find_overlaps(seq), find_overlaps_bruteforce(seq)
        total_pairs += len(slow)
        if _signature(fast) != _signature(slow):
            mismatches += 1
            continue
        mode = QuantMode.HYBRID if rng.random() < 0.5 else QuantMode.ONTOLOGY
        cfg = RuleConfig(mode=mode, strictness=Strictness.PAPER)
        swept, _, _ = run_pipeline(seq, reg, cfg, k=n_services)
        oracle, _, _ = run_pipeline(seq, reg, cfg, oracle=True)
        if [conflict_to_dict(c) for c in swept.conflicts] != [conflict_to_dict(c) for c in oracle.conflicts]:
            mismatches += 1
    elapsed = time.perf_counter() - t0
    ok = mismatches == 0 and elapsed < 30
    acceptance("AC3 sweep equals brute force", ok,
               f"100 corpora, {total_pairs} pairs, {mismatches} mismatches, {elapsed:.1f}s")
    assert ok


# --------------------------------------------------------------------- 4


def test_ac4_injected_conflicts(acceptance):
    t0 = time.perf_counter()
    res = generate_detailed(injection_preset(days=10, rate=2.0))
    reg = demo_registry()
    cfg = RuleConfig(mode=QuantMode.ONTOLOGY, strictness=Strictness.PAPER)
    result, _, _ = run_pipeline(res.events, reg, cfg, k=len(reg), train_fraction=None)
    per_type = {}
    for kind, keys in res.injected.items():
        flagged = result.flagged(kind)
        per_type[kind] = sum(k in flagged for k in keys) / len(keys)
    report = evaluate(result, res.labels)
    elapsed = time.perf_counter() - t0
    enough = all(len(res.injected[k]) >= 20 for k in ConflictType)
    ok = enough and all(r == 1.0 for r in per_type.values()) and report.precision >= 0.95 and elapsed < 10
    acceptance("AC4 injected conflicts", ok,
               f"min recall={min(per_type.values()):.3f} precision={report.precision:.3f} "
               f"({report.true_positives} TP / {report.false_positives} FP) {elapsed:.1f}s")
    assert ok


# --------------------------------------------------------------------- 5


def test_ac5_hybrid_beats_ontology(acceptance):
    t0 = time.perf_counter()
    res = generate_detailed(thermal_preset())
    reg = demo_registry()
    scores = {}
    pairs = None
    for mode in QuantMode:
        cfg = RuleConfig(enabled={ConflictType.QUANTITATIVE}, mode=mode)
        result, _, found = run_pipeline(res.events, reg, cfg)
        pairs = [p for p in found if p.same_service and p.first.service_id == "ac"]
        labels = label_by_comfort_rule(pairs, 3.0)
        scores[mode] = (evaluate(result, labels), result)
    hyb, (ont, ont_result) = scores[QuantMode.HYBRID][0], scores[QuantMode.ONTOLOGY]
    differing = {p.key for p in pairs
                 if p.first.quantitative_values["temperature"] != p.second.quantitative_values["temperature"]}
    elapsed = time.perf_counter() - t0
    ok = (
        len(pairs) >= 300
        and hyb.accuracy >= ont.accuracy + 0.10
        and hyb.f1 > ont.f1
        and ont_result.flagged() == differing
        and elapsed < 10
    )
    acceptance("AC5 hybrid vs ontology", ok,
               f"{len(pairs)} pairs; accuracy {hyb.accuracy:.3f} vs {ont.accuracy:.3f}, "
               f"F1 {hyb.f1:.3f} vs {ont.f1:.3f}")
    assert ok


# --------------------------------------------------------------------- 6


def _reference_median(values):
    s = sorted(values)
    m = len(s) // 2
    return s[m] if len(s) % 2 else (s[m - 1] + s[m]) / 2


def _reference_pstdev(values):
    mean = math.fsum(values) / len(values)
    return math.sqrt(math.fsum((v - mean) ** 2 for v in values) / len(values))


def test_ac6_learned_ranges(acceptance):
    rng = np.random.default_rng(6)
    worst = 0.0
    failures = 0
    for trial in range(1000):
        n = int(rng.integers(1, 60))
        values = (rng.normal(22, 3, n) if trial % 2 else rng.integers(16, 30, n)).astype(float).tolist()
        events = [ServiceEvent(f"e{i}", "ac", "On", iv(0, 0.5, day=i), "den", "R1", {}, {"temperature": v})
                  for i, v in enumerate(values)]
        r = learn_ranges(events)[("R1", "ac", "temperature")]
        for got, want in ((r.median, _reference_median(values)), (r.sigma, _reference_pstdev(values))):
            if not math.isclose(got, want, rel_tol=1e-9, abs_tol=1e-12):
                failures += 1
            if want:
                worst = max(worst, abs(got - want) / abs(want))
    ok = failures == 0
    acceptance("AC6 learned ranges", ok, f"1000 samples, worst relative error {worst:.2e}")
    assert ok


# --------------------------------------------------------------------- 7

PREDICATES = {
    AllenRelation.BEFORE: lambda s1, e1, s2, e2: e1 < s2,
    AllenRelation.MEETS: lambda s1, e1, s2, e2: e1 == s2,
    AllenRelation.OVERLAPS: lambda s1, e1, s2, e2: s1 < s2 < e1 < e2,
    AllenRelation.STARTS: lambda s1, e1, s2, e2: s1 == s2 and e1 < e2,
    AllenRelation.DURING: lambda s1, e1, s2, e2: s2 < s1 and e1 < e2,
    AllenRelation.FINISHES: lambda s1, e1, s2, e2: s2 < s1 and e1 == e2,
    AllenRelation.EQUALS: lambda s1, e1, s2, e2: s1 == s2 and e1 == e2,
    AllenRelation.AFTER: lambda s1, e1, s2, e2: e2 < s1,
    AllenRelation.MET_BY: lambda s1, e1, s2, e2: e2 == s1,
    AllenRelation.OVERLAPPED_BY: lambda s1, e1, s2, e2: s2 < s1 < e2 < e1,
    AllenRelation.STARTED_BY: lambda s1, e1, s2, e2: s1 == s2 and e2 < e1,
    AllenRelation.CONTAINS: lambda s1, e1, s2, e2: s1 < s2 and e2 < e1,
    AllenRelation.FINISHED_BY: lambda s1, e1, s2, e2: s1 < s2 and e1 == e2,
}


def test_ac7_allen_grid(acceptance):
    points = range(6)
    proper = [(s, e) for s, e in product(points, points) if s < e]
    seen = set()
    bad = 0
    for (s1, e1), (s2, e2) in product(proper, proper):
        rel = allen_relation(iv(s1, e1), iv(s2, e2))
        seen.add(rel)
        holding = [r for r, pred in PREDICATES.items() if pred(s1, e1, s2, e2)]
        positive = min(e1, e2) - max(s1, s2) > 0
        if holding != [rel] or rel.overlap_positive != positive:
            bad += 1
        if allen_relation(iv(s2, e2), iv(s1, e1)) is not rel.inverse:
            bad += 1
    ok = seen == set(AllenRelation) and bad == 0
    acceptance("AC7 Allen relations", ok,
               f"{len(proper) ** 2} interval pairs, {len(seen)}/13 relations seen, {bad} violations")
    assert ok


# --------------------------------------------------------------------- 8


def test_ac8_casas_conservation(acceptance):
    casas = DATA / "casas"
    sensors = load_sensor_map(casas / "sensor_map.json")
    reg = load_registry(casas / "registry.json")
    problems = []
    seqs = []
    for name, user in (("resident1.txt", "R1"), ("resident2.txt", "R2")):
        lines = (casas / name).read_text().splitlines()
        # independent count of mapped start records
        on = sum(1 for ln in lines
                 if len(ln.split()) >= 4 and ln.split()[3].upper() in ("ON", "OPEN")
                 and sensors.get(ln.split()[2]) is not None)
        seq, rep = read_casas_file(casas / name, sensors, user, reg)
        seqs.append(seq)
        if not (rep.events_emitted == len(seq) == on == rep.on_records):
            problems.append(f"{name}: {rep.events_emitted} events for {on} ON records")
        if rep.accounted != len(lines):
            problems.append(f"{name}: {rep.accounted} of {len(lines)} lines accounted for")
    merged = EventSequence.merge(*seqs)
    for fmt in ("csv", "jsonl"):
        buf = io.StringIO()
        write_enriched(merged, buf, fmt)
        if parse_enriched(io.StringIO(buf.getvalue()), reg, fmt) != merged:
            problems.append(f"{fmt} round trip lost information")
    ok = not problems
    acceptance("AC8 CASAS conservation", ok, "; ".join(problems) or f"{len(merged)} events, lossless round trip")
    assert ok
