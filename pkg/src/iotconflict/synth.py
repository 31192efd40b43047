"""Seeded multi-resident corpora with injected, labelled conflicts.

A generated day has two parts. Background habits put each resident's usual
services at their usual times. After that, an evening window is cut into
equal slots, and each slot holds one *episode*: two residents co-using
services in one room. An episode is either an injected conflict of a given
type, built so that exactly that rule fires, or a plain co-usage whose values
come from each resident's own preferences.

Every cross-resident overlap in the final corpus gets a ground-truth label.
Injected pairs are labelled by construction. All other pairs are labelled by
:func:`ground_truth`. It uses the comfort threshold for numeric settings and
opposing effects for environment interference.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from datetime import datetime, timedelta
from pathlib import Path
from typing import Mapping, Optional, Union

import numpy as np

from .detector import GroundTruthLabel, write_labels
from .errors import InfeasibleSpec, IoFailure, ValidationError
from .ingest import registry_from_dict, registry_to_dict, write_enriched
from .model import Effect, EventSequence, Registry, ServiceEvent, State, TimeInterval
from .rules import ConflictType
from .selection import OverlapPair, find_overlaps, pair_key

DEFAULT_START = datetime(2011, 6, 15)


@dataclass(frozen=True)
class NumericPreference:
    """A resident's habit for one numeric setting.

    With probability ``consistency`` the resident picks the usual setting
    (``mean``); otherwise a normal excursion of width ``spread``, truncated to
    two spreads either side.
    """

    mean: float
    spread: float
    resolution: Optional[float] = None
    consistency: float = 0.0

    def __post_init__(self):
        if self.spread < 0:
            raise ValidationError("spread must be >= 0")
        if not 0 <= self.consistency <= 1:
            raise ValidationError("consistency must lie in [0, 1]")


@dataclass(frozen=True)
class Habit:
    service_id: str
    location: str
    start_hour: float
    duration_minutes: float
    jitter_minutes: float = 15.0
    probability: float = 1.0
    state: State = State.ON


@dataclass(frozen=True)
class ResidentProfile:
    user_id: str
    habits: tuple = ()
    numeric: Mapping = field(default_factory=dict)  # (service_id, attr) -> NumericPreference
    nominal: Mapping = field(default_factory=dict)  # (service_id, attr) -> value


@dataclass(frozen=True)
class CoUsage:
    service_id: str
    location: str
    rate: float
    residents: tuple = ()


@dataclass(frozen=True)
class ScenarioSpec:
    seed: int
    residents: tuple
    services: Registry
    days: int = 1
    injection_rates: Mapping = field(default_factory=dict)
    injection_services: Mapping = field(default_factory=dict)
    injection_location: str = "living room"
    co_usage: tuple = ()
    comfort_threshold: float = 3.0
    start: datetime = DEFAULT_START
    episode_window: tuple = (18.0, 23.5)

    def __post_init__(self):
        if self.days < 1:
            raise InfeasibleSpec("days must be >= 1")
        rates = {ConflictType.parse(k) if not isinstance(k, ConflictType) else k: float(v)
                 for k, v in self.injection_rates.items()}
        if any(r < 0 for r in rates.values()):
            raise InfeasibleSpec("injection rates must be >= 0")
        if any(c.rate < 0 for c in self.co_usage):
            raise InfeasibleSpec("co-usage rates must be >= 0")
        object.__setattr__(self, "injection_rates", rates)
        object.__setattr__(
            self,
            "injection_services",
            {ConflictType.parse(k) if not isinstance(k, ConflictType) else k: tuple(v)
             for k, v in self.injection_services.items()},
        )
        lo, hi = self.episode_window
        if not 0 <= lo < hi <= 24:
            raise InfeasibleSpec("episode window must lie within one day")


@dataclass
class SynthResult:
    events: EventSequence
    labels: list
    injected: dict  # ConflictType -> list of pair keys


# ------------------------------------------------------------------ ground truth


def ground_truth(pair: OverlapPair, reg: Mapping, threshold: float = 3.0) -> list:
    """Conflict types a pair *really* has, in ontology order.

    Same rules as the detector in its permissive mode, except numeric
    settings conflict only when they differ by more than ``threshold`` and
    environment interference needs opposing effects.
    """
    a, b = pair.first, pair.second
    out = []
    if a.service_id == b.service_id:
        desc = reg[a.service_id]
        if a.state != b.state:
            out.append(ConflictType.FUNCTIONAL)
        if desc.bounded and a.capacity_demand + b.capacity_demand > desc.capacity:
            out.append(ConflictType.RESOURCE_CAPACITY)
        common = set(a.qualitative_values) & set(b.qualitative_values)
        if any(a.qualitative_values[k] != b.qualitative_values[k] for k in common):
            out.append(ConflictType.QUALITATIVE)
        common = set(a.quantitative_values) & set(b.quantitative_values)
        if any(abs(a.quantitative_values[k] - b.quantitative_values[k]) > threshold for k in common):
            out.append(ConflictType.QUANTITATIVE)
        return out
    if a.state is not State.ON or b.state is not State.ON:
        return out
    da, db = reg[a.service_id], reg[b.service_id]
    if a.service_id in db.depends_on or b.service_id in da.depends_on:
        out.append(ConflictType.DIRECT_IMPACT)
        return out
    for prop in set(da.env_effects) & set(db.env_effects):
        if {da.env_effects[prop], db.env_effects[prop]} == {Effect.RAISES, Effect.LOWERS}:
            out.append(ConflictType.INDIRECT_IMPACT)
            break
    return out


# ------------------------------------------------------------------ generation


class _Draft(dict):
    """Mutable event under construction."""


def _sample(rng, pref: NumericPreference, domain) -> float:
    lo, hi = pref.mean - 2 * pref.spread, pref.mean + 2 * pref.spread
    value = pref.mean
    if pref.spread > 0 and rng.random() >= pref.consistency:
        for _ in range(64):
            value = rng.normal(pref.mean, pref.spread)
            if lo <= value <= hi:
                break
        else:
            value = min(max(value, lo), hi)
    if pref.resolution:
        value = round(value / pref.resolution) * pref.resolution
    if domain is not None:
        if domain.minimum is not None:
            value = max(value, domain.minimum)
        if domain.maximum is not None:
            value = min(value, domain.maximum)
    return float(value)


def _values(rng, resident: ResidentProfile, desc) -> tuple:
    quant, nominal = {}, {}
    for attr, domain in desc.quantitative_attrs.items():
        pref = resident.numeric.get((desc.service_id, attr))
        if pref is not None:
            quant[attr] = _sample(rng, pref, domain)
    for attr in desc.qualitative_attrs:
        value = resident.nominal.get((desc.service_id, attr))
        if value is not None:
            nominal[attr] = value
    return quant, nominal


def _draft(user, service_id, location, start, end, state=State.ON, quant=None, nominal=None, demand=1):
    return _Draft(
        user=user, service_id=service_id, location=location, start=start, end=end, state=state,
        quant=dict(quant or {}), nominal=dict(nominal or {}), demand=demand,
    )


def _spread_counts(rng, rate: float, days: int) -> np.ndarray:
    total = int(round(rate * days))
    per_day = np.full(days, total // days, dtype=np.int64)
    rem = total - int(per_day.sum())
    if rem:
        per_day[rng.choice(days, size=rem, replace=False)] += 1
    return per_day


def _pick_services(kind: ConflictType, reg: Registry, explicit: tuple) -> tuple:
    """Services for an injected conflict; explicit choices are checked, not trusted."""

    def single_ok(desc) -> bool:
        if kind is ConflictType.FUNCTIONAL:
            return not desc.bounded or desc.capacity >= 2
        if kind is ConflictType.RESOURCE_CAPACITY:
            return desc.bounded
        if kind is ConflictType.QUALITATIVE:
            return bool(desc.qualitative_attrs) and (not desc.bounded or desc.capacity >= 2)
        if kind is ConflictType.QUANTITATIVE:
            return bool(desc.quantitative_attrs) and (not desc.bounded or desc.capacity >= 2)
        return False

    def pair_ok(x, y) -> bool:
        dx, dy = reg[x], reg[y]
        dependent = x in dy.depends_on or y in dx.depends_on
        if kind is ConflictType.DIRECT_IMPACT:
            return x != y and dependent
        opposed = any(
            {dx.env_effects[p], dy.env_effects[p]} == {Effect.RAISES, Effect.LOWERS}
            for p in set(dx.env_effects) & set(dy.env_effects)
        )
        return x != y and not dependent and opposed

    if kind in (ConflictType.DIRECT_IMPACT, ConflictType.INDIRECT_IMPACT):
        if explicit:
            if len(explicit) != 2 or any(s not in reg for s in explicit) or not pair_ok(*explicit):
                raise InfeasibleSpec(f"{kind.value} cannot be injected on services {list(explicit)}")
            return tuple(explicit)
        ids = list(reg)
        for i, x in enumerate(ids):
            for y in ids[i + 1:]:
                if pair_ok(x, y):
                    return (x, y)
        raise InfeasibleSpec(f"no service pair in the registry supports {kind.value}")
    if explicit:
        if len(explicit) != 1 or explicit[0] not in reg or not single_ok(reg[explicit[0]]):
            raise InfeasibleSpec(f"{kind.value} cannot be injected on service {list(explicit)}")
        return (explicit[0],)
    for sid, desc in reg.items():
        if single_ok(desc):
            return (sid,)
    raise InfeasibleSpec(f"no service in the registry supports {kind.value}")


def _episode_pair(rng, kind, services, r1: ResidentProfile, r2: ResidentProfile, spec, slot):
    reg = spec.services
    loc = spec.injection_location
    (a_start, a_end), (b_start, b_end) = slot
    if kind in (ConflictType.DIRECT_IMPACT, ConflictType.INDIRECT_IMPACT):
        x, y = services
        if rng.random() < 0.5:
            x, y = y, x
        qa, na = _values(rng, r1, reg[x])
        qb, nb = _values(rng, r2, reg[y])
        return (_draft(r1.user_id, x, loc, a_start, a_end, State.ON, qa, na),
                _draft(r2.user_id, y, loc, b_start, b_end, State.ON, qb, nb))
    (sid,) = services
    desc = reg[sid]
    qa, na = _values(rng, r1, desc)
    if kind is ConflictType.FUNCTIONAL:
        a = _draft(r1.user_id, sid, loc, a_start, a_end, State.ON, qa, na)
        b = _draft(r2.user_id, sid, loc, b_start, b_end, State.OFF)
        return (a, b) if rng.random() < 0.5 else (_swap_state(a, b))
    if kind is ConflictType.RESOURCE_CAPACITY:
        return (_draft(r1.user_id, sid, loc, a_start, a_end, State.ON, qa, na, demand=max(1, desc.capacity)),
                _draft(r2.user_id, sid, loc, b_start, b_end, State.ON, qa, na, demand=1))
    if kind is ConflictType.QUALITATIVE:
        attr = next(iter(desc.qualitative_attrs))
        allowed = list(desc.qualitative_attrs[attr])
        current = na.get(attr) or (allowed[0] if allowed else "default")
        na = dict(na, **{attr: current})
        choices = [v for v in allowed if v != current] or [current + "-alt"]
        nb = dict(na, **{attr: choices[int(rng.integers(len(choices)))]})
        return (_draft(r1.user_id, sid, loc, a_start, a_end, State.ON, qa, na),
                _draft(r2.user_id, sid, loc, b_start, b_end, State.ON, qa, nb))
    # quantitative: push the second setting clear of the comfort threshold
    attr = next(iter(desc.quantitative_attrs))
    domain = desc.quantitative_attrs[attr]
    base = qa.get(attr)
    if base is None:
        lo = domain.minimum if domain.minimum is not None else 0.0
        hi = domain.maximum if domain.maximum is not None else lo + 20.0
        base = (lo + hi) / 2
    qa = dict(qa, **{attr: base})
    pref2 = r2.numeric.get((sid, attr))
    resolution = (pref2.resolution if pref2 else None) or 1.0
    gap = spec.comfort_threshold + resolution + abs(rng.normal(0.0, pref2.spread if pref2 else 1.0))
    gap = math.ceil(gap / resolution) * resolution
    direction = 1.0 if pref2 is None or pref2.mean >= base else -1.0
    other = base + direction * gap
    if not domain.contains(other):
        other = base - direction * gap
        if not domain.contains(other):
            raise InfeasibleSpec(f"{sid}.{attr} domain too narrow for a {spec.comfort_threshold} gap")
    qb = dict(qa, **{attr: float(other)})
    return (_draft(r1.user_id, sid, loc, a_start, a_end, State.ON, qa, na),
            _draft(r2.user_id, sid, loc, b_start, b_end, State.ON, qb, na))


def _swap_state(a, b):
    a, b = _Draft(a), _Draft(b)
    a["state"], b["state"] = b["state"], a["state"]
    a["quant"], b["quant"] = b["quant"], a["quant"]
    a["nominal"], b["nominal"] = b["nominal"], a["nominal"]
    return a, b


def _slot_times(rng, t0: datetime, length: float) -> tuple:
    """Two intervals inside a slot of ``length`` seconds that overlap for sure."""
    def at(frac_lo, frac_hi):
        return t0 + timedelta(seconds=int(rng.uniform(frac_lo, frac_hi) * length))

    first = (at(0.0, 0.2), at(0.5, 0.8))
    second = (at(0.25, 0.45), at(0.6, 1.0))
    return first, second


def generate_detailed(spec: ScenarioSpec) -> SynthResult:
    rng = np.random.default_rng(spec.seed)
    reg = spec.services
    residents = list(spec.residents)
    by_user = {r.user_id: r for r in residents}
    if len(by_user) != len(residents):
        raise InfeasibleSpec("duplicate resident ids")
    for r in residents:
        for h in r.habits:
            if h.service_id not in reg:
                raise InfeasibleSpec(f"{r.user_id} habit uses unknown service {h.service_id!r}")
        for (sid, attr) in list(r.numeric) + list(r.nominal):
            if sid not in reg:
                raise InfeasibleSpec(f"{r.user_id} preference for unknown service {sid!r}")

    kinds = [t for t in ConflictType if spec.injection_rates.get(t, 0) > 0]
    chosen = {t: _pick_services(t, reg, spec.injection_services.get(t, ())) for t in kinds}
    if (kinds or spec.co_usage) and len(residents) < 2:
        raise InfeasibleSpec("episodes need at least two residents")
    for cu in spec.co_usage:
        if cu.service_id not in reg:
            raise InfeasibleSpec(f"co-usage of unknown service {cu.service_id!r}")
        if cu.residents and (len(cu.residents) < 2 or any(u not in by_user for u in cu.residents)):
            raise InfeasibleSpec(f"co-usage of {cu.service_id} needs two known residents")

    inj_counts = {t: _spread_counts(rng, spec.injection_rates[t], spec.days) for t in kinds}
    co_counts = [_spread_counts(rng, cu.rate, spec.days) for cu in spec.co_usage]

    drafts: list = []
    injected_idx: list = []  # (draft index a, draft index b, type)
    window_lo, window_hi = spec.episode_window
    for day in range(spec.days):
        day0 = spec.start + timedelta(days=day)
        for r in residents:
            for h in r.habits:
                if rng.random() >= h.probability:
                    continue
                jitter = rng.uniform(-h.jitter_minutes, h.jitter_minutes)
                start = day0 + timedelta(minutes=round(h.start_hour * 60 + jitter))
                minutes = max(1, round(h.duration_minutes * rng.uniform(0.8, 1.2)))
                q, n = _values(rng, r, reg[h.service_id]) if State(h.state) is State.ON else ({}, {})
                drafts.append(_draft(r.user_id, h.service_id, h.location, start,
                                     start + timedelta(minutes=minutes), State(h.state), q, n))

        episodes = [("inject", t) for t in kinds for _ in range(int(inj_counts[t][day]))]
        episodes += [("co", i) for i in range(len(spec.co_usage)) for _ in range(int(co_counts[i][day]))]
        if not episodes:
            continue
        order = rng.permutation(len(episodes))
        slot_len = (window_hi - window_lo) * 3600 / len(episodes)
        if slot_len < 120:
            raise InfeasibleSpec(f"day {day}: {len(episodes)} episodes do not fit the episode window")
        for slot_no, ep_idx in enumerate(order):
            what, arg = episodes[ep_idx]
            t0 = day0 + timedelta(seconds=window_lo * 3600 + slot_no * slot_len)
            slot = _slot_times(rng, t0, slot_len)
            if what == "inject":
                i, j = rng.choice(len(residents), size=2, replace=False)
                a, b = _episode_pair(rng, arg, chosen[arg], residents[i], residents[j], spec, slot)
                drafts.extend((a, b))
                injected_idx.append((len(drafts) - 2, len(drafts) - 1, arg))
            else:
                cu = spec.co_usage[arg]
                pool = [by_user[u] for u in cu.residents] if cu.residents else residents
                i, j = rng.choice(len(pool), size=2, replace=False)
                (sa, ea), (sb, eb) = slot
                for who, (s, e) in ((pool[i], (sa, ea)), (pool[j], (sb, eb))):
                    q, n = _values(rng, who, reg[cu.service_id])
                    drafts.append(_draft(who.user_id, cu.service_id, cu.location, s, e, State.ON, q, n))

    order = sorted(range(len(drafts)), key=lambda k: (drafts[k]["start"], drafts[k]["user"],
                                                        drafts[k]["service_id"], k))
    ids = {}
    events = []
    for n, k in enumerate(order):
        d = drafts[k]
        ids[k] = f"ev{n:06d}"
        events.append(ServiceEvent(
            event_id=ids[k], service_id=d["service_id"], state=d["state"],
            interval=TimeInterval(d["start"], d["end"]), location=d["location"], user_id=d["user"],
            qualitative_values=d["nominal"], quantitative_values=d["quant"], capacity_demand=d["demand"],
        ))
    seq = EventSequence(events).validate(reg)

    pairs = {p.key: p for p in find_overlaps(seq)}
    injected = {t: [] for t in ConflictType}
    forced = {}
    for ia, ib, kind in injected_idx:
        key = pair_key(ids[ia], ids[ib])
        pair = pairs.get(key)
        if pair is None:
            raise InfeasibleSpec(f"injected {kind.value} pair {key} does not overlap")
        truth = ground_truth(pair, reg, spec.comfort_threshold)
        if truth != [kind]:
            raise InfeasibleSpec(
                f"injected {kind.value} pair {key} would also match {[t.value for t in truth]}"
            )
        injected[kind].append(key)
        forced[key] = kind

    labels = []
    for key in sorted(pairs):
        if key in forced:
            labels.append(GroundTruthLabel(key[0], key[1], True, forced[key]))
            continue
        truth = ground_truth(pairs[key], reg, spec.comfort_threshold)
        labels.append(GroundTruthLabel(key[0], key[1], bool(truth), truth[0] if truth else None))
    return SynthResult(seq, labels, injected)


def generate(spec: ScenarioSpec) -> tuple:
    """Seeded corpus and its ground-truth labels."""
    result = generate_detailed(spec)
    return result.events, result.labels


def replay_to_enriched(
    seq: EventSequence,
    labels,
    corpus_path: Union[str, Path],
    labels_path: Optional[Union[str, Path]] = None,
    fmt: Optional[str] = None,
) -> int:
    corpus_path = Path(corpus_path)
    fmt = fmt or ("jsonl" if corpus_path.suffix in (".jsonl", ".json") else "csv")
    try:
        with open(corpus_path, "w", encoding="utf-8", newline="") as fh:
            n = write_enriched(seq, fh, fmt)
        if labels_path is not None:
            with open(labels_path, "w", encoding="utf-8", newline="") as fh:
                write_labels(labels, fh)
    except OSError as exc:
        raise IoFailure(f"cannot write synthetic corpus: {exc}") from exc
    return n


# --------------------------------------------------------------- spec files


def spec_from_dict(obj: Mapping) -> ScenarioSpec:
    reg = registry_from_dict(obj["services"])
    residents = []
    for r in obj.get("residents", ()):
        habits = tuple(
            Habit(
                service_id=h["service_id"], location=h["location"], start_hour=float(h["start_hour"]),
                duration_minutes=float(h["duration_minutes"]), jitter_minutes=float(h.get("jitter_minutes", 15)),
                probability=float(h.get("probability", 1.0)), state=State.parse(h.get("state", "On")),
            )
            for h in r.get("habits", ())
        )
        numeric = {
            (sid, attr): NumericPreference(
                float(p["mean"]), float(p["spread"]), p.get("resolution"), float(p.get("consistency", 0.0))
            )
            for sid, attrs in (r.get("numeric") or {}).items()
            for attr, p in attrs.items()
        }
        nominal = {
            (sid, attr): value
            for sid, attrs in (r.get("nominal") or {}).items()
            for attr, value in attrs.items()
        }
        residents.append(ResidentProfile(r["user_id"], habits, numeric, nominal))
    return ScenarioSpec(
        seed=int(obj.get("seed", 0)),
        residents=tuple(residents),
        services=reg,
        days=int(obj.get("days", 1)),
        injection_rates={ConflictType.parse(k): v for k, v in (obj.get("injection_rates") or {}).items()},
        injection_services={ConflictType.parse(k): tuple(v) for k, v in (obj.get("injection_services") or {}).items()},
        injection_location=obj.get("injection_location", "living room"),
        co_usage=tuple(
            CoUsage(c["service_id"], c["location"], float(c["rate"]), tuple(c.get("residents", ())))
            for c in obj.get("co_usage", ())
        ),
        comfort_threshold=float(obj.get("comfort_threshold", 3.0)),
        start=datetime.fromisoformat(obj["start"]) if "start" in obj else DEFAULT_START,
        episode_window=tuple(obj.get("episode_window", (18.0, 23.5))),
    )


def spec_to_dict(spec: ScenarioSpec) -> dict:
    def nest(mapping, encode):
        out: dict = {}
        for (sid, attr), value in mapping.items():
            out.setdefault(sid, {})[attr] = encode(value)
        return out

    return {
        "seed": spec.seed,
        "days": spec.days,
        "start": spec.start.isoformat(),
        "services": registry_to_dict(spec.services)["services"],
        "residents": [
            {
                "user_id": r.user_id,
                "habits": [
                    {"service_id": h.service_id, "location": h.location, "start_hour": h.start_hour,
                     "duration_minutes": h.duration_minutes, "jitter_minutes": h.jitter_minutes,
                     "probability": h.probability, "state": State(h.state).value}
                    for h in r.habits
                ],
                "numeric": nest(r.numeric, lambda p: {"mean": p.mean, "spread": p.spread,
                                                      "resolution": p.resolution,
                                                      "consistency": p.consistency}),
                "nominal": nest(r.nominal, lambda v: v),
            }
            for r in spec.residents
        ],
        "injection_rates": {t.value: r for t, r in spec.injection_rates.items()},
        "injection_services": {t.value: list(s) for t, s in spec.injection_services.items()},
        "injection_location": spec.injection_location,
        "co_usage": [
            {"service_id": c.service_id, "location": c.location, "rate": c.rate, "residents": list(c.residents)}
            for c in spec.co_usage
        ],
        "comfort_threshold": spec.comfort_threshold,
        "episode_window": list(spec.episode_window),
    }


def load_spec(path: Union[str, Path]) -> ScenarioSpec:
    try:
        with open(path, encoding="utf-8") as fh:
            obj = json.load(fh)
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: invalid JSON: {exc}") from exc
    return spec_from_dict(obj)


# ------------------------------------------------------------------- presets


def demo_registry() -> Registry:
    """A small living-room-centred home used by the presets and the examples."""
    return registry_from_dict(
        {
            "services": [
                {"service_id": "tv", "name": "TV", "functions": ["telecasting programs"],
                 "capacity": "unbounded", "qualitative": {"channel": ["news", "sports", "movies"]}},
                {"service_id": "ac", "name": "AC", "functions": ["cooling"], "capacity": "unbounded",
                 "quantitative": {"temperature": {"unit": "C", "min": 10, "max": 35}},
                 "depends_on": ["window"], "env_effects": {"temperature": "lowers"}},
                {"service_id": "window", "name": "Window opener", "functions": ["ventilation"],
                 "env_effects": {"airflow": "raises"}},
                {"service_id": "heater", "name": "Heater", "functions": ["heating"],
                 "env_effects": {"temperature": "raises"}},
                {"service_id": "console", "name": "Game console", "functions": ["gaming"], "capacity": 1},
                {"service_id": "lamp", "name": "Floor lamp", "functions": ["illumination"],
                 "env_effects": {"luminosity": "raises"}},
                {"service_id": "light", "name": "Ceiling light", "functions": ["illumination"],
                 "env_effects": {"luminosity": "raises"}},
            ]
        }
    )


def _resident(user_id, room, hour, temp_mean, channel):
    return ResidentProfile(
        user_id,
        habits=(
            Habit("light", room, hour, 60, 20),
            Habit("ac", room, hour + 1.5, 90, 20),
            Habit("tv", "living room", 8.0 + 2.5 * int(user_id[1:]), 45, 10, probability=0.5),
        ),
        numeric={("ac", "temperature"): NumericPreference(temp_mean, 1.0, 1.0)},
        nominal={("tv", "channel"): channel},
    )


def injection_preset(days: int = 10, rate: float = 2.0, seed: int = 11, incidental_rate: float = 0.3) -> ScenarioSpec:
    """Every conflict type injected ``rate`` times a day, plus a little harmless co-usage."""
    return ScenarioSpec(
        seed=seed,
        residents=(
            _resident("R1", "bedroom 1", 6.5, 21.0, "news"),
            _resident("R2", "bedroom 2", 7.0, 24.0, "news"),
            _resident("R3", "study", 9.0, 22.0, "sports"),
        ),
        services=demo_registry(),
        days=days,
        injection_rates={t: rate for t in ConflictType},
        co_usage=(
            CoUsage("lamp", "living room", incidental_rate),
            CoUsage("light", "living room", incidental_rate),
            CoUsage("ac", "living room", incidental_rate),
        ),
    )


def thermal_preset(
    days: int = 100,
    pairs_per_day: float = 16.0,
    seed: int = 3,
    means: tuple = (22.0, 23.0),
    spread: float = 3.0,
    consistency: float = 0.6,
) -> ScenarioSpec:
    """Two residents sharing the living-room AC every evening, with private history."""
    residents = tuple(
        ResidentProfile(
            user_id,
            habits=(Habit("ac", room, 7.0, 60, 30),),
            numeric={("ac", "temperature"): NumericPreference(mean, spread, 1.0, consistency)},
        )
        for user_id, room, mean in (("R1", "bedroom 1", means[0]), ("R2", "bedroom 2", means[1]))
    )
    return ScenarioSpec(
        seed=seed,
        residents=residents,
        services=demo_registry(),
        days=days,
        co_usage=(CoUsage("ac", "living room", pairs_per_day, ("R1", "R2")),),
    )


def scenario_two_spec(days: int = 30, seed: int = 2, pairs_per_day: float = 2.0) -> ScenarioSpec:
    """R1 likes about 21 degrees, R2 about 26, and they share the living room in the evening."""
    return thermal_preset(
        days=days, pairs_per_day=pairs_per_day, seed=seed, means=(21.0, 26.0), spread=0.7, consistency=0.0
    )


PRESETS = {
    "injection": injection_preset,
    "thermal": thermal_preset,
    "scenario2": scenario_two_spec,
}
