"""Conflict ontology rules, preference-range learning and conflict weights."""

from __future__ import annotations

import enum
import json
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Optional, Union

import numpy as np

from .errors import ConfigError, IoFailure, NonOverlapping
from .model import Effect, EventSequence, ServiceDescriptor, ServiceEvent, State, TimeInterval
from .selection import OverlapPair


class ConflictType(str, enum.Enum):
    FUNCTIONAL = "Functional"
    RESOURCE_CAPACITY = "ResourceCapacity"
    QUALITATIVE = "QualitativeNonFunctional"
    QUANTITATIVE = "QuantitativeNonFunctional"
    DIRECT_IMPACT = "DirectServiceImpact"
    INDIRECT_IMPACT = "IndirectServiceImpact"

    @classmethod
    def parse(cls, raw: str) -> "ConflictType":
        text = raw.strip().lower().replace("_", "").replace("-", "").replace(" ", "")
        for member in cls:
            if text in (member.value.lower(), member.name.lower().replace("_", "")):
                return member
        for alias, member in _ALIASES.items():
            if text == alias:
                return member
        raise ConfigError(f"unknown conflict type {raw!r}")

    @property
    def category(self) -> str:
        """Parent class in the ontology tree (derived, never stored)."""
        return _PARENTS[self]


_ALIASES = {
    "capacity": ConflictType.RESOURCE_CAPACITY,
    "qualitative": ConflictType.QUALITATIVE,
    "quantitative": ConflictType.QUANTITATIVE,
    "direct": ConflictType.DIRECT_IMPACT,
    "indirect": ConflictType.INDIRECT_IMPACT,
}

_PARENTS = {
    ConflictType.FUNCTIONAL: "IndividualService",
    ConflictType.RESOURCE_CAPACITY: "NonFunctional",
    ConflictType.QUALITATIVE: "NonFunctional",
    ConflictType.QUANTITATIVE: "NonFunctional",
    ConflictType.DIRECT_IMPACT: "ServiceImpact",
    ConflictType.INDIRECT_IMPACT: "ServiceImpact",
}

TYPE_ORDER = {t: i for i, t in enumerate(ConflictType)}


class QuantMode(str, enum.Enum):
    ONTOLOGY = "ontology"
    HYBRID = "hybrid"


class Strictness(str, enum.Enum):
    PAPER = "paper"
    DIRECTIONAL = "directional"


def conflict_weight(a: TimeInterval, b: TimeInterval) -> float:
    """Share of the longer interval during which both are active."""
    overlap = a.intersection(b)
    if overlap is None:
        raise NonOverlapping(f"{a} and {b} do not overlap")
    return overlap.micros / max(a.micros, b.micros)


@dataclass(frozen=True)
class ConflictRecord:
    type: ConflictType
    pair: OverlapPair
    attribute: Optional[str] = None
    weight: float = 1.0
    detail: str = ""

    def sort_key(self):
        p = self.pair
        return (p.location, p.overlap.start, TYPE_ORDER[self.type], p.first.event_id, p.second.event_id)


def _record(kind: ConflictType, pair: OverlapPair, detail: str, attribute: Optional[str] = None) -> ConflictRecord:
    return ConflictRecord(kind, pair, attribute, conflict_weight(pair.first.interval, pair.second.interval), detail)


# ------------------------------------------------------------------ single service


def eval_functional(pair: OverlapPair) -> Optional[ConflictRecord]:
    a, b = pair.first, pair.second
    if a.service_id != b.service_id or a.state == b.state:
        return None
    return _record(
        ConflictType.FUNCTIONAL,
        pair,
        f"{a.service_id}: {a.user_id} wants {a.state.value}, {b.user_id} wants {b.state.value}",
    )


def eval_capacity(pair: OverlapPair, descriptor: ServiceDescriptor) -> Optional[ConflictRecord]:
    a, b = pair.first, pair.second
    if a.service_id != b.service_id or not descriptor.bounded:
        return None
    demand = a.capacity_demand + b.capacity_demand
    if demand <= descriptor.capacity:
        return None
    return _record(
        ConflictType.RESOURCE_CAPACITY,
        pair,
        f"{a.service_id}: demand {demand} exceeds capacity {descriptor.capacity}",
    )


def _common_attrs(a: Mapping, b: Mapping, descriptor: Optional[ServiceDescriptor], schema_attr: str) -> list:
    common = set(a) & set(b)
    order = list(getattr(descriptor, schema_attr)) if descriptor is not None else []
    ordered = [k for k in order if k in common]
    return ordered + sorted(common - set(ordered))


def eval_qualitative(pair: OverlapPair, descriptor: Optional[ServiceDescriptor] = None) -> Optional[ConflictRecord]:
    a, b = pair.first, pair.second
    if a.service_id != b.service_id:
        return None
    for name in _common_attrs(a.qualitative_values, b.qualitative_values, descriptor, "qualitative_attrs"):
        va, vb = a.qualitative_values[name], b.qualitative_values[name]
        if va != vb:
            return _record(
                ConflictType.QUALITATIVE,
                pair,
                f"{a.service_id}.{name}: {a.user_id} wants {va}, {b.user_id} wants {vb}",
                name,
            )
    return None


# ------------------------------------------------------------ preference ranges


@dataclass(frozen=True)
class PreferenceRange:
    """Open interval ``(median - sigma, median + sigma)`` of one resident's habit."""

    user_id: str
    service_id: str
    attribute: str
    median: float
    sigma: float
    sample_count: int

    @property
    def low(self) -> float:
        return self.median - self.sigma

    @property
    def high(self) -> float:
        return self.median + self.sigma

    def contains(self, value: float) -> bool:
        return self.low < value < self.high


def learn_ranges(training: Iterable[ServiceEvent]) -> dict:
    """Median and population standard deviation per (user, service, attribute)."""
    samples = defaultdict(list)
    for ev in training:
        for name, value in ev.quantitative_values.items():
            samples[(ev.user_id, ev.service_id, name)].append(value)
    ranges = {}
    for key in sorted(samples):
        values = np.asarray(samples[key], dtype=np.float64)
        ranges[key] = PreferenceRange(*key, float(np.median(values)), float(np.std(values)), len(values))
    return ranges


def chronological_split(seq: EventSequence, train_fraction: float = 0.8) -> tuple:
    """Per-user split: each resident's earliest ``floor(n * fraction)`` events train."""
    if not 0 < train_fraction < 1:
        raise ConfigError("train fraction must lie strictly between 0 and 1")
    per_user = defaultdict(list)
    for ev in seq:
        per_user[ev.user_id].append(ev)
    train, test = [], []
    for events in per_user.values():
        cut = int(len(events) * train_fraction)
        train.extend(events[:cut])
        test.extend(events[cut:])
    return EventSequence(train), EventSequence(test)


def eval_quantitative(
    pair: OverlapPair,
    ranges: Optional[Mapping] = None,
    mode: Union[QuantMode, str] = QuantMode.ONTOLOGY,
    descriptor: Optional[ServiceDescriptor] = None,
) -> Optional[ConflictRecord]:
    """Strict inequality (ontology) or learned-range test (hybrid).

    In hybrid mode each value is checked against the *other* resident's range;
    a resident without a learned range falls back to strict inequality.
    """
    mode = QuantMode(mode)
    ranges = ranges or {}
    a, b = pair.first, pair.second
    if a.service_id != b.service_id:
        return None
    for name in _common_attrs(a.quantitative_values, b.quantitative_values, descriptor, "quantitative_attrs"):
        va, vb = a.quantitative_values[name], b.quantitative_values[name]
        if mode is QuantMode.ONTOLOGY:
            if va != vb:
                return _record(
                    ConflictType.QUANTITATIVE, pair, f"{a.service_id}.{name}: {va:g} != {vb:g}", name
                )
            continue
        reasons = []
        for value, owner, other in ((va, a, b), (vb, b, a)):
            rng = ranges.get((other.user_id, a.service_id, name))
            if rng is None:
                if va != vb:
                    reasons.append(f"{value:g} from {owner.user_id} differs and {other.user_id} has no history")
            elif not rng.contains(value):
                reasons.append(
                    f"{value:g} from {owner.user_id} outside {other.user_id}'s range ({rng.low:g}, {rng.high:g})"
                )
        if reasons:
            return _record(ConflictType.QUANTITATIVE, pair, f"{a.service_id}.{name}: " + "; ".join(reasons), name)
    return None


# ------------------------------------------------------------- multiple services


def eval_direct_impact(pair: OverlapPair, reg: Mapping[str, ServiceDescriptor]) -> Optional[ConflictRecord]:
    a, b = pair.first, pair.second
    if a.service_id == b.service_id:
        return None
    if not (a.state is State.ON and b.state is State.ON):
        return None
    if a.service_id in reg[b.service_id].depends_on:
        dep = f"{b.service_id} depends on {a.service_id}"
    elif b.service_id in reg[a.service_id].depends_on:
        dep = f"{a.service_id} depends on {b.service_id}"
    else:
        return None
    return _record(ConflictType.DIRECT_IMPACT, pair, dep)


_OPPOSED = {frozenset((Effect.RAISES, Effect.LOWERS))}


def eval_indirect_impact(
    pair: OverlapPair,
    reg: Mapping[str, ServiceDescriptor],
    strictness: Union[Strictness, str] = Strictness.DIRECTIONAL,
) -> Optional[ConflictRecord]:
    strictness = Strictness(strictness)
    a, b = pair.first, pair.second
    if a.service_id == b.service_id:
        return None
    if not (a.state is State.ON and b.state is State.ON):
        return None
    da, db = reg[a.service_id], reg[b.service_id]
    if a.service_id in db.depends_on or b.service_id in da.depends_on:
        return None
    for prop in sorted(set(da.env_effects) & set(db.env_effects)):
        ea, eb = da.env_effects[prop], db.env_effects[prop]
        if strictness is Strictness.PAPER or frozenset((ea, eb)) in _OPPOSED:
            return _record(
                ConflictType.INDIRECT_IMPACT,
                pair,
                f"{a.service_id} {ea.value} and {b.service_id} {eb.value} {prop}",
            )
    return None


# ------------------------------------------------------------------- rule config


@dataclass(frozen=True)
class RuleConfig:
    enabled: frozenset = field(default_factory=lambda: frozenset(ConflictType))
    mode: QuantMode = QuantMode.HYBRID
    strictness: Strictness = Strictness.DIRECTIONAL

    def __post_init__(self):
        object.__setattr__(self, "enabled", frozenset(ConflictType(t) for t in self.enabled))
        object.__setattr__(self, "mode", QuantMode(self.mode))
        object.__setattr__(self, "strictness", Strictness(self.strictness))

    def replace(self, **changes) -> "RuleConfig":
        values = {"enabled": self.enabled, "mode": self.mode, "strictness": self.strictness}
        values.update({k: v for k, v in changes.items() if v is not None})
        return RuleConfig(**values)

    @classmethod
    def from_dict(cls, obj: Mapping) -> "RuleConfig":
        enabled = set(ConflictType)
        rules = obj.get("rules")
        if isinstance(rules, Mapping):
            enabled = {ConflictType.parse(name) for name, on in rules.items() if on}
            for name in rules:
                ConflictType.parse(name)
        elif rules is not None:
            enabled = {ConflictType.parse(name) for name in rules}
        try:
            return cls(
                frozenset(enabled),
                QuantMode(obj.get("mode", QuantMode.HYBRID.value)),
                Strictness(obj.get("strictness", Strictness.DIRECTIONAL.value)),
            )
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def to_dict(self) -> dict:
        return {
            "rules": {t.value: t in self.enabled for t in ConflictType},
            "mode": self.mode.value,
            "strictness": self.strictness.value,
        }


def load_rule_config(path: Union[str, Path]) -> RuleConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            obj = json.load(fh)
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON: {exc}") from exc
    return RuleConfig.from_dict(obj)


def evaluate_pair(
    pair: OverlapPair,
    config: RuleConfig,
    reg: Mapping[str, ServiceDescriptor],
    ranges: Optional[Mapping] = None,
) -> list:
    """Every enabled rule's verdict on one pair, in ontology order."""
    out = []
    on = config.enabled
    if pair.same_service:
        desc = reg[pair.first.service_id]
        if ConflictType.FUNCTIONAL in on:
            out.append(eval_functional(pair))
        if ConflictType.RESOURCE_CAPACITY in on:
            out.append(eval_capacity(pair, desc))
        if ConflictType.QUALITATIVE in on:
            out.append(eval_qualitative(pair, desc))
        if ConflictType.QUANTITATIVE in on:
            out.append(eval_quantitative(pair, ranges, config.mode, desc))
    else:
        if ConflictType.DIRECT_IMPACT in on:
            out.append(eval_direct_impact(pair, reg))
        if ConflictType.INDIRECT_IMPACT in on:
            out.append(eval_indirect_impact(pair, reg, config.strictness))
    return [r for r in out if r is not None]
