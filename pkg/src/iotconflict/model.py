"""Domain types for IoT services and their usage events."""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field
from datetime import datetime, timedelta
from types import MappingProxyType
from typing import Iterable, Iterator, Mapping, Optional

from .errors import (
    InvalidEvent,
    InvalidLocation,
    InvertedInterval,
    UnknownAttribute,
    UnknownService,
    ValidationError,
)

ONE_MICROSECOND = timedelta(microseconds=1)
EPOCH = datetime(1970, 1, 1)

_WS = re.compile(r"\s+")


class State(str, enum.Enum):
    ON = "On"
    OFF = "Off"

    @classmethod
    def parse(cls, raw: str) -> "State":
        text = raw.strip().lower()
        if text == "on":
            return cls.ON
        if text == "off":
            return cls.OFF
        raise InvalidEvent(f"unknown service state {raw!r}")


class Effect(str, enum.Enum):
    """Direction in which a running service pushes an environment property."""

    RAISES = "raises"
    LOWERS = "lowers"
    NEUTRAL = "neutral"


def canonicalize_location(raw: str) -> str:
    """Trim, case-fold and collapse internal whitespace.

    >>> canonicalize_location("  Living   Room ")
    'living room'
    """
    text = _WS.sub(" ", raw.strip()).casefold()
    if not text:
        raise InvalidLocation(f"location {raw!r} is empty")
    return text


def to_micros(ts: datetime) -> int:
    """Microseconds since the Unix epoch for a naive timestamp."""
    return (ts - EPOCH) // ONE_MICROSECOND


@dataclass(frozen=True)
class QuantitativeAttr:
    unit: str = ""
    minimum: Optional[float] = None
    maximum: Optional[float] = None

    def contains(self, value: float) -> bool:
        if self.minimum is not None and value < self.minimum:
            return False
        if self.maximum is not None and value > self.maximum:
            return False
        return True


@dataclass(frozen=True)
class ServiceDescriptor:
    """Static description of one IoT service.

    ``capacity=None`` means unbounded (a TV can be watched by any number of
    residents). ``qualitative_attrs`` maps each nominal attribute to its allowed
    values; an empty tuple allows any value. Attribute order is schema order.
    """

    service_id: str
    name: str = ""
    functions: frozenset = frozenset()
    capacity: Optional[int] = None
    qualitative_attrs: Mapping[str, tuple] = field(default_factory=dict)
    quantitative_attrs: Mapping[str, QuantitativeAttr] = field(default_factory=dict)
    depends_on: frozenset = frozenset()
    env_effects: Mapping[str, Effect] = field(default_factory=dict)

    def __post_init__(self):
        if not self.service_id:
            raise ValidationError("service_id must be non-empty")
        if self.capacity is not None and self.capacity < 0:
            raise ValidationError(f"{self.service_id}: capacity must be >= 0")
        shared = set(self.qualitative_attrs) & set(self.quantitative_attrs)
        if shared:
            raise ValidationError(
                f"{self.service_id}: attributes {sorted(shared)} are both qualitative and quantitative"
            )
        if self.service_id in self.depends_on:
            raise ValidationError(f"{self.service_id}: a service cannot depend on itself")
        object.__setattr__(self, "functions", frozenset(self.functions))
        object.__setattr__(self, "depends_on", frozenset(self.depends_on))
        object.__setattr__(
            self,
            "qualitative_attrs",
            MappingProxyType({k: tuple(v) for k, v in self.qualitative_attrs.items()}),
        )
        object.__setattr__(self, "quantitative_attrs", MappingProxyType(dict(self.quantitative_attrs)))
        object.__setattr__(
            self, "env_effects", MappingProxyType({k: Effect(v) for k, v in self.env_effects.items()})
        )

    @property
    def bounded(self) -> bool:
        return self.capacity is not None

    def __hash__(self):
        return hash(self.service_id)

    def __eq__(self, other):
        if not isinstance(other, ServiceDescriptor):
            return NotImplemented
        return (
            self.service_id == other.service_id
            and self.name == other.name
            and self.functions == other.functions
            and self.capacity == other.capacity
            and dict(self.qualitative_attrs) == dict(other.qualitative_attrs)
            and dict(self.quantitative_attrs) == dict(other.quantitative_attrs)
            and self.depends_on == other.depends_on
            and dict(self.env_effects) == dict(other.env_effects)
        )


class Registry(Mapping[str, ServiceDescriptor]):
    """Ordered, read-only collection of service descriptors keyed by id."""

    def __init__(self, services: Iterable[ServiceDescriptor] = ()):
        self._services: dict[str, ServiceDescriptor] = {}
        for svc in services:
            if svc.service_id in self._services:
                raise ValidationError(f"duplicate service_id {svc.service_id!r}")
            self._services[svc.service_id] = svc

    def __getitem__(self, service_id: str) -> ServiceDescriptor:
        try:
            return self._services[service_id]
        except KeyError:
            raise UnknownService(f"unknown service {service_id!r}") from None

    def __contains__(self, service_id) -> bool:
        return service_id in self._services

    def __iter__(self) -> Iterator[str]:
        return iter(self._services)

    def __len__(self) -> int:
        return len(self._services)

    def __repr__(self) -> str:
        return f"Registry({list(self._services)})"

    def dependent(self, a: str, b: str) -> bool:
        """True when either service declares a functional dependency on the other."""
        return b in self[a].depends_on or a in self[b].depends_on


@dataclass(frozen=True, order=True)
class TimeInterval:
    """Half-open interval ``[start, end)``."""

    start: datetime
    end: datetime

    def __post_init__(self):
        if self.start > self.end:
            raise InvertedInterval(f"interval starts at {self.start} after it ends at {self.end}")

    @property
    def duration(self) -> timedelta:
        return self.end - self.start

    @property
    def micros(self) -> int:
        return self.duration // ONE_MICROSECOND

    def intersection(self, other: "TimeInterval") -> Optional["TimeInterval"]:
        lo = max(self.start, other.start)
        hi = min(self.end, other.end)
        if lo >= hi:
            return None
        return TimeInterval(lo, hi)

    def overlaps(self, other: "TimeInterval") -> bool:
        return self.intersection(other) is not None


@dataclass(frozen=True)
class ServiceEvent:
    event_id: str
    service_id: str
    state: State
    interval: TimeInterval
    location: str
    user_id: str
    qualitative_values: Mapping[str, str] = field(default_factory=dict)
    quantitative_values: Mapping[str, float] = field(default_factory=dict)
    capacity_demand: int = 1

    def __post_init__(self):
        object.__setattr__(self, "state", State(self.state))
        object.__setattr__(self, "location", canonicalize_location(self.location))
        object.__setattr__(self, "qualitative_values", MappingProxyType(dict(self.qualitative_values)))
        object.__setattr__(
            self,
            "quantitative_values",
            MappingProxyType({k: float(v) for k, v in self.quantitative_values.items()}),
        )
        if self.capacity_demand < 1:
            raise InvalidEvent(f"{self.event_id}: capacity_demand must be >= 1")

    @property
    def start(self) -> datetime:
        return self.interval.start

    @property
    def end(self) -> datetime:
        return self.interval.end

    def sort_key(self):
        return (self.interval.start, self.event_id)

    def __hash__(self):
        return hash(self.event_id)

    def __eq__(self, other):
        if not isinstance(other, ServiceEvent):
            return NotImplemented
        return (
            self.event_id == other.event_id
            and self.service_id == other.service_id
            and self.state == other.state
            and self.interval == other.interval
            and self.location == other.location
            and self.user_id == other.user_id
            and dict(self.qualitative_values) == dict(other.qualitative_values)
            and dict(self.quantitative_values) == dict(other.quantitative_values)
            and self.capacity_demand == other.capacity_demand
        )


def validate_event(ev: ServiceEvent, reg: Mapping[str, ServiceDescriptor]) -> ServiceEvent:
    """Check ``ev`` against its service descriptor and return it unchanged."""
    if ev.interval.start > ev.interval.end:
        raise InvertedInterval(f"{ev.event_id}: inverted interval")
    if ev.service_id not in reg:
        raise UnknownService(f"{ev.event_id}: unknown service {ev.service_id!r}")
    desc = reg[ev.service_id]
    for name, value in ev.qualitative_values.items():
        if name not in desc.qualitative_attrs:
            raise UnknownAttribute(f"{ev.event_id}: {ev.service_id} has no nominal attribute {name!r}")
        allowed = desc.qualitative_attrs[name]
        if allowed and value not in allowed:
            raise InvalidEvent(f"{ev.event_id}: {value!r} is not an allowed value of {name!r}")
    for name, value in ev.quantitative_values.items():
        if name not in desc.quantitative_attrs:
            raise UnknownAttribute(f"{ev.event_id}: {ev.service_id} has no numeric attribute {name!r}")
        if not desc.quantitative_attrs[name].contains(value):
            raise InvalidEvent(f"{ev.event_id}: {name}={value} outside the declared domain")
    if ev.capacity_demand < 1:
        raise InvalidEvent(f"{ev.event_id}: capacity_demand must be >= 1")
    return ev


class EventSequence:
    """Events ordered by ``(interval.start, event_id)``."""

    __slots__ = ("_events",)

    def __init__(self, events: Iterable[ServiceEvent] = ()):
        evs = sorted(events, key=ServiceEvent.sort_key)
        seen = set()
        for ev in evs:
            if ev.event_id in seen:
                raise ValidationError(f"duplicate event_id {ev.event_id!r}")
            seen.add(ev.event_id)
        self._events = tuple(evs)

    @property
    def events(self) -> tuple:
        return self._events

    def __iter__(self) -> Iterator[ServiceEvent]:
        return iter(self._events)

    def __len__(self) -> int:
        return len(self._events)

    def __getitem__(self, idx):
        return self._events[idx]

    def __eq__(self, other):
        if not isinstance(other, EventSequence):
            return NotImplemented
        return self._events == other._events

    def __repr__(self) -> str:
        return f"EventSequence(<{len(self._events)} events>)"

    def filter(self, predicate) -> "EventSequence":
        return EventSequence(ev for ev in self._events if predicate(ev))

    def by_id(self) -> dict:
        return {ev.event_id: ev for ev in self._events}

    def users(self) -> list:
        return sorted({ev.user_id for ev in self._events})

    def validate(self, reg: Mapping[str, ServiceDescriptor]) -> "EventSequence":
        for ev in self._events:
            validate_event(ev, reg)
        return self

    @staticmethod
    def merge(*sequences: "EventSequence") -> "EventSequence":
        return EventSequence(ev for seq in sequences for ev in seq)
