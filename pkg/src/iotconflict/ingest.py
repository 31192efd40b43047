"""Log ingestion: CASAS sensor traces, the enriched event format, registry files."""

from __future__ import annotations

import bisect
import csv
import io
import json
import logging
import math
from collections import defaultdict
from dataclasses import dataclass, field
from datetime import date, datetime, time, timezone
from pathlib import Path
from typing import Iterable, Mapping, Optional, TextIO, Union

from .errors import (
    InvertedInterval,
    IoFailure,
    MalformedLine,
    UnknownAttribute,
    UnmappedSensor,
    ValidationError,
)
from .model import (
    EventSequence,
    QuantitativeAttr,
    Registry,
    ServiceDescriptor,
    ServiceEvent,
    State,
    TimeInterval,
    canonicalize_location,
    validate_event,
)

log = logging.getLogger(__name__)

PathLike = Union[str, Path]

# door contacts report OPEN/CLOSE rather than ON/OFF
_START_STATUSES = {"ON", "OPEN"}
_STOP_STATUSES = {"OFF", "CLOSE", "CLOSED"}

BASE_COLUMNS = ("event_id", "service_id", "location", "user_id", "start", "end", "state", "capacity_demand")
QUANT_PREFIX = "q:"
NOMINAL_PREFIX = "n:"


# --------------------------------------------------------------------------- CASAS


@dataclass(frozen=True)
class RawSensorRecord:
    date: date
    time: time
    sensor: str
    status: str
    line_no: int = 0

    @property
    def timestamp(self) -> datetime:
        return datetime.combine(self.date, self.time)

    @property
    def numeric(self) -> Optional[float]:
        try:
            value = float(self.status)
        except ValueError:
            return None
        return value if math.isfinite(value) else None


@dataclass
class IngestReport:
    """Bookkeeping for one pairing run.

    Every input line lands in exactly one bucket, so
    ``lines == on_records + off_matched + readings_folded + len(discarded)``,
    and every ON record yields one event: ``events_emitted == on_records``.
    """

    events_emitted: int = 0
    unmatched_on: int = 0
    unmatched_off: int = 0
    on_records: int = 0
    off_matched: int = 0
    readings_folded: int = 0
    discarded: list = field(default_factory=list)

    @property
    def accounted(self) -> int:
        return self.on_records + self.off_matched + self.readings_folded + len(self.discarded)

    def merge(self, other: "IngestReport") -> "IngestReport":
        return IngestReport(
            events_emitted=self.events_emitted + other.events_emitted,
            unmatched_on=self.unmatched_on + other.unmatched_on,
            unmatched_off=self.unmatched_off + other.unmatched_off,
            on_records=self.on_records + other.on_records,
            off_matched=self.off_matched + other.off_matched,
            readings_folded=self.readings_folded + other.readings_folded,
            discarded=self.discarded + other.discarded,
        )

    def to_dict(self) -> dict:
        return {
            "events_emitted": self.events_emitted,
            "unmatched_on": self.unmatched_on,
            "unmatched_off": self.unmatched_off,
            "on_records": self.on_records,
            "off_matched": self.off_matched,
            "readings_folded": self.readings_folded,
            "discarded": [list(item) for item in self.discarded],
        }


def _parse_time(raw: str) -> time:
    whole, _, frac = raw.partition(".")
    try:
        hh, mm, ss = (int(part) for part in whole.split(":"))
        if frac and not frac.isdigit():
            raise ValueError(frac)
        # truncate, never round, to microseconds
        micro = int((frac + "000000")[:6]) if frac else 0
        return time(hh, mm, ss, micro)
    except ValueError as exc:
        raise MalformedLine(f"bad time {raw!r}") from exc


def parse_casas_line(line: str, line_no: int = 0) -> RawSensorRecord:
    """Split a ``DATE TIME SENSOR STATUS`` line.

    Trailing columns (activity annotations in the labelled CASAS releases) are
    ignored.
    """
    parts = line.split()
    if len(parts) < 4:
        raise MalformedLine(f"line {line_no}: expected DATE TIME SENSOR STATUS, got {line.strip()!r}")
    try:
        day = date.fromisoformat(parts[0])
    except ValueError as exc:
        raise MalformedLine(f"line {line_no}: bad date {parts[0]!r}") from exc
    return RawSensorRecord(day, _parse_time(parts[1]), parts[2], parts[3], line_no)


@dataclass(frozen=True)
class SensorBinding:
    service_id: str
    location: str


def pair_on_off(
    records: Iterable[RawSensorRecord],
    sensor_map: Mapping[str, Optional[SensorBinding]],
    user_id: str,
    registry: Optional[Mapping[str, ServiceDescriptor]] = None,
    report: Optional[IngestReport] = None,
) -> tuple[EventSequence, IngestReport]:
    """Turn ON/OFF records into On-state events for one resident.

    Sensors mapped to ``None`` are deliberately ignored (battery monitors and
    the like). Numeric readings are folded into the enclosing interval of the
    same service at the same location when the service declares a
    quantitative attribute; all other readings are discarded.
    """
    report = report if report is not None else IngestReport()
    records = list(records)
    pending: dict[str, RawSensorRecord] = {}
    closed: list[tuple[RawSensorRecord, datetime]] = []
    readings: list[RawSensorRecord] = []
    last_ts: Optional[datetime] = None

    for rec in records:
        ts = rec.timestamp
        if last_ts is not None and ts < last_ts:
            raise ValidationError(f"line {rec.line_no}: records are not sorted by timestamp")
        last_ts = ts
        if rec.sensor not in sensor_map:
            raise UnmappedSensor(f"line {rec.line_no}: sensor {rec.sensor!r} has no service mapping")
        if sensor_map[rec.sensor] is None:
            report.discarded.append((rec.line_no, f"ignored sensor {rec.sensor}"))
            continue
        status = rec.status.upper()
        if status in _START_STATUSES:
            report.on_records += 1
            prev = pending.pop(rec.sensor, None)
            if prev is not None:
                closed.append((prev, ts))
            pending[rec.sensor] = rec
        elif status in _STOP_STATUSES:
            prev = pending.pop(rec.sensor, None)
            if prev is None:
                report.unmatched_off += 1
                report.discarded.append((rec.line_no, f"OFF without pending ON for {rec.sensor}"))
            else:
                report.off_matched += 1
                closed.append((prev, ts))
        elif rec.numeric is not None:
            readings.append(rec)
        else:
            report.discarded.append((rec.line_no, f"unrecognised status {rec.status!r}"))

    for sensor in sorted(pending, key=lambda s: (pending[s].timestamp, s)):
        report.unmatched_on += 1
        closed.append((pending[sensor], last_ts))

    closed.sort(key=lambda item: (item[0].timestamp, item[0].line_no, item[0].sensor))
    drafts = []
    for ordinal, (rec, end) in enumerate(closed):
        binding = sensor_map[rec.sensor]
        drafts.append(
            {
                "event_id": f"{user_id}-{ordinal:06d}",
                "service_id": binding.service_id,
                "location": canonicalize_location(binding.location),
                "start": rec.timestamp,
                "end": end,
                "samples": defaultdict(list),
            }
        )

    _fold_readings(readings, drafts, sensor_map, registry, report)

    events = []
    for d in drafts:
        events.append(
            ServiceEvent(
                event_id=d["event_id"],
                service_id=d["service_id"],
                state=State.ON,
                interval=TimeInterval(d["start"], d["end"]),
                location=d["location"],
                user_id=user_id,
                quantitative_values={k: sum(v) / len(v) for k, v in d["samples"].items()},
            )
        )
    report.events_emitted += len(events)
    seq = EventSequence(events)
    if registry is not None:
        seq.validate(registry)
    return seq, report


def _fold_readings(readings, drafts, sensor_map, registry, report):
    by_key = defaultdict(list)
    for d in drafts:
        by_key[(d["service_id"], d["location"])].append(d)
    starts = {key: [d["start"] for d in ds] for key, ds in by_key.items()}
    for rec in readings:
        binding = sensor_map[rec.sensor]
        key = (binding.service_id, canonicalize_location(binding.location))
        attr = None
        if registry is not None and binding.service_id in registry:
            quant = list(registry[binding.service_id].quantitative_attrs)
            attr = quant[0] if quant else None
        if attr is None:
            report.discarded.append((rec.line_no, f"reading for {rec.sensor} has no quantitative attribute"))
            continue
        ts = rec.timestamp
        candidates = by_key.get(key, [])
        idx = bisect.bisect_right(starts.get(key, []), ts) - 1
        # latest-starting container wins when several sensors share a service
        while idx >= 0 and not (ts < candidates[idx]["end"]):
            idx -= 1
        if idx >= 0:
            candidates[idx]["samples"][attr].append(rec.numeric)
            report.readings_folded += 1
        else:
            report.discarded.append((rec.line_no, f"reading for {rec.sensor} outside any ON interval"))


def ingest_casas(
    lines: Iterable[str],
    sensor_map: Mapping[str, Optional[SensorBinding]],
    user_id: str,
    registry: Optional[Mapping[str, ServiceDescriptor]] = None,
) -> tuple[EventSequence, IngestReport]:
    """Parse and pair a whole CASAS log; malformed lines are reported, not fatal."""
    report = IngestReport()
    records = []
    for line_no, line in enumerate(lines, start=1):
        if not line.strip():
            report.discarded.append((line_no, "blank line"))
            continue
        try:
            records.append(parse_casas_line(line, line_no))
        except MalformedLine as exc:
            report.discarded.append((line_no, str(exc)))
    records.sort(key=lambda r: (r.timestamp, r.line_no))
    return pair_on_off(records, sensor_map, user_id, registry, report)


def read_casas_file(path: PathLike, sensor_map, user_id: str, registry=None):
    try:
        with open(path, encoding="utf-8") as fh:
            return ingest_casas(fh, sensor_map, user_id, registry)
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc


# ------------------------------------------------------------------ enriched format


def _parse_ts(raw: str, where: str) -> datetime:
    try:
        ts = datetime.fromisoformat(raw.strip())
    except ValueError as exc:
        raise MalformedLine(f"{where}: bad timestamp {raw!r}") from exc
    if ts.tzinfo is not None:
        ts = ts.astimezone(timezone.utc).replace(tzinfo=None)
    return ts


def _build_event(row: Mapping, quant: Mapping, nominal: Mapping, where: str, registry) -> ServiceEvent:
    try:
        start = _parse_ts(str(row["start"]), where)
        end = _parse_ts(str(row["end"]), where)
        if start > end:
            raise InvertedInterval(f"{where}: end {end} precedes start {start}")
        demand = row.get("capacity_demand")
        ev = ServiceEvent(
            event_id=str(row["event_id"]),
            service_id=str(row["service_id"]),
            state=State.parse(str(row["state"])),
            interval=TimeInterval(start, end),
            location=str(row["location"]),
            user_id=str(row["user_id"]),
            qualitative_values=dict(nominal),
            quantitative_values={k: float(v) for k, v in quant.items()},
            capacity_demand=int(demand) if demand not in (None, "") else 1,
        )
    except KeyError as exc:
        raise MalformedLine(f"{where}: missing column {exc.args[0]!r}") from exc
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ValidationError):
            raise
        raise MalformedLine(f"{where}: {exc}") from exc
    if registry is not None:
        validate_event(ev, registry)
    return ev


def parse_enriched_csv(stream: TextIO, registry: Optional[Mapping[str, ServiceDescriptor]] = None) -> EventSequence:
    reader = csv.reader(stream)
    try:
        header = next(reader)
    except StopIteration:
        return EventSequence()
    header = [h.strip() for h in header]
    for col in header:
        if col not in BASE_COLUMNS and not col.startswith((QUANT_PREFIX, NOMINAL_PREFIX)):
            raise UnknownAttribute(f"column {col!r} is neither a base column nor prefixed q:/n:")
    events = []
    for row_no, row in enumerate(reader, start=2):
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) != len(header):
            raise MalformedLine(f"line {row_no}: {len(row)} fields, header has {len(header)}")
        record = dict(zip(header, row))
        record.setdefault("event_id", f"row{row_no - 1:06d}")
        quant = {c[len(QUANT_PREFIX):]: v for c, v in record.items() if c.startswith(QUANT_PREFIX) and v != ""}
        nominal = {c[len(NOMINAL_PREFIX):]: v for c, v in record.items() if c.startswith(NOMINAL_PREFIX) and v != ""}
        events.append(_build_event(record, quant, nominal, f"line {row_no}", registry))
    return EventSequence(events)


def parse_enriched_jsonl(stream: TextIO, registry: Optional[Mapping[str, ServiceDescriptor]] = None) -> EventSequence:
    events = []
    for line_no, line in enumerate(stream, start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise MalformedLine(f"line {line_no}: {exc}") from exc
        if not isinstance(obj, dict):
            raise MalformedLine(f"line {line_no}: expected a JSON object")
        obj.setdefault("event_id", f"row{line_no:06d}")
        quant = dict(obj.get("quantitative") or {})
        nominal = dict(obj.get("qualitative") or {})
        for key, value in obj.items():
            if key.startswith(QUANT_PREFIX):
                quant[key[len(QUANT_PREFIX):]] = value
            elif key.startswith(NOMINAL_PREFIX):
                nominal[key[len(NOMINAL_PREFIX):]] = value
        events.append(_build_event(obj, quant, nominal, f"line {line_no}", registry))
    return EventSequence(events)


def parse_enriched(
    source: Union[PathLike, TextIO, Iterable[Mapping]],
    registry: Optional[Mapping[str, ServiceDescriptor]] = None,
    fmt: Optional[str] = None,
) -> EventSequence:
    """Parse enriched events from a path, an open text stream or a list of dicts.

    The format is inferred from the file suffix (``.jsonl``/``.json`` versus
    anything else as CSV) unless ``fmt`` is given.
    """
    if isinstance(source, (str, Path)):
        path = Path(source)
        fmt = fmt or ("jsonl" if path.suffix in (".jsonl", ".json") else "csv")
        try:
            with open(path, encoding="utf-8", newline="") as fh:
                return parse_enriched(fh, registry, fmt)
        except OSError as exc:
            raise IoFailure(f"cannot read {path}: {exc}") from exc
    if hasattr(source, "read"):
        if fmt == "jsonl":
            return parse_enriched_jsonl(source, registry)
        return parse_enriched_csv(source, registry)
    lines = [json.dumps(dict(rec), default=str) for rec in source]
    return parse_enriched_jsonl(io.StringIO("\n".join(lines)), registry)


def _fmt_number(value: float) -> str:
    return repr(float(value))


def event_to_record(ev: ServiceEvent) -> dict:
    return {
        "event_id": ev.event_id,
        "service_id": ev.service_id,
        "location": ev.location,
        "user_id": ev.user_id,
        "start": ev.interval.start.isoformat(),
        "end": ev.interval.end.isoformat(),
        "state": ev.state.value,
        "capacity_demand": ev.capacity_demand,
        "quantitative": dict(ev.quantitative_values),
        "qualitative": dict(ev.qualitative_values),
    }


def write_enriched(seq: Iterable[ServiceEvent], stream: TextIO, fmt: str = "csv") -> int:
    """Serialise events; returns the number of data lines written."""
    events = list(seq)
    if fmt == "jsonl":
        for ev in events:
            stream.write(json.dumps(event_to_record(ev), sort_keys=True) + "\n")
        return len(events)
    quant_cols = sorted({k for ev in events for k in ev.quantitative_values})
    nominal_cols = sorted({k for ev in events for k in ev.qualitative_values})
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(
        list(BASE_COLUMNS) + [QUANT_PREFIX + c for c in quant_cols] + [NOMINAL_PREFIX + c for c in nominal_cols]
    )
    for ev in events:
        rec = event_to_record(ev)
        row = [rec[c] for c in BASE_COLUMNS]
        row += [_fmt_number(ev.quantitative_values[c]) if c in ev.quantitative_values else "" for c in quant_cols]
        row += [ev.qualitative_values.get(c, "") for c in nominal_cols]
        writer.writerow(row)
    return len(events)


def write_enriched_file(seq: Iterable[ServiceEvent], path: PathLike, fmt: Optional[str] = None) -> int:
    path = Path(path)
    fmt = fmt or ("jsonl" if path.suffix in (".jsonl", ".json") else "csv")
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            return write_enriched(seq, fh, fmt)
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc


# ------------------------------------------------------------ registry / sensor map


def _parse_capacity(raw) -> Optional[int]:
    if raw is None:
        return None
    if isinstance(raw, str):
        if raw.strip().lower() in ("inf", "infinity", "unbounded", "∞"):
            return None
        raw = int(raw)
    if isinstance(raw, float) and math.isinf(raw):
        return None
    if isinstance(raw, bool) or int(raw) != raw:
        raise ValidationError(f"capacity must be an integer or 'unbounded', got {raw!r}")
    return int(raw)


def descriptor_from_dict(obj: Mapping) -> ServiceDescriptor:
    quantitative = {}
    for name, spec in (obj.get("quantitative") or {}).items():
        if isinstance(spec, str):
            spec = {"unit": spec}
        spec = spec or {}
        quantitative[name] = QuantitativeAttr(spec.get("unit", ""), spec.get("min"), spec.get("max"))
    qualitative = {name: tuple(values or ()) for name, values in (obj.get("qualitative") or {}).items()}
    try:
        return ServiceDescriptor(
            service_id=str(obj["service_id"]),
            name=str(obj.get("name", obj["service_id"])),
            functions=frozenset(obj.get("functions") or ()),
            capacity=_parse_capacity(obj.get("capacity")),
            qualitative_attrs=qualitative,
            quantitative_attrs=quantitative,
            depends_on=frozenset(obj.get("depends_on") or ()),
            env_effects=dict(obj.get("env_effects") or {}),
        )
    except KeyError as exc:
        raise ValidationError(f"service entry missing {exc.args[0]!r}") from exc


def descriptor_to_dict(desc: ServiceDescriptor) -> dict:
    return {
        "service_id": desc.service_id,
        "name": desc.name,
        "functions": sorted(desc.functions),
        "capacity": desc.capacity if desc.bounded else "unbounded",
        "qualitative": {k: list(v) for k, v in desc.qualitative_attrs.items()},
        "quantitative": {
            k: {"unit": a.unit, "min": a.minimum, "max": a.maximum} for k, a in desc.quantitative_attrs.items()
        },
        "depends_on": sorted(desc.depends_on),
        "env_effects": {k: v.value for k, v in desc.env_effects.items()},
    }


def registry_from_dict(obj) -> Registry:
    services = obj["services"] if isinstance(obj, Mapping) else obj
    reg = Registry(descriptor_from_dict(s) for s in services)
    for desc in reg.values():
        missing = desc.depends_on - set(reg)
        if missing:
            raise ValidationError(f"{desc.service_id} depends on unknown services {sorted(missing)}")
    return reg


def registry_to_dict(reg: Registry) -> dict:
    return {"services": [descriptor_to_dict(d) for d in reg.values()]}


def _load_json(path: PathLike):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: invalid JSON: {exc}") from exc


def load_registry(path: PathLike) -> Registry:
    return registry_from_dict(_load_json(path))


def load_sensor_map(path: PathLike) -> dict:
    """Read ``{"sensor": {"service_id": ..., "location": ...} | null}``."""
    raw = _load_json(path)
    raw = raw.get("sensors", raw)
    out = {}
    for sensor, entry in raw.items():
        if entry is None:
            out[sensor] = None
        else:
            out[sensor] = SensorBinding(str(entry["service_id"]), canonicalize_location(entry["location"]))
    return out
