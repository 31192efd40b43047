"""Run the rule set over candidate pairs and score the result against labels."""

from __future__ import annotations

import csv
import json
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Optional, TextIO, Union

from .errors import ConfigError, IoFailure, MalformedLine, MissingAttribute, UnknownPair
from .model import EventSequence, ServiceDescriptor
from .rules import (
    ConflictRecord,
    ConflictType,
    RuleConfig,
    chronological_split,
    evaluate_pair,
    learn_ranges,
)
from .selection import (
    DEFAULT_K,
    OverlapPair,
    find_overlaps,
    find_overlaps_bruteforce,
    pair_key,
    rank_services,
    select_top_k,
)


@dataclass
class DetectionResult:
    conflicts: list = field(default_factory=list)
    counts_by_type: dict = field(default_factory=lambda: {t: 0 for t in ConflictType})
    conflicting_services: dict = field(default_factory=lambda: {t: set() for t in ConflictType})
    # candidate universe, needed to score negatives
    pair_keys: frozenset = frozenset()
    event_ids: frozenset = frozenset()

    @property
    def total(self) -> int:
        return len(self.conflicts)

    def flagged(self, scope: Optional[ConflictType] = None) -> set:
        return {c.pair.key for c in self.conflicts if scope is None or c.type is scope}


def detect(
    pairs: Iterable[OverlapPair],
    config: RuleConfig,
    ranges: Optional[Mapping] = None,
    reg: Optional[Mapping[str, ServiceDescriptor]] = None,
    event_ids: Optional[Iterable[str]] = None,
) -> DetectionResult:
    """Apply every enabled rule to every pair; one record per matching rule."""
    if not config.enabled:
        raise ConfigError("no rules enabled")
    reg = reg if reg is not None else {}
    pairs = list(pairs)
    conflicts = []
    for pair in pairs:
        conflicts.extend(evaluate_pair(pair, config, reg, ranges))
    conflicts.sort(key=ConflictRecord.sort_key)

    counts = {t: 0 for t in ConflictType}
    services = {t: set() for t in ConflictType}
    for rec in conflicts:
        counts[rec.type] += 1
        services[rec.type].add(pair_key(rec.pair.first.service_id, rec.pair.second.service_id))
    ids = set(event_ids) if event_ids is not None else set()
    for p in pairs:
        ids.update((p.first.event_id, p.second.event_id))
    return DetectionResult(conflicts, counts, services, frozenset(p.key for p in pairs), frozenset(ids))


def candidate_pairs(
    seq: EventSequence,
    k: Optional[int] = DEFAULT_K,
    oracle: bool = False,
    min_overlap: float = 0.0,
) -> list:
    """Top-k sweep (default) or every service with quadratic pairing (oracle)."""
    if oracle:
        return find_overlaps_bruteforce(seq, None, min_overlap)
    if k is not None and k < 1:
        raise ConfigError("k must be ≥ 1")
    selected = select_top_k(rank_services(seq), k)
    return find_overlaps(seq, selected, min_overlap)


def run_pipeline(
    seq: EventSequence,
    reg: Mapping[str, ServiceDescriptor],
    config: RuleConfig,
    k: Optional[int] = DEFAULT_K,
    train_fraction: Optional[float] = 0.8,
    oracle: bool = False,
    min_overlap: float = 0.0,
) -> tuple:
    """Split, learn ranges, select, pair and detect. Returns (result, ranges, pairs).

    ``train_fraction=None`` skips the split: ranges are learned from, and
    detection runs over, the whole sequence.
    """
    seq.validate(reg)
    if train_fraction is None:
        train, test = seq, seq
    else:
        train, test = chronological_split(seq, train_fraction)
    ranges = learn_ranges(train)
    pairs = candidate_pairs(test, k, oracle, min_overlap)
    result = detect(pairs, config, ranges, reg, event_ids=(ev.event_id for ev in test))
    return result, ranges, pairs


# ------------------------------------------------------------------ evaluation


@dataclass(frozen=True)
class GroundTruthLabel:
    event_a: str
    event_b: str
    is_conflict: bool
    type: Optional[ConflictType] = None

    @property
    def key(self) -> tuple:
        return pair_key(self.event_a, self.event_b)


@dataclass(frozen=True)
class EvaluationReport:
    true_positives: int
    false_positives: int
    true_negatives: int
    false_negatives: int

    @property
    def total(self) -> int:
        return self.true_positives + self.false_positives + self.true_negatives + self.false_negatives

    @property
    def precision(self) -> float:
        d = self.true_positives + self.false_positives
        return self.true_positives / d if d else 0.0

    @property
    def recall(self) -> float:
        d = self.true_positives + self.false_negatives
        return self.true_positives / d if d else 0.0

    @property
    def f1(self) -> float:
        p, r = self.precision, self.recall
        return 2 * p * r / (p + r) if p + r else 0.0

    @property
    def accuracy(self) -> float:
        return (self.true_positives + self.true_negatives) / self.total if self.total else 0.0

    def to_dict(self) -> dict:
        return {
            "true_positives": self.true_positives,
            "false_positives": self.false_positives,
            "true_negatives": self.true_negatives,
            "false_negatives": self.false_negatives,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "accuracy": self.accuracy,
        }


def evaluate(
    result: DetectionResult,
    labels: Iterable[GroundTruthLabel],
    scope: Optional[ConflictType] = None,
) -> EvaluationReport:
    """Confusion matrix over labelled pairs.

    With ``scope`` only conflicts of that type count as predictions, and a
    label is positive only if it is a conflict of that type (untyped positive
    labels count for every scope).
    """
    flagged = result.flagged(scope)
    tp = fp = tn = fn = 0
    for lab in labels:
        missing = [e for e in (lab.event_a, lab.event_b) if e not in result.event_ids]
        if missing:
            raise UnknownPair(f"label references events absent from the detection run: {missing}")
        actual = lab.is_conflict and (scope is None or lab.type is None or lab.type is scope)
        predicted = lab.key in flagged
        if predicted and actual:
            tp += 1
        elif predicted:
            fp += 1
        elif actual:
            fn += 1
        else:
            tn += 1
    return EvaluationReport(tp, fp, tn, fn)


def label_by_comfort_rule(
    pairs: Iterable[OverlapPair],
    threshold: float = 3.0,
    attribute: str = "temperature",
) -> list:
    """Ground truth: residents are uncomfortable when settings differ by more than ``threshold``."""
    out = []
    for p in pairs:
        try:
            va = p.first.quantitative_values[attribute]
            vb = p.second.quantitative_values[attribute]
        except KeyError:
            raise MissingAttribute(
                f"pair {p.first.event_id}/{p.second.event_id} lacks attribute {attribute!r}"
            ) from None
        hit = abs(va - vb) > threshold
        out.append(GroundTruthLabel(p.first.event_id, p.second.event_id, hit, ConflictType.QUANTITATIVE if hit else None))
    return out


# --------------------------------------------------------------- serialisation


def conflict_to_dict(rec: ConflictRecord) -> dict:
    p = rec.pair
    return {
        "record": "conflict",
        "type": rec.type.value,
        "service_ids": [p.first.service_id, p.second.service_id],
        "event_ids": [p.first.event_id, p.second.event_id],
        "user_ids": [p.first.user_id, p.second.user_id],
        "location": p.location,
        "relation": p.relation.value,
        "overlap_start": p.overlap.start.isoformat(),
        "overlap_end": p.overlap.end.isoformat(),
        "weight": rec.weight,
        "attribute": rec.attribute,
        "detail": rec.detail,
    }


def summary_to_dict(result: DetectionResult) -> dict:
    return {
        "record": "summary",
        "total": result.total,
        "counts_by_type": {t.value: result.counts_by_type[t] for t in ConflictType},
        "conflicting_services": {
            t.value: sorted(list(s) for s in result.conflicting_services[t]) for t in ConflictType
        },
        "candidate_pairs": sorted(list(k) for k in result.pair_keys),
        "event_ids": sorted(result.event_ids),
    }


def write_detection(result: DetectionResult, stream: TextIO) -> None:
    for rec in result.conflicts:
        stream.write(json.dumps(conflict_to_dict(rec), sort_keys=True, ensure_ascii=False) + "\n")
    stream.write(json.dumps(summary_to_dict(result), sort_keys=True, ensure_ascii=False) + "\n")


@dataclass
class StoredDetection:
    """A detection file read back: conflicts as plain dicts plus the summary."""

    conflicts: list
    summary: dict

    @property
    def event_ids(self) -> frozenset:
        return frozenset(self.summary.get("event_ids", ()))

    @property
    def pair_keys(self) -> frozenset:
        return frozenset(tuple(k) for k in self.summary.get("candidate_pairs", ()))

    def flagged(self, scope: Optional[ConflictType] = None) -> set:
        return {
            pair_key(*c["event_ids"])
            for c in self.conflicts
            if scope is None or ConflictType(c["type"]) is scope
        }


def read_detection(path: Union[str, Path]) -> StoredDetection:
    conflicts, summary = [], None
    try:
        with open(path, encoding="utf-8") as fh:
            for line_no, line in enumerate(fh, start=1):
                if not line.strip():
                    continue
                try:
                    obj = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise MalformedLine(f"{path}:{line_no}: {exc}") from exc
                if obj.get("record") == "summary":
                    summary = obj
                else:
                    conflicts.append(obj)
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc
    if summary is None:
        raise MalformedLine(f"{path}: no summary record")
    return StoredDetection(conflicts, summary)


def write_labels(labels: Iterable[GroundTruthLabel], stream: TextIO) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    for lab in labels:
        row = [lab.event_a, lab.event_b, "true" if lab.is_conflict else "false"]
        if lab.type is not None:
            row.append(lab.type.value)
        writer.writerow(row)


_TRUE = {"true", "1", "yes", "y", "t"}
_FALSE = {"false", "0", "no", "n", "f"}


def read_labels(stream: TextIO) -> list:
    out = []
    for line_no, row in enumerate(csv.reader(stream), start=1):
        if not row or not "".join(row).strip():
            continue
        if line_no == 1 and row[0].strip().lower() in ("event_id_1", "event_a"):
            continue
        if len(row) not in (3, 4):
            raise MalformedLine(f"labels line {line_no}: expected 3 or 4 fields")
        flag = row[2].strip().lower()
        if flag not in _TRUE | _FALSE:
            raise MalformedLine(f"labels line {line_no}: bad is_conflict {row[2]!r}")
        kind = ConflictType.parse(row[3]) if len(row) == 4 and row[3].strip() else None
        out.append(GroundTruthLabel(row[0].strip(), row[1].strip(), flag in _TRUE, kind))
    return out


def type_histogram(labels: Iterable[GroundTruthLabel]) -> Counter:
    return Counter(lab.type for lab in labels if lab.is_conflict)


def group_by_type(records: Iterable[ConflictRecord]) -> dict:
    grouped = defaultdict(list)
    for rec in records:
        grouped[rec.type].append(rec)
    return dict(grouped)
