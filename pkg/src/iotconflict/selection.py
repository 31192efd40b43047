"""Frequent-service selection and candidate overlap generation."""

from __future__ import annotations

import enum
from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np

from . import _kernels
from .model import EventSequence, ServiceEvent, TimeInterval, to_micros

DEFAULT_K = 7


class AllenRelation(str, enum.Enum):
    BEFORE = "before"
    MEETS = "meets"
    OVERLAPS = "overlaps"
    STARTS = "starts"
    DURING = "during"
    FINISHES = "finishes"
    EQUALS = "equals"
    AFTER = "after"
    MET_BY = "met-by"
    OVERLAPPED_BY = "overlapped-by"
    STARTED_BY = "started-by"
    CONTAINS = "contains"
    FINISHED_BY = "finished-by"

    @property
    def inverse(self) -> "AllenRelation":
        return _INVERSE[self]

    @property
    def overlap_positive(self) -> bool:
        return self not in (
            AllenRelation.BEFORE,
            AllenRelation.AFTER,
            AllenRelation.MEETS,
            AllenRelation.MET_BY,
        )


_INVERSE = {
    AllenRelation.BEFORE: AllenRelation.AFTER,
    AllenRelation.MEETS: AllenRelation.MET_BY,
    AllenRelation.OVERLAPS: AllenRelation.OVERLAPPED_BY,
    AllenRelation.STARTS: AllenRelation.STARTED_BY,
    AllenRelation.DURING: AllenRelation.CONTAINS,
    AllenRelation.FINISHES: AllenRelation.FINISHED_BY,
    AllenRelation.EQUALS: AllenRelation.EQUALS,
}
_INVERSE.update({v: k for k, v in list(_INVERSE.items())})


def allen_relation(a: TimeInterval, b: TimeInterval) -> AllenRelation:
    """Relation of ``a`` to ``b``.

    Meant for proper intervals (start < end). Degenerate intervals still get
    exactly one relation, but it may claim overlap where the half-open
    intersection is empty.
    """
    s1, e1, s2, e2 = a.start, a.end, b.start, b.end
    if s1 == s2 and e1 == e2:
        return AllenRelation.EQUALS
    if e1 < s2:
        return AllenRelation.BEFORE
    if e2 < s1:
        return AllenRelation.AFTER
    if e1 == s2:
        return AllenRelation.MEETS
    if e2 == s1:
        return AllenRelation.MET_BY
    if s1 == s2:
        return AllenRelation.STARTS if e1 < e2 else AllenRelation.STARTED_BY
    if e1 == e2:
        return AllenRelation.FINISHES if s1 > s2 else AllenRelation.FINISHED_BY
    if s1 > s2 and e1 < e2:
        return AllenRelation.DURING
    if s1 < s2 and e1 > e2:
        return AllenRelation.CONTAINS
    if s1 < s2:
        return AllenRelation.OVERLAPS
    return AllenRelation.OVERLAPPED_BY


@dataclass(frozen=True)
class UsageStats:
    service_id: str
    location: str
    use_count: int
    total_duration: float  # seconds


@dataclass(frozen=True)
class OverlapPair:
    first: ServiceEvent
    second: ServiceEvent
    relation: AllenRelation
    overlap: TimeInterval

    @property
    def location(self) -> str:
        return self.first.location

    @property
    def key(self) -> tuple:
        return pair_key(self.first.event_id, self.second.event_id)

    @property
    def same_service(self) -> bool:
        return self.first.service_id == self.second.service_id

    def swapped(self) -> "OverlapPair":
        return OverlapPair(self.second, self.first, self.relation.inverse, self.overlap)

    def sort_key(self):
        return (self.location, self.overlap.start, self.first.event_id, self.second.event_id)


def pair_key(a: str, b: str) -> tuple:
    return (a, b) if a <= b else (b, a)


def make_pair(a: ServiceEvent, b: ServiceEvent) -> Optional[OverlapPair]:
    """Build an OverlapPair if the two events meet every conflict precondition."""
    if a.location != b.location or a.user_id == b.user_id:
        return None
    overlap = a.interval.intersection(b.interval)
    if overlap is None:
        return None
    if b.sort_key() < a.sort_key():
        a, b = b, a
    return OverlapPair(a, b, allen_relation(a.interval, b.interval), overlap)


def cluster_by_location(seq: Iterable[ServiceEvent]) -> dict:
    clusters: dict[str, list] = {}
    for ev in seq:
        members = clusters.setdefault(ev.location, [])
        if ev.service_id not in members:
            members.append(ev.service_id)
    return clusters


def usage_stats(seq: Iterable[ServiceEvent]) -> dict:
    counts = defaultdict(int)
    seconds = defaultdict(float)
    per_loc = defaultdict(lambda: defaultdict(int))
    for ev in seq:
        counts[ev.service_id] += 1
        seconds[ev.service_id] += ev.interval.duration.total_seconds()
        per_loc[ev.service_id][ev.location] += 1
    stats = {}
    for sid, n in counts.items():
        # most-used location, alphabetical on ties
        loc = min(per_loc[sid].items(), key=lambda kv: (-kv[1], kv[0]))[0]
        stats[sid] = UsageStats(sid, loc, n, seconds[sid])
    return stats


def _competition_rank(values: dict) -> dict:
    """1 for the largest value; equal values share the best rank."""
    ordered = sorted(values.values(), reverse=True)
    first_pos = {}
    for pos, v in enumerate(ordered, start=1):
        first_pos.setdefault(v, pos)
    return {k: first_pos[v] for k, v in values.items()}


def rank_services(seq: Iterable[ServiceEvent]) -> list:
    """Services ordered by rank(use count) + rank(total duration), best first."""
    stats = usage_stats(seq)
    by_count = _competition_rank({sid: st.use_count for sid, st in stats.items()})
    by_time = _competition_rank({sid: st.total_duration for sid, st in stats.items()})
    order = sorted(stats, key=lambda sid: (by_count[sid] + by_time[sid], sid))
    return [(sid, stats[sid]) for sid in order]


def select_top_k(ranked: list, k: Optional[int] = DEFAULT_K) -> set:
    if k is None:
        k = DEFAULT_K
    if k < 1:
        raise ValueError("k must be >= 1")
    ids = [item[0] if isinstance(item, tuple) else item for item in ranked]
    return set(ids[: min(len(ids), k)])


def interval_sets(seq: Iterable[ServiceEvent], selected: Iterable[str]) -> dict:
    selected = set(selected)
    out = {sid: set() for sid in selected}
    for ev in seq:
        if ev.service_id in selected:
            out[ev.service_id].add(ev.interval)
    return out


def _finalize(pairs: list, min_overlap: float) -> list:
    if min_overlap > 0:
        pairs = [p for p in pairs if p.overlap.duration.total_seconds() > min_overlap]
    pairs.sort(key=OverlapPair.sort_key)
    return pairs


def find_overlaps(
    seq: EventSequence,
    selected: Optional[Iterable[str]] = None,
    min_overlap: float = 0.0,
) -> list:
    """All cross-user, same-location pairs of selected services that overlap.

    ``selected=None`` keeps every service. ``min_overlap`` (seconds) drops
    pairs whose shared stretch is not strictly longer than the threshold.
    """
    keep = None if selected is None else set(selected)
    by_loc = defaultdict(list)
    for ev in seq:
        if keep is None or ev.service_id in keep:
            by_loc[ev.location].append(ev)
    pairs = []
    for loc in sorted(by_loc):
        events = sorted(by_loc[loc], key=ServiceEvent.sort_key)
        if len(events) < 2:
            continue
        starts = np.fromiter((to_micros(ev.interval.start) for ev in events), dtype=np.int64, count=len(events))
        ends = np.fromiter((to_micros(ev.interval.end) for ev in events), dtype=np.int64, count=len(events))
        codes = {}
        users = np.fromiter(
            (codes.setdefault(ev.user_id, len(codes)) for ev in events), dtype=np.int64, count=len(events)
        )
        ii, jj = _kernels.overlap_pairs(starts, ends, users)
        for i, j in zip(ii.tolist(), jj.tolist()):
            a, b = events[i], events[j]
            overlap = a.interval.intersection(b.interval)
            pairs.append(OverlapPair(a, b, allen_relation(a.interval, b.interval), overlap))
    return _finalize(pairs, min_overlap)


def find_overlaps_bruteforce(
    seq: Iterable[ServiceEvent],
    selected: Optional[Iterable[str]] = None,
    min_overlap: float = 0.0,
) -> list:
    """Quadratic reference: test every event pair against the preconditions."""
    keep = None if selected is None else set(selected)
    events = [ev for ev in seq if keep is None or ev.service_id in keep]
    pairs = []
    for i in range(len(events)):
        for j in range(i + 1, len(events)):
            pair = make_pair(events[i], events[j])
            if pair is not None:
                pairs.append(pair)
    return _finalize(pairs, min_overlap)
