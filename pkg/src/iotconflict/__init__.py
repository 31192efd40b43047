"""Conflict detection for IoT services shared by several smart-home residents."""

from .detector import (
    DetectionResult,
    EvaluationReport,
    GroundTruthLabel,
    detect,
    evaluate,
    label_by_comfort_rule,
    run_pipeline,
)
from .errors import *  # noqa: F401,F403
from .ingest import IngestReport, ingest_casas, pair_on_off, parse_casas_line, parse_enriched, write_enriched
from .model import (
    EventSequence,
    Registry,
    ServiceDescriptor,
    ServiceEvent,
    State,
    TimeInterval,
    canonicalize_location,
    validate_event,
)
from .rules import (
    ConflictRecord,
    ConflictType,
    PreferenceRange,
    QuantMode,
    RuleConfig,
    Strictness,
    conflict_weight,
    learn_ranges,
)
from .selection import (
    AllenRelation,
    OverlapPair,
    allen_relation,
    cluster_by_location,
    find_overlaps,
    interval_sets,
    rank_services,
    select_top_k,
)

__version__ = "0.1.0"
