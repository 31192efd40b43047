"""Command-line front end: ``iotconflict {ingest,rank,detect,metrics,synth}``.

Exit status 0 on success, 1 on validation or usage errors, 2 on I/O errors.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from contextlib import contextmanager
from dataclasses import replace
from pathlib import Path
from typing import Optional, Sequence

from . import _kernels
from .detector import (
    evaluate,
    label_by_comfort_rule,
    read_detection,
    read_labels,
    run_pipeline,
    write_detection,
)
from .errors import ConflictEngineError, IoFailure, ValidationError
from .ingest import (
    load_registry,
    load_sensor_map,
    parse_enriched,
    read_casas_file,
    write_enriched,
)
from .model import EventSequence
from .rules import ConflictType, QuantMode, RuleConfig, Strictness, load_rule_config
from .selection import DEFAULT_K, make_pair, rank_services
from .synth import PRESETS, generate, load_spec, replay_to_enriched

REGISTRY_ENV = "IOTCONFLICT_REGISTRY"

log = logging.getLogger("iotconflict")


class UsageError(ValidationError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="iotconflict", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    ing = sub.add_parser("ingest", help="pair CASAS ON/OFF logs into an enriched corpus")
    ing.add_argument("inputs", nargs="+", type=Path, help="CASAS log files, one resident each")
    ing.add_argument("--sensor-map", required=True, type=Path)
    ing.add_argument("--registry", type=Path)
    ing.add_argument("--user", action="append", default=[],
                     help="resident id per input file, in order (default: file stem)")
    ing.add_argument("-o", "--output", required=True, type=Path)
    ing.add_argument("--report", type=Path, help="write the ingest report as JSON here")

    rank = sub.add_parser("rank", help="print per-service usage statistics")
    rank.add_argument("corpus", type=Path)
    rank.add_argument("--registry", type=Path)
    rank.add_argument("--k", type=int, default=DEFAULT_K)

    det = sub.add_parser("detect", help="detect conflicts in an enriched corpus")
    det.add_argument("corpus", type=Path)
    det.add_argument("--registry", type=Path)
    det.add_argument("--rules", type=Path, help="rule configuration JSON")
    det.add_argument("--k", type=int, default=DEFAULT_K)
    det.add_argument("--mode", choices=[m.value for m in QuantMode])
    det.add_argument("--strictness", choices=[s.value for s in Strictness])
    det.add_argument("--train-fraction", type=float, default=0.8)
    det.add_argument("--no-split", action="store_true",
                     help="learn ranges from and detect over the whole corpus")
    det.add_argument("--min-overlap", type=float, default=0.0, help="seconds; pairs must overlap longer")
    det.add_argument("--oracle", action="store_true", help="all services, quadratic pairing")
    det.add_argument("-o", "--output", type=Path)

    met = sub.add_parser("metrics", help="score a detection file against ground truth")
    met.add_argument("detections", type=Path)
    met.add_argument("--labels", type=Path, help="event_id_1,event_id_2,is_conflict[,type] file")
    met.add_argument("--corpus", type=Path, help="label candidate pairs by the comfort rule instead")
    met.add_argument("--threshold", type=float, default=3.0)
    met.add_argument("--attribute", default="temperature")
    met.add_argument("--scope", help="restrict to one conflict type, e.g. quantitative")
    met.add_argument("-o", "--output", type=Path)

    syn = sub.add_parser("synth", help="generate a labelled synthetic corpus")
    src = syn.add_mutually_exclusive_group()
    src.add_argument("--preset", choices=sorted(PRESETS), default="injection")
    src.add_argument("--scenario", type=Path, help="scenario spec JSON")
    syn.add_argument("--seed", type=int)
    syn.add_argument("--days", type=int)
    syn.add_argument("-o", "--output", required=True, type=Path)
    syn.add_argument("--labels", type=Path)
    syn.add_argument("--write-registry", type=Path, help="also write the scenario's service registry")
    return p


@contextmanager
def _open_out(path: Optional[Path]):
    if path is None:
        yield sys.stdout
        return
    try:
        fh = open(path, "w", encoding="utf-8", newline="")
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc
    with fh:
        yield fh


def _registry(args):
    path = args.registry or os.environ.get(REGISTRY_ENV)
    if not path:
        raise UsageError(f"no service registry: pass --registry or set {REGISTRY_ENV}")
    return load_registry(path)


def _optional_registry(args):
    path = getattr(args, "registry", None) or os.environ.get(REGISTRY_ENV)
    return load_registry(path) if path else None


def cmd_ingest(args) -> int:
    reg = _optional_registry(args)
    sensor_map = load_sensor_map(args.sensor_map)
    if args.user and len(args.user) != len(args.inputs):
        raise UsageError("give one --user per input file or none at all")
    users = args.user or [p.stem for p in args.inputs]
    seqs, report = [], None
    for path, user in zip(args.inputs, users):
        seq, rep = read_casas_file(path, sensor_map, user, reg)
        seqs.append(seq)
        report = rep if report is None else report.merge(rep)
    merged = EventSequence.merge(*seqs)
    fmt = "jsonl" if args.output.suffix in (".jsonl", ".json") else "csv"
    with _open_out(args.output) as fh:
        write_enriched(merged, fh, fmt)
    summary = report.to_dict()
    if args.report:
        with _open_out(args.report) as fh:
            json.dump(summary, fh, indent=2)
            fh.write("\n")
    print(
        f"{summary['events_emitted']} events, {summary['unmatched_on']} unmatched ON, "
        f"{summary['unmatched_off']} unmatched OFF, {len(summary['discarded'])} discarded",
        file=sys.stderr,
    )
    return 0


def cmd_rank(args) -> int:
    if args.k < 1:
        raise UsageError("k must be ≥ 1")
    seq = parse_enriched(args.corpus, _optional_registry(args))
    ranked = rank_services(seq)
    print(f"{'rank':>4}  {'service':<16} {'location':<16} {'uses':>6} {'hours':>9}  selected")
    for pos, (sid, st) in enumerate(ranked, start=1):
        mark = "*" if pos <= args.k else ""
        print(f"{pos:>4}  {sid:<16} {st.location:<16} {st.use_count:>6} {st.total_duration / 3600:>9.2f}  {mark}")
    return 0


def cmd_detect(args) -> int:
    if args.k < 1:
        raise UsageError("k must be ≥ 1")
    if not args.no_split and not 0 < args.train_fraction < 1:
        raise UsageError("train fraction must lie strictly between 0 and 1")
    if args.min_overlap < 0:
        raise UsageError("min overlap must be ≥ 0")
    reg = _registry(args)
    config = load_rule_config(args.rules) if args.rules else RuleConfig()
    config = config.replace(mode=args.mode, strictness=args.strictness)
    seq = parse_enriched(args.corpus, reg)
    result, _, pairs = run_pipeline(
        seq,
        reg,
        config,
        k=args.k,
        train_fraction=None if args.no_split else args.train_fraction,
        oracle=args.oracle,
        min_overlap=args.min_overlap,
    )
    with _open_out(args.output) as fh:
        write_detection(result, fh)
    counts = ", ".join(f"{t.value}={n}" for t, n in result.counts_by_type.items() if n)
    print(f"{len(pairs)} candidate pairs, {result.total} conflicts ({counts or 'none'}) "
          f"[{_kernels.backend()}]", file=sys.stderr)
    return 0


def cmd_metrics(args) -> int:
    stored = read_detection(args.detections)
    scope = ConflictType.parse(args.scope) if args.scope else None
    if args.labels:
        try:
            with open(args.labels, encoding="utf-8", newline="") as fh:
                labels = read_labels(fh)
        except OSError as exc:
            raise IoFailure(f"cannot read {args.labels}: {exc}") from exc
    elif args.corpus:
        events = parse_enriched(args.corpus).by_id()
        pairs = []
        for a, b in sorted(stored.pair_keys):
            if a not in events or b not in events:
                raise ValidationError(f"candidate pair {a}/{b} is not in {args.corpus}")
            pair = make_pair(events[a], events[b])
            if (
                pair is not None
                and pair.same_service
                and args.attribute in pair.first.quantitative_values
                and args.attribute in pair.second.quantitative_values
            ):
                pairs.append(pair)
        labels = label_by_comfort_rule(pairs, args.threshold, args.attribute)
    else:
        raise UsageError("metrics needs --labels or --corpus")
    report = evaluate(stored, labels, scope)
    out = dict(report.to_dict(), scope=scope.value if scope else None, labelled_pairs=report.total)
    with _open_out(args.output) as fh:
        json.dump(out, fh, indent=2)
        fh.write("\n")
    return 0


def cmd_synth(args) -> int:
    if args.scenario:
        spec = load_spec(args.scenario)
    else:
        spec = PRESETS[args.preset]()
    changes = {}
    if args.seed is not None:
        changes["seed"] = args.seed
    if args.days is not None:
        if args.days < 1:
            raise UsageError("days must be ≥ 1")
        changes["days"] = args.days
    if changes:
        spec = replace(spec, **changes)
    seq, labels = generate(spec)
    n = replay_to_enriched(seq, labels, args.output, args.labels)
    if args.write_registry:
        from .ingest import registry_to_dict

        with _open_out(args.write_registry) as fh:
            json.dump(registry_to_dict(spec.services), fh, indent=2)
            fh.write("\n")
    positives = sum(lab.is_conflict for lab in labels)
    print(f"{n} events, {len(labels)} labelled pairs ({positives} conflicts)", file=sys.stderr)
    return 0


COMMANDS = {
    "ingest": cmd_ingest,
    "rank": cmd_rank,
    "detect": cmd_detect,
    "metrics": cmd_metrics,
    "synth": cmd_synth,
}


def run(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s")
        return COMMANDS[args.command](args)
    except (IoFailure, OSError) as exc:
        print(f"iotconflict: I/O error: {exc}", file=sys.stderr)
        return 2
    except (ConflictEngineError, ValueError) as exc:
        print(f"iotconflict: error: {exc}", file=sys.stderr)
        return 1


def main() -> None:  # pragma: no cover
    sys.exit(run())


if __name__ == "__main__":  # pragma: no cover
    main()
