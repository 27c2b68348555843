"""Command-line surface for the four-step integration workflow.

Human-readable messages go to stderr; machine output (graphs, plans,
diffs) goes to stdout or --out. Exit codes: 0 success, 1 diagnostics,
2 parse or I/O failure.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass, field
from pathlib import Path

from . import ops
from .autoflow import (
    FlowConfig,
    PlanExecutor,
    create_etl,
    parse_plan,
    serialize_plan,
)
from .errors import RdfEtlError, RdfSyntaxError, StoreError
from .iri import SystemClock, clock_from_string
from .mapping import parse_mapping, validate_mapping
from .model import Iri
from .namespaces import WELL_KNOWN_PREFIXES
from .ntriples import serialize_ntriples, write_ntriples_file
from .schema import extract_tbox, load_target_tbox, validate_target_tbox
from .store import open_store
from .turtle import read_rdf_file

EXIT_OK = 0
EXIT_DIAGNOSTICS = 1
EXIT_IO = 2


@dataclass
class RunConfig:
    mapping: str
    tboxes: list = field(default_factory=list)
    workspace: str = "workspace"
    store: str | None = None
    clock: str | None = None
    chunk_size: int = ops.DEFAULT_CHUNK_SIZE
    theta: float = 0.8
    top_k: int = 5

    def __post_init__(self):
        if not 0.0 <= self.theta <= 1.0:
            raise RdfEtlError(f"--theta must be within [0, 1], got {self.theta}")
        paths = [self.mapping, self.workspace] + ([self.store] if self.store else [])
        if len({str(Path(p)) for p in paths}) != len(paths):
            raise RdfEtlError("mapping, workspace, and store paths must be distinct")

    def flow_config(self) -> FlowConfig:
        return FlowConfig(
            base_dir=Path(self.mapping).resolve().parent,
            workspace=Path(self.workspace),
            store_dir=Path(self.store) if self.store else None,
            tbox_files=tuple(self.tboxes),
            clock=clock_from_string(self.clock) if self.clock else SystemClock(),
            chunk_size=self.chunk_size,
            theta=self.theta,
            top_k=self.top_k,
        )


def _say(message: str) -> None:
    print(message, file=sys.stderr)


def _emit(payload: bytes, out: str | None) -> None:
    if out:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_bytes(payload)
    else:
        sys.stdout.buffer.write(payload)


def _resolve_iri(text: str, namespaces: dict) -> Iri:
    if text.startswith("<") and text.endswith(">"):
        return Iri(text[1:-1])
    if ":" in text:
        prefix, _, local = text.partition(":")
        table = {**WELL_KNOWN_PREFIXES, **namespaces}
        if prefix in table:
            return Iri(table[prefix] + local)
    return Iri(text)


def _load_mapping(path: str):
    graph = read_rdf_file(path)
    return parse_mapping(graph), graph


def _config_from_args(args) -> RunConfig:
    return RunConfig(
        mapping=args.mapping,
        tboxes=list(args.tbox or []),
        workspace=args.workspace,
        store=args.store,
        clock=args.clock,
        chunk_size=args.chunk_size,
        theta=args.theta,
        top_k=args.top_k,
    )


# ---------------------------------------------------------------------------
# Commands


def cmd_extract_tbox(args) -> int:
    abox = read_rdf_file(args.abox)
    tbox = extract_tbox(abox)
    payload = serialize_ntriples(tbox)
    _emit(payload, args.out)
    _say(f"extracted {len(tbox)} TBox triples from {len(abox)} ABox triples")
    return EXIT_OK


def cmd_validate(args) -> int:
    mapping, graph = _load_mapping(args.mapping)
    tboxes = {}
    for cm in mapping.ordered_mappings():
        dataset = mapping.dataset_of(cm)
        if dataset is None:
            continue
        for authored in (dataset.source_tbox, dataset.target_tbox):
            if authored in tboxes:
                continue
            resolved = _resolve_tbox_path(authored, args)
            if resolved is not None:
                tboxes[authored] = read_rdf_file(resolved)
    diagnostics = validate_mapping(mapping, tboxes)
    for authored, tbox_graph in sorted(tboxes.items()):
        try:
            diagnostics.extend(validate_target_tbox(load_target_tbox(tbox_graph)))
        except RdfEtlError as error:
            diagnostics.append(str(error))
    for diagnostic in diagnostics:
        _say(f"diagnostic: {diagnostic}")
    if diagnostics:
        return EXIT_DIAGNOSTICS
    _say(f"mapping {args.mapping} is valid ({len(mapping.concept_mappings)} concept-mappings)")
    return EXIT_OK


def _resolve_tbox_path(authored: str, args):
    base = Path(args.mapping).resolve().parent
    candidate = Path(authored)
    if not candidate.is_absolute():
        candidate = base / candidate
    if candidate.exists():
        return candidate
    wanted = Path(authored).name
    for given in args.tbox or []:
        if Path(given).name == wanted:
            return Path(given)
    return None


def cmd_plan(args) -> int:
    mapping, graph = _load_mapping(args.mapping)
    config = _config_from_args(args).flow_config()
    target = _resolve_iri(args.target, graph.namespaces)
    plans = create_etl(target, mapping, None, config)
    if not plans:
        _say(f"no concept-mapping targets {target!r}")
        return EXIT_DIAGNOSTICS
    payload = "".join(serialize_plan(plan) for plan in plans).encode("utf-8")
    _emit(payload, args.out)
    _say(f"generated {len(plans)} plan(s) for {target!r}")
    return EXIT_OK


def cmd_run(args) -> int:
    mapping, graph = _load_mapping(args.mapping)
    run_config = _config_from_args(args)
    config = run_config.flow_config()
    if args.plan:
        plans = [parse_plan(Path(args.plan).read_text(), workspace=str(config.workspace))]
    else:
        target = _resolve_iri(args.target, graph.namespaces)
        plans = create_etl(target, mapping, None, config)
        if not plans:
            _say(f"no concept-mapping targets {target!r}")
            return EXIT_DIAGNOSTICS

    iri_graph = None
    if run_config.store:
        iri_graph = open_store(run_config.store).load_iri_graph()
    executor = PlanExecutor(mapping, config, iri_graph)
    for plan in plans:
        report = executor.execute_plan(plan)
        for step in report.steps:
            _say(
                f"{step.name}: {step.triples_in} in, {step.triples_out} out,"
                f" {step.seconds:.3f}s"
                + (f", {len(step.warnings)} warning(s)" if step.warnings else "")
            )
        if report.final_location:
            _say(f"loaded into {report.final_location}")
    return EXIT_OK


def cmd_diff(args) -> int:
    new = read_rdf_file(args.new)
    old = read_rdf_file(args.old)
    result = ops.changed_data_capture(new, old, args.flag)
    _emit(serialize_ntriples(result), args.out)
    _say(f"{len(result)} triple(s) with flag={args.flag}")
    return EXIT_OK


def cmd_update(args) -> int:
    mapping, graph = _load_mapping(args.mapping)
    run_config = _config_from_args(args)
    config = run_config.flow_config()
    level = _resolve_iri(args.level, graph.namespaces)
    candidates = mapping.mappings_targeting(level)
    if not candidates:
        _say(f"no concept-mapping targets level {level!r}")
        return EXIT_DIAGNOSTICS
    cm = candidates[0]
    dataset = mapping.dataset_of(cm)
    ttbox = load_target_tbox(read_rdf_file(config.resolve_tbox(dataset.target_tbox)))
    changed = read_rdf_file(args.changed)
    old_source = read_rdf_file(config.resolve(cm.source_location))
    store = open_store(run_config.store)
    iri_graph = store.load_iri_graph()
    updated = ops.update_level(
        level,
        changed,
        old_source,
        ttbox,
        store.data,
        cm.property_mappings,
        iri_graph,
        config.clock,
    )
    store.replace(updated)
    store.save_iri_graph(iri_graph)
    _say(f"level {level!r} updated; store now holds {len(updated)} triples")
    return EXIT_OK


# ---------------------------------------------------------------------------
# Parser


def _add_config_flags(sub):
    sub.add_argument("-m", "--mapping", required=True, help="S2TMAP mapping file (.ttl/.nt)")
    sub.add_argument("-t", "--tbox", action="append", help="TBox file (repeatable)")
    sub.add_argument("-w", "--workspace", default="workspace", help="intermediate-result directory")
    sub.add_argument("-s", "--store", default=None, help="triple store directory")
    sub.add_argument("--clock", default=None, help="fixed date YYYY-MM-DD for reproducible runs")
    sub.add_argument("--chunk-size", type=int, default=ops.DEFAULT_CHUNK_SIZE)
    sub.add_argument("--theta", type=float, default=0.8, help="linking similarity threshold")
    sub.add_argument("--top-k", type=int, default=5, help="linking candidate count")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rdfetl", description="Metadata-driven ETL for RDF data warehouses"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("extract-tbox", help="derive a TBox from an ABox file")
    p.add_argument("abox")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_extract_tbox)

    p = sub.add_parser("validate", help="check a mapping file and its TBoxes")
    p.add_argument("-m", "--mapping", required=True)
    p.add_argument("-t", "--tbox", action="append")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("plan", help="generate ETL flow plans for a target construct")
    p.add_argument("target")
    _add_config_flags(p)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("run", help="generate and execute ETL flows")
    p.add_argument("target", nargs="?", default=None)
    _add_config_flags(p)
    p.add_argument("--plan", default=None, help="run a previously serialized plan file")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("diff", help="changed-data capture between two snapshots")
    p.add_argument("new")
    p.add_argument("old")
    p.add_argument("--flag", type=int, choices=(0, 1), required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_diff)

    p = sub.add_parser("update", help="apply captured changes to a level in the store")
    p.add_argument("level")
    p.add_argument("changed")
    _add_config_flags(p)
    p.set_defaults(func=cmd_update)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "run" and not args.plan and not args.target:
        _say("run requires a target construct or --plan")
        return EXIT_DIAGNOSTICS
    try:
        return args.func(args)
    except (RdfSyntaxError, StoreError, OSError) as error:
        _say(f"error: {error}")
        return EXIT_IO
    except RdfEtlError as error:
        _say(f"error: {error}")
        return EXIT_DIAGNOSTICS


if __name__ == "__main__":
    sys.exit(main())
