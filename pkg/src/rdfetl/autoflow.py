"""Automatic ETL flow generation and execution.

Starting from a target construct, the generator walks the mapping DAG
backwards through source concepts, parameterizes each concept-mapping's
operation sequence, threads intermediate file paths through the
workspace, and prefixes the whole flow with the StartOp sentinel.
Adjacent steps must be compatible successors before a plan runs.
"""

from __future__ import annotations

import logging
import shlex
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from . import ops
from .errors import FlowError, PlanCompatibilityError, StepExecutionError
from .expressions import expression_to_string, parse_expression
from .iri import IriGraph, SystemClock
from .mapping import (
    ConceptMapping,
    IriRule,
    KNOWN_OPERATIONS,
    MappingFile,
    PropertyMapping,
    RelationKind,
    canonical_operation_name,
    instance_type_predicate,
)
from .model import Graph, Iri, Variable
from .namespaces import local_name
from .ntriples import read_ntriples_file
from .query import And, Filter, ExpressionCondition, TriplePattern, validate_expressions
from .schema import TargetTBox, load_target_tbox
from .store import open_store
from .turtle import read_rdf_file

logger = logging.getLogger(__name__)

START_OP = "StartOp"

# Table of compatible successors; an empty set means the operation ends
# a flow. StartOp may precede anything.
COMPATIBLE_SUCCESSORS = {
    "StartOp": frozenset(KNOWN_OPERATIONS) - {START_OP},
    "GraphExtractor": frozenset(
        {
            "GraphExtractor",
            "TBoxExtraction",
            "TransformationOnLiteral",
            "JoinTransformation",
            "LevelMemberGenerator",
            "ObservationGenerator",
            "ChangedDataCapture",
            "UpdateLevel",
            "Loader",
        }
    ),
    "TBoxExtraction": frozenset(),
    "TransformationOnLiteral": frozenset(
        {
            "TransformationOnLiteral",
            "JoinTransformation",
            "LevelMemberGenerator",
            "ObservationGenerator",
            "Loader",
        }
    ),
    "JoinTransformation": frozenset(
        {
            "TransformationOnLiteral",
            "JoinTransformation",
            "LevelMemberGenerator",
            "ObservationGenerator",
            "Loader",
        }
    ),
    "LevelMemberGenerator": frozenset({"Loader"}),
    "ObservationGenerator": frozenset({"Loader"}),
    "ChangedDataCapture": frozenset({"LevelMemberGenerator", "UpdateLevel"}),
    "UpdateLevel": frozenset({"Loader"}),
    "MaterializeInference": frozenset({"Loader"}),
    "ExternalLinking": frozenset({"Loader"}),
    "Loader": frozenset(),
}

_MD_FOLLOWERS = {
    "TransformationOnLiteral",
    "JoinTransformation",
    "LevelMemberGenerator",
    "ObservationGenerator",
    "UpdateLevel",
}


@dataclass
class OpInvocation:
    name: str
    params: dict = field(default_factory=dict)

    def param(self, key, default=None):
        return self.params.get(key, default)


@dataclass
class FlowPlan:
    target: Iri
    steps: list
    workspace: str

    def real_steps(self):
        return [s for s in self.steps if s.name != START_OP]


@dataclass
class StepReport:
    name: str
    triples_in: int
    triples_out: int
    seconds: float
    warnings: list


@dataclass
class EtlRunReport:
    target: Iri
    steps: list
    final_location: Optional[str] = None


@dataclass
class FlowConfig:
    """Everything flow generation needs beyond the mapping itself."""

    base_dir: Path
    workspace: Path
    store_dir: Optional[Path] = None
    tbox_files: tuple = ()
    clock: object = field(default_factory=SystemClock)
    chunk_size: int = ops.DEFAULT_CHUNK_SIZE
    theta: float = 0.8
    top_k: int = 5

    def resolve(self, authored: str) -> str:
        path = Path(authored)
        if path.is_absolute():
            return str(path)
        return str(self.base_dir / path)

    def resolve_tbox(self, authored: str) -> str:
        direct = Path(self.resolve(authored))
        if direct.exists():
            return str(direct)
        wanted = Path(authored).name
        for candidate in self.tbox_files:
            if Path(candidate).name == wanted:
                return str(candidate)
        raise FlowError(
            f"TBox {authored!r} not found; pass a matching file with --tbox"
        )


# ---------------------------------------------------------------------------
# Property-mapping rewrites around a mid-flow TransformationOnLiteral


def _carrier_property(pm: PropertyMapping) -> Iri:
    if pm.source_kind == "property":
        return pm.source_property
    carrier = ops.primary_source_property(pm.source_expression)
    if carrier is None:
        raise FlowError(
            f"expression mapping {pm.id!r} references no source property; "
            f"cannot stage it through TransformationOnLiteral"
        )
    return carrier


def tol_stage_mappings(pms) -> tuple:
    """Mappings for a mid-flow literal transformation: expressions are
    applied but results stay under their source-side carrier property."""
    return tuple(
        PropertyMapping(
            id=pm.id,
            concept_mapping=pm.concept_mapping,
            target_property=_carrier_property(pm),
            source_kind=pm.source_kind,
            source_property=pm.source_property,
            source_expression=pm.source_expression,
        )
        for pm in pms
    )


def post_tol_mappings(pms) -> tuple:
    """Mappings seen by operations after the literal transformation:
    every expression collapses to a plain property read of its carrier."""
    return tuple(
        PropertyMapping(
            id=pm.id,
            concept_mapping=pm.concept_mapping,
            target_property=pm.target_property,
            source_kind="property",
            source_property=_carrier_property(pm),
            source_expression=None,
        )
        for pm in pms
    )


# ---------------------------------------------------------------------------
# Plan generation (the create/parameterize recursion)


def parameterize(op_names, cm: ConceptMapping, mapping: MappingFile, ig, config: FlowConfig) -> list:
    """Fill each operation's parameter record from the concept-mapping.

    Returns invocations in execution order; intermediate input/output
    paths are placeholders threaded by finalize."""
    dataset = mapping.dataset_of(cm)
    s_tbox = config.resolve_tbox(dataset.source_tbox) if dataset else None
    t_tbox = config.resolve_tbox(dataset.target_tbox) if dataset else None

    invocations = []
    seen_tol = False
    for index, name in enumerate(op_names):
        name = canonical_operation_name(name)
        rest = op_names[index + 1 :]
        params = {"cm": cm.id}
        if name == "GraphExtractor":
            params.update(sConstruct=cm.source_concept, sTBox=s_tbox)
        elif name == "TransformationOnLiteral":
            mid_flow = any(canonical_operation_name(n) in _MD_FOLLOWERS for n in rest)
            params.update(
                sConstruct=cm.source_concept,
                tConstruct=cm.source_concept if mid_flow else cm.target_concept,
                sTBox=s_tbox,
                stage="mid" if mid_flow else "final",
            )
            seen_tol = True
        elif name == "JoinTransformation":
            params.update(
                sConstruct=cm.source_concept,
                tConstruct=cm.target_concept,
                sTBox=s_tbox,
                tTBox=t_tbox,
                tABox=config.resolve(cm.target_location),
                relation=cm.relation,
            )
        elif name == "LevelMemberGenerator":
            params.update(
                sConstruct=cm.source_concept,
                level=cm.target_concept,
                sTBox=s_tbox,
                tTBox=t_tbox,
                iriValue=cm.iri_rule,
            )
        elif name == "ObservationGenerator":
            params.update(
                sConstruct=cm.source_concept,
                dataset=cm.target_concept,
                sTBox=s_tbox,
                tTBox=t_tbox,
                iriValue=cm.iri_rule,
            )
        elif name == "ChangedDataCapture":
            next_name = canonical_operation_name(rest[0]) if rest else "UpdateLevel"
            params.update(
                oABox=config.resolve(cm.target_location),
                flag=1 if next_name == "UpdateLevel" else 0,
            )
        elif name == "UpdateLevel":
            params.update(level=cm.target_concept, sTBox=s_tbox, tTBox=t_tbox)
        elif name == "ExternalLinking":
            params.update(
                externalKB=config.resolve(cm.target_location),
                topK=config.top_k,
                theta=config.theta,
            )
        elif name == "MaterializeInference":
            params.update(tBox=t_tbox)
        elif name == "Loader":
            target = config.store_dir if config.store_dir else config.resolve(cm.target_location)
            params.update(tsPath=str(target))
        params["stage_mapped"] = seen_tol and name != "TransformationOnLiteral"
        invocations.append(OpInvocation(name, params))
    return invocations


def create_a_flow(cm: ConceptMapping, mapping: MappingFile, ig, config: FlowConfig, _depth=0) -> list:
    """Recursive flow assembly: upstream concept-mappings run first."""
    if _depth > len(mapping.concept_mappings):
        raise FlowError("concept-mapping recursion exceeds the mapping size; cycle suspected")
    steps = parameterize(cm.operation_sequence, cm, mapping, ig, config)
    upstream = mapping.mappings_targeting(cm.source_concept)
    if len(upstream) > 1:
        raise FlowError(
            f"intermediate concept {cm.source_concept!r} is targeted by "
            f"{len(upstream)} concept-mappings"
        )
    if upstream:
        steps = create_a_flow(upstream[0], mapping, ig, config, _depth + 1) + steps
    return steps


def _finalize_paths(target: Iri, cm_id: Iri, steps: list, mapping: MappingFile, config: FlowConfig):
    """Thread inputs and allocate workspace outputs along the flow."""
    flow_dir = Path(config.workspace) / f"{local_name(target)}__{local_name(cm_id)}"
    current = None
    last_cdc_old = None
    for index, step in enumerate(steps):
        cm = mapping.concept_mappings.get(step.param("cm"))
        authored_input = config.resolve(cm.source_location) if cm else None
        if step.name == "Loader":
            step.params["input"] = current
            continue
        if step.name == "ChangedDataCapture":
            step.params["nABox"] = current or authored_input
            last_cdc_old = step.param("oABox")
        elif step.name == "UpdateLevel":
            step.params["updatedTriples"] = current or authored_input
            step.params["sABox"] = last_cdc_old or authored_input
        else:
            step.params["sABox"] = current or authored_input
        step.params["output"] = str(flow_dir / f"{index:04d}.nt")
        current = step.params["output"]
    # an updating flow must know which store's data it rewrites
    loader_targets = [s.param("tsPath") for s in steps if s.name == "Loader"]
    for step in steps:
        if step.name == "UpdateLevel" and loader_targets:
            step.params["tsPath"] = loader_targets[-1]


def create_etl(target: Iri, mapping: MappingFile, ig, config: FlowConfig) -> list:
    """One executable plan per concept-mapping that targets the
    construct, ordered by concept-mapping IRI."""
    if target not in mapping.concepts():
        raise FlowError(f"target construct {target!r} does not occur in the mapping file")
    plans = []
    for cm in mapping.mappings_targeting(target):
        steps = create_a_flow(cm, mapping, ig, config)
        _finalize_paths(target, cm.id, steps, mapping, config)
        steps = [OpInvocation(START_OP)] + steps
        check_compatibility(steps)
        plans.append(FlowPlan(target=target, steps=steps, workspace=str(config.workspace)))
    return plans


def check_compatibility(steps) -> None:
    for left, right in zip(steps, steps[1:]):
        allowed = COMPATIBLE_SUCCESSORS.get(left.name)
        if allowed is None:
            raise PlanCompatibilityError(f"unknown operation {left.name!r}")
        if right.name not in allowed:
            raise PlanCompatibilityError(
                f"{right.name} cannot follow {left.name}; allowed successors: "
                f"{sorted(allowed) or 'none'}"
            )


# ---------------------------------------------------------------------------
# Plan (de)serialization: one step per line, shell-style quoting


def _format_value(value) -> str:
    if isinstance(value, Iri):
        return f"<{value.value}>"
    if isinstance(value, RelationKind):
        return value.value
    if isinstance(value, IriRule):
        if value.kind == IriRule.PROPERTY:
            return f"property:<{value.property.value}>"
        if value.kind == IriRule.EXPRESSION:
            return f"expression:{expression_to_string(value.expression)}"
        return value.kind
    if isinstance(value, bool):
        return "true" if value else "false"
    return str(value)


def _parse_value(key: str, text: str):
    if text.startswith("<") and text.endswith(">"):
        return Iri(text[1:-1])
    if key == "relation":
        return RelationKind(text)
    if key == "iriValue":
        if text.startswith("property:<") and text.endswith(">"):
            return IriRule(kind=IriRule.PROPERTY, property=Iri(text[len("property:<"):-1]))
        if text.startswith("expression:"):
            return IriRule(
                kind=IriRule.EXPRESSION,
                expression=parse_expression(text[len("expression:"):]),
            )
        return IriRule(kind=text)
    if key in ("flag", "topK"):
        return int(text)
    if key == "theta":
        return float(text)
    if key == "stage_mapped":
        return text == "true"
    return text


def serialize_plan(plan: FlowPlan) -> str:
    lines = []
    for step in plan.steps:
        parts = [step.name]
        for key in sorted(step.params):
            value = step.params[key]
            if value is None:
                continue
            parts.append(f"{key}={_format_value(value)}")
        lines.append(" ".join(shlex.quote(p) if " " in p else p for p in parts))
    return "\n".join(lines) + "\n"


def parse_plan(text: str, target: Optional[Iri] = None, workspace: str = "") -> FlowPlan:
    steps = []
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = shlex.split(line)
        name = canonical_operation_name(parts[0])
        params = {}
        for part in parts[1:]:
            key, _, value = part.partition("=")
            params[key] = _parse_value(key, value)
        steps.append(OpInvocation(name, params))
    if not steps or steps[0].name != START_OP:
        raise FlowError("a plan must begin with StartOp")
    return FlowPlan(target=target or Iri("urn:plan:unspecified"), steps=steps, workspace=workspace)


# ---------------------------------------------------------------------------
# Execution


class _WarningCollector(logging.Handler):
    def __init__(self):
        super().__init__(level=logging.WARNING)
        self.messages = []

    def emit(self, record):
        self.messages.append(record.getMessage())


def _build_extractor_query(cm: ConceptMapping, stbox: Graph):
    i, p, v = Variable("i"), Variable("p"), Variable("v")
    type_predicate = instance_type_predicate(cm.source_concept, stbox)
    pattern = And(
        TriplePattern(i, type_predicate, cm.source_concept), TriplePattern(i, p, v)
    )
    if cm.mapped_instances is not None:
        from .expressions import expression_iris

        extra = sorted(expression_iris(cm.mapped_instances), key=lambda x: x.value)
        for n, prop in enumerate(extra):
            pattern = And(pattern, TriplePattern(i, prop, Variable(f"c{n}")))
        condition = ExpressionCondition(
            validate_expressions([cm.mapped_instances], pattern, 1)[0]
        )
        pattern = Filter(pattern, condition)
    return pattern, [TriplePattern(i, p, v)]


class PlanExecutor:
    def __init__(self, mapping: MappingFile, config: FlowConfig, iri_graph: Optional[IriGraph] = None):
        self.mapping = mapping
        self.config = config
        self.iri_graph = iri_graph if iri_graph is not None else IriGraph()
        self._tbox_cache = {}
        self._target_tbox_cache = {}
        self.stores = []

    def _graph(self, path) -> Graph:
        return read_rdf_file(path)

    def _tbox_graph(self, path) -> Graph:
        if path not in self._tbox_cache:
            self._tbox_cache[path] = read_rdf_file(path)
        return self._tbox_cache[path]

    def _target_tbox(self, path) -> TargetTBox:
        if path not in self._target_tbox_cache:
            self._target_tbox_cache[path] = load_target_tbox(self._tbox_graph(path))
        return self._target_tbox_cache[path]

    def _mappings_for(self, step: OpInvocation):
        cm = self.mapping.concept_mappings[step.param("cm")]
        pms = cm.property_mappings
        if step.name == "TransformationOnLiteral" and step.param("stage") == "mid":
            return tol_stage_mappings(pms)
        if step.param("stage_mapped"):
            return post_tol_mappings(pms)
        return pms

    def execute_plan(self, plan: FlowPlan) -> EtlRunReport:
        check_compatibility(plan.steps)
        report = EtlRunReport(target=plan.target, steps=[])
        replace_store = any(s.name == "UpdateLevel" for s in plan.steps)
        collector = _WarningCollector()
        root_logger = logging.getLogger("rdfetl")
        root_logger.addHandler(collector)
        try:
            for step in plan.steps:
                if step.name == START_OP:
                    continue
                collector.messages = []
                started = time.perf_counter()
                try:
                    triples_in, triples_out, location = self._run_step(step, replace_store)
                except Exception as error:
                    raise StepExecutionError(
                        f"step {step.name} failed: {error}", report=report
                    ) from error
                report.steps.append(
                    StepReport(
                        name=step.name,
                        triples_in=triples_in,
                        triples_out=triples_out,
                        seconds=time.perf_counter() - started,
                        warnings=list(collector.messages),
                    )
                )
                if location is not None:
                    report.final_location = location
        finally:
            root_logger.removeHandler(collector)
        return report

    def _run_step(self, step: OpInvocation, replace_store: bool):
        name = step.name
        cm = self.mapping.concept_mappings.get(step.param("cm"))
        output = step.param("output")

        if name == "GraphExtractor":
            source = self._graph(step.param("sABox"))
            stbox = self._tbox_graph(step.param("sTBox"))
            pattern, out_pattern = _build_extractor_query(cm, stbox)
            result = ops.graph_extractor(pattern, source, out_pattern, output)
            return len(source), len(result), None

        if name == "TBoxExtraction":
            from .schema import extract_tbox

            source = self._graph(step.param("sABox"))
            result = ops._materialize(extract_tbox(source), output)
            return len(source), len(result), None

        if name == "TransformationOnLiteral":
            source = self._graph(step.param("sABox"))
            result = ops.transformation_on_literal(
                step.param("sConstruct"),
                step.param("tConstruct"),
                self._tbox_graph(step.param("sTBox")),
                source,
                self._mappings_for(step),
                output,
            )
            return len(source), len(result), None

        if name == "JoinTransformation":
            source = self._graph(step.param("sABox"))
            target_side = self._graph(step.param("tABox"))
            result = ops.join_transformation(
                step.param("sConstruct"),
                step.param("tConstruct"),
                self._tbox_graph(step.param("sTBox")),
                self._tbox_graph(step.param("tTBox")),
                source,
                target_side,
                cm.common_properties,
                self._mappings_for(step),
                step.param("relation"),
                output,
            )
            return len(source) + len(target_side), len(result), None

        if name == "LevelMemberGenerator":
            source = self._graph(step.param("sABox"))
            result = ops.level_member_generator(
                step.param("sConstruct"),
                step.param("level"),
                self._tbox_graph(step.param("sTBox")),
                source,
                self._target_tbox(step.param("tTBox")),
                step.param("iriValue"),
                self.iri_graph,
                self._mappings_for(step),
                output,
                chunk_size=self.config.chunk_size,
            )
            return len(source), len(result), None

        if name == "ObservationGenerator":
            source = self._graph(step.param("sABox"))
            result = ops.observation_generator(
                step.param("sConstruct"),
                step.param("dataset"),
                self._tbox_graph(step.param("sTBox")),
                source,
                self._target_tbox(step.param("tTBox")),
                step.param("iriValue"),
                self.iri_graph,
                self._mappings_for(step),
                output,
                chunk_size=self.config.chunk_size,
            )
            return len(source), len(result), None

        if name == "ChangedDataCapture":
            new = self._graph(step.param("nABox"))
            old = self._graph(step.param("oABox"))
            result = ops.changed_data_capture(new, old, step.param("flag"), output)
            return len(new) + len(old), len(result), None

        if name == "UpdateLevel":
            updated = self._graph(step.param("updatedTriples"))
            old_source = self._graph(step.param("sABox"))
            store = open_store(step.params.get("tsPath") or self.config.store_dir)
            result = ops.update_level(
                step.param("level"),
                updated,
                old_source,
                self._target_tbox(step.param("tTBox")),
                store.data,
                self._mappings_for(step),
                self.iri_graph,
                self.config.clock,
                output,
            )
            return len(updated) + len(old_source), len(result), None

        if name == "MaterializeInference":
            source = self._graph(step.param("sABox"))
            tbox = self._tbox_graph(step.param("tBox"))
            result = ops._materialize(ops.materialize_inference(source, tbox), output)
            return len(source), len(result), None

        if name == "ExternalLinking":
            source = self._graph(step.param("sABox"))
            external = self._graph(step.param("externalKB"))
            result = ops.external_linking(source, external, step.param("topK"), step.param("theta"))
            ops._materialize(result, output)
            return len(source) + len(external), len(result), None

        if name == "Loader":
            payload = self._graph(step.param("input"))
            store = open_store(step.param("tsPath"))
            if replace_store:
                store.replace(payload)
            else:
                store.merge(payload)
            store.save_iri_graph(self.iri_graph)
            self.stores.append(store)
            return len(payload), len(store.data), str(store.root)

        raise FlowError(f"no executor for operation {name!r}")


def execute_plan(plan: FlowPlan, mapping: MappingFile, config: FlowConfig, iri_graph=None) -> EtlRunReport:
    return PlanExecutor(mapping, config, iri_graph).execute_plan(plan)
