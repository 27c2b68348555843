"""Source-to-target mapping model and its RDF serialization.

A mapping file is a DAG of concept-mappings; each concept-mapping
relates one source construct to one target construct and carries the
operation sequence, property-mappings, IRI rule, and join metadata the
execution layer needs to parameterize itself.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional

from . import expressions as ex
from .errors import MappingError, OperationError
from .model import Graph, Iri, Literal, Term, Triple, Variable, term_sort_key
from .namespaces import MAP, OWL, QB, QB4O, RDF, RDFS, WELL_KNOWN_PREFIXES
from .query import (
    And,
    Filter,
    MembershipCondition,
    TriplePattern,
    execute_query,
    get_properties_from_expressions,
    validate_expressions,
)

# Canonical execution-layer operation names. The mapping vocabulary and
# the compatibility table use two spellings for the change detector.
KNOWN_OPERATIONS = (
    "StartOp",
    "GraphExtractor",
    "TBoxExtraction",
    "TransformationOnLiteral",
    "JoinTransformation",
    "LevelMemberGenerator",
    "ObservationGenerator",
    "ChangedDataCapture",
    "UpdateLevel",
    "MaterializeInference",
    "ExternalLinking",
    "Loader",
)

_OPERATION_ALIASES = {name.lower(): name for name in KNOWN_OPERATIONS}
_OPERATION_ALIASES["datachangedetector"] = "ChangedDataCapture"


def canonical_operation_name(name: str) -> str:
    canonical = _OPERATION_ALIASES.get(name.lower())
    if canonical is None:
        raise MappingError(f"unknown ETL operation {name!r}")
    return canonical


class RelationKind(enum.Enum):
    EQUIVALENCE = "equivalence"
    SUBSUMPTION = "subsumption"
    SUPERSUMPTION = "supersumption"
    NATURAL_JOIN = "natural-join"
    LEFT_OUTER_JOIN = "left-outer-join"
    RIGHT_OUTER_JOIN = "right-outer-join"

    @property
    def is_join(self) -> bool:
        return self in (
            RelationKind.NATURAL_JOIN,
            RelationKind.LEFT_OUTER_JOIN,
            RelationKind.RIGHT_OUTER_JOIN,
        )


RELATION_IRIS = {
    OWL.equivalentClass: RelationKind.EQUIVALENCE,
    RDFS.subClassOf: RelationKind.SUBSUMPTION,
    MAP.supersumption: RelationKind.SUPERSUMPTION,
    MAP.join: RelationKind.NATURAL_JOIN,
    MAP.leftOuterjoin: RelationKind.LEFT_OUTER_JOIN,
    MAP.rightOuterjoin: RelationKind.RIGHT_OUTER_JOIN,
}


@dataclass(frozen=True)
class IriRule:
    """How target-instance IRIs are minted: same as source, from a
    property value, from an expression, or from a per-construct counter."""

    kind: str  # sameAsSourceIRI | property | expression | incremental
    property: Optional[Iri] = None
    expression: Optional[object] = None

    SAME_AS_SOURCE = "sameAsSourceIRI"
    PROPERTY = "property"
    EXPRESSION = "expression"
    INCREMENTAL = "incremental"

    @classmethod
    def same_as_source(cls):
        return cls(kind=cls.SAME_AS_SOURCE)


@dataclass(frozen=True)
class PropertyMapping:
    id: Iri
    concept_mapping: Iri
    target_property: Iri
    source_kind: str  # "property" | "expression"
    source_property: Optional[Iri] = None
    source_expression: Optional[object] = None

    def source_as_expression(self):
        if self.source_kind == "property":
            return ex.IriRef(self.source_property)
        return self.source_expression


@dataclass(frozen=True)
class CommonPropertyPair:
    source_property: Iri
    target_property: Iri


@dataclass(frozen=True)
class ConceptMapping:
    id: Iri
    map_dataset: Optional[Iri]
    source_concept: Iri
    target_concept: Iri
    source_location: str
    target_location: str
    relation: RelationKind
    mapped_instances: Optional[object]  # None means All; else a filter expression
    iri_rule: IriRule
    common_properties: tuple
    operation_sequence: tuple
    property_mappings: tuple

    def source_expressions(self) -> list:
        return [pm.source_as_expression() for pm in self.property_mappings]


@dataclass(frozen=True)
class MapDataset:
    id: Iri
    source_tbox: str
    target_tbox: str


@dataclass
class MappingFile:
    datasets: dict = field(default_factory=dict)
    concept_mappings: dict = field(default_factory=dict)

    def ordered_mappings(self) -> list:
        return [self.concept_mappings[k] for k in sorted(self.concept_mappings, key=term_sort_key)]

    def mappings_targeting(self, concept: Iri) -> list:
        return [cm for cm in self.ordered_mappings() if cm.target_concept == concept]

    def dataset_of(self, cm: ConceptMapping) -> Optional[MapDataset]:
        if cm.map_dataset is None:
            return None
        return self.datasets.get(cm.map_dataset)

    def dag_edges(self) -> set:
        return {
            ((cm.source_concept, cm.source_location), (cm.target_concept, cm.target_location))
            for cm in self.concept_mappings.values()
        }

    def concepts(self) -> set:
        out = set()
        for cm in self.concept_mappings.values():
            out |= {cm.source_concept, cm.target_concept}
        return out


# ---------------------------------------------------------------------------
# Parsing


_IRI_VALUE_TYPE_PREDICATES = (
    MAP.targetInstanceIRIUniqueValueType,
    MAP.targetInstanceIRIValueType,  # synonym used interchangeably in the wild
    MAP.TargetInstanceIRIType,
)

_IRI_VALUE_PREDICATES = (MAP.targetInstanceIRIValue, MAP.targetInstanceIRIvalue)


def _literal_value(graph, subject, *predicates) -> Optional[str]:
    for p in predicates:
        value = graph.value(subject, p)
        if isinstance(value, Literal):
            return value.lexical
    return None


def _first_value(graph, subject, *predicates):
    for p in predicates:
        value = graph.value(subject, p)
        if value is not None:
            return value
    return None


def _decode_seq(graph, node) -> list:
    """Decode rdf:_1..rdf:_n members; numbering must start at 1 and be
    consecutive."""
    members = {}
    for t in graph.match(node, None, None):
        name = t.predicate.value
        marker = RDF.base + "_"
        if name.startswith(marker):
            try:
                index = int(name[len(marker):])
            except ValueError:
                raise MappingError(f"bad sequence predicate {name!r}")
            if index in members:
                raise MappingError(f"duplicate sequence index {index} on {node!r}")
            members[index] = t.object
    if not members:
        return []
    expected = list(range(1, len(members) + 1))
    if sorted(members) != expected:
        raise MappingError(f"sequence {node!r} numbering is broken: {sorted(members)}")
    return [members[i] for i in expected]


def _prefixes_of(graph: Graph) -> dict:
    merged = dict(WELL_KNOWN_PREFIXES)
    merged.update(graph.namespaces)
    return merged


def parse_mapping(graph: Graph) -> MappingFile:
    """Interpret a mapping graph (the map: vocabulary) as a MappingFile."""
    prefixes = _prefixes_of(graph)
    mapping = MappingFile()

    dataset_subjects = set()
    for cls in (MAP.Dataset, MAP.MapDataset):
        dataset_subjects |= graph.typed_subjects(cls)
    for subject in sorted(dataset_subjects, key=term_sort_key):
        mapping.datasets[subject] = MapDataset(
            id=subject,
            source_tbox=_literal_value(graph, subject, MAP.sourceTBox) or "",
            target_tbox=_literal_value(graph, subject, MAP.targetTBox) or "",
        )

    property_mappings = {}
    for subject in sorted(graph.typed_subjects(MAP.PropertyMapping), key=term_sort_key):
        cms = graph.objects(subject, MAP.conceptMapping)
        target = graph.value(subject, MAP.targetProperty)
        if target is None or not isinstance(target, Iri):
            raise MappingError(f"property-mapping {subject!r} lacks a target property")
        kind_iri = graph.value(subject, MAP.sourceType4TargetPropertyValue)
        source_value = graph.value(subject, MAP.source4TargetPropertyValue)
        if source_value is None:
            raise MappingError(f"property-mapping {subject!r} lacks a source value")
        if kind_iri == MAP.Expression or (kind_iri is None and isinstance(source_value, Literal)):
            if not isinstance(source_value, Literal):
                raise MappingError(f"property-mapping {subject!r}: expression value must be a literal")
            expr = ex.parse_expression(source_value.lexical, prefixes)
            kind, prop = "expression", None
        else:
            if isinstance(source_value, Literal):
                raise MappingError(f"property-mapping {subject!r}: property value must be an IRI")
            kind, prop, expr = "property", source_value, None
        for cm in cms:
            property_mappings.setdefault(cm, []).append(
                PropertyMapping(
                    id=subject,
                    concept_mapping=cm,
                    target_property=target,
                    source_kind=kind,
                    source_property=prop,
                    source_expression=expr,
                )
            )

    for subject in sorted(graph.typed_subjects(MAP.ConceptMapping), key=term_sort_key):
        source = graph.value(subject, MAP.sourceConcept)
        target = graph.value(subject, MAP.targetConcept)
        if source is None or target is None:
            raise MappingError(f"concept-mapping {subject!r} lacks a source or target concept")

        relation_iri = graph.value(subject, MAP.relation)
        relation = RELATION_IRIS.get(relation_iri)
        if relation is None:
            raise MappingError(f"concept-mapping {subject!r} has unknown relation {relation_iri!r}")

        mapped = graph.value(subject, MAP.mappedInstance)
        if mapped is None or (isinstance(mapped, Literal) and mapped.lexical.lower() == "all"):
            mapped_instances = None
        elif isinstance(mapped, Literal):
            mapped_instances = ex.parse_expression(mapped.lexical, prefixes)
        else:
            raise MappingError(f"concept-mapping {subject!r}: mappedInstance must be a literal")

        rule_kind = _first_value(graph, subject, *_IRI_VALUE_TYPE_PREDICATES)
        if rule_kind is None or rule_kind == MAP.SameAsSourceIRI:
            iri_rule = IriRule.same_as_source()
        elif rule_kind == MAP.Incremental:
            iri_rule = IriRule(kind=IriRule.INCREMENTAL)
        elif rule_kind == MAP.Property:
            value = _first_value(graph, subject, *_IRI_VALUE_PREDICATES)
            if not isinstance(value, Iri):
                raise MappingError(f"concept-mapping {subject!r}: IRI-value property missing")
            iri_rule = IriRule(kind=IriRule.PROPERTY, property=value)
        elif rule_kind == MAP.Expression:
            value = _first_value(graph, subject, *_IRI_VALUE_PREDICATES)
            if not isinstance(value, Literal):
                raise MappingError(f"concept-mapping {subject!r}: IRI-value expression missing")
            iri_rule = IriRule(
                kind=IriRule.EXPRESSION, expression=ex.parse_expression(value.lexical, prefixes)
            )
        else:
            raise MappingError(f"concept-mapping {subject!r}: unknown IRI value type {rule_kind!r}")

        common = []
        for node in graph.objects(subject, MAP.commonProperty):
            source_prop = _first_value(
                graph, node, MAP.sourceCommonProperty, MAP.commonSourceProperty
            )
            target_prop = _first_value(
                graph, node, MAP.targetCommonProperty, MAP.commonTargetProperty
            )
            if source_prop is None or target_prop is None:
                raise MappingError(f"common-property node of {subject!r} is incomplete")
            common.append(CommonPropertyPair(source_prop, target_prop))
        common.sort(key=lambda cp: (term_sort_key(cp.source_property), term_sort_key(cp.target_property)))

        seq_node = graph.value(subject, MAP.operation)
        operations = []
        if seq_node is not None:
            for member in _decode_seq(graph, seq_node):
                if isinstance(member, Iri):
                    name = member.value.rsplit("/", 1)[-1].rsplit("#", 1)[-1]
                elif isinstance(member, Literal):
                    name = member.lexical
                else:
                    raise MappingError(f"operation entry {member!r} is not an IRI or literal")
                operations.append(canonical_operation_name(name))
        if not operations:
            raise MappingError(f"concept-mapping {subject!r} has an empty operation sequence")

        pms = tuple(sorted(property_mappings.get(subject, []), key=lambda pm: term_sort_key(pm.id)))
        mapping.concept_mappings[subject] = ConceptMapping(
            id=subject,
            map_dataset=graph.value(subject, MAP.mapDataset),
            source_concept=source,
            target_concept=target,
            source_location=_literal_value(graph, subject, MAP.sourceLocation) or "",
            target_location=_literal_value(graph, subject, MAP.targetLocation) or "",
            relation=relation,
            mapped_instances=mapped_instances,
            iri_rule=iri_rule,
            common_properties=tuple(common),
            operation_sequence=tuple(operations),
            property_mappings=pms,
        )
    return mapping


# ---------------------------------------------------------------------------
# Validation


def validate_mapping(mapping: MappingFile, tboxes: Optional[dict] = None) -> list:
    """Diagnostics for DAG violations and incomplete join metadata.

    ``tboxes`` optionally maps the authored TBox path strings to loaded
    graphs or TargetTBox objects so property-mapping targets can be
    checked.
    """
    diagnostics = []
    mappings = mapping.ordered_mappings()

    adjacency = {}
    for cm in mappings:
        src = (cm.source_concept, cm.source_location)
        dst = (cm.target_concept, cm.target_location)
        adjacency.setdefault(src, set()).add(dst)
    state = {}

    def visit(node):
        state[node] = "active"
        for nxt in sorted(adjacency.get(node, ()), key=lambda n: term_sort_key(n[0])):
            if state.get(nxt) == "active":
                diagnostics.append(f"mapping graph has a cycle through {nxt[0]!r}")
                return False
            if nxt not in state and not visit(nxt):
                return False
        state[node] = "done"
        return True

    for node in sorted(adjacency, key=lambda n: term_sort_key(n[0])):
        if node not in state:
            if not visit(node):
                break

    source_concepts = {cm.source_concept for cm in mappings}
    target_counts = {}
    for cm in mappings:
        target_counts.setdefault(cm.target_concept, []).append(cm.id)
    for concept, ids in sorted(target_counts.items(), key=lambda kv: term_sort_key(kv[0])):
        if len(ids) > 1 and concept in source_concepts:
            diagnostics.append(
                f"intermediate concept {concept!r} is targeted by {len(ids)} concept-mappings"
            )

    for cm in mappings:
        if cm.relation.is_join and not cm.common_properties:
            diagnostics.append(f"join mapping {cm.id!r} declares no common properties")
        if not cm.relation.is_join and cm.common_properties:
            diagnostics.append(f"non-join mapping {cm.id!r} declares common properties")

    if tboxes:
        from .schema import TargetTBox, concepts_of, properties_of

        for cm in mappings:
            dataset = mapping.dataset_of(cm)
            if dataset is None:
                continue
            tbox = tboxes.get(dataset.target_tbox)
            if tbox is None:
                continue
            graph = tbox.graph if isinstance(tbox, TargetTBox) else tbox
            known = concepts_of(graph) | properties_of(graph)
            for pm in cm.property_mappings:
                if pm.target_property not in known:
                    diagnostics.append(
                        f"property-mapping {pm.id!r} targets {pm.target_property!r}, "
                        f"absent from the target TBox"
                    )
    return diagnostics


def topological_order(mapping: MappingFile) -> list:
    """Stable topological order of (concept, location) nodes."""
    edges = mapping.dag_edges()
    nodes = {n for e in edges for n in e}
    incoming = {n: set() for n in nodes}
    for src, dst in edges:
        incoming[dst].add(src)
    order, ready = [], sorted(
        (n for n in nodes if not incoming[n]), key=lambda n: term_sort_key(n[0])
    )
    while ready:
        node = ready.pop(0)
        order.append(node)
        for src, dst in sorted(edges, key=lambda e: term_sort_key(e[1][0])):
            if src == node and node in incoming[dst]:
                incoming[dst].discard(node)
                if not incoming[dst]:
                    ready.append(dst)
        ready.sort(key=lambda n: term_sort_key(n[0]))
    if len(order) != len(nodes):
        raise MappingError("mapping graph is not acyclic")
    return order


# ---------------------------------------------------------------------------
# Instance bridging


def instance_type_predicate(construct: Iri, tbox_graph: Graph) -> Iri:
    """rdf:type, or the QB4OLAP membership predicate when the construct
    is a level or dataset."""
    types = set(tbox_graph.objects(construct, RDF.type))
    if QB4O.LevelProperty in types:
        return QB4O.memberOf
    if types & {QB.DataSet, QB.term("Dataset")}:
        return QB.dataset
    return RDF.type


def mapped_source_instances(sc: Iri, stbox: Graph, sabox: Graph, pms, extra_properties=()) -> dict:
    """Instances of ``sc`` with only the property values the mappings use.

    ``extra_properties`` widens the filter, e.g. for the property an IRI
    rule reads. Returns {instance term -> set of (property, value) pairs}.
    """
    exps = [pm.source_as_expression() for pm in pms]
    properties = get_properties_from_expressions(stbox, exps) | set(extra_properties)
    i, p, v = Variable("i"), Variable("p"), Variable("v")
    pattern = Filter(
        And(TriplePattern(i, instance_type_predicate(sc, stbox), sc), TriplePattern(i, p, v)),
        MembershipCondition(p, frozenset(properties)),
    )
    result = execute_query(pattern, sabox, (i, p, v))
    instances = {}
    for inst, prop, value in result:
        instances.setdefault(inst, set()).add((prop, value))
    return instances


def tuples_to_triples(tuples, tc: Iri, q, pms, fmt) -> Graph:
    """Turn instance tuples into RDF: one rdf:type triple per tuple plus
    one triple per non-null expression column, predicated by the target
    property its source expression is mapped to."""
    fmt = list(fmt)
    column_exprs = fmt[1:]
    predicates = []
    for expr in column_exprs:
        source_form = validate_expressions([expr], q, 0)[0]
        predicates.append(_target_property_for(source_form, pms))

    triples = []
    for row in tuples:
        instance = row[0]
        if instance is None or isinstance(instance, Literal):
            continue
        triples.append(Triple(instance, RDF.type, tc))
        for value, predicate in zip(row[1:], predicates):
            if value is not None:
                triples.append(Triple(instance, predicate, value))
    return Graph(triples)


def _target_property_for(source_form, pms) -> Iri:
    for pm in pms:
        if pm.source_kind == "property":
            if isinstance(source_form, ex.IriRef) and source_form.iri == pm.source_property:
                return pm.target_property
        elif pm.source_expression == source_form:
            return pm.target_property
    raise OperationError(f"no property-mapping matches expression {ex.expression_to_string(source_form)}")
