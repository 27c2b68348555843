"""Multidimensional target schema: dimensions, cubes, update types.

Loads a QB4OLAP-annotated graph into a structured model, validates the
dimension/cube well-formedness rules, and derives a TBox from a bare
ABox by inspecting instance sets.
"""

from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass, field
from typing import Optional

from .errors import SchemaError
from .model import BlankNode, Graph, Iri, Literal, Triple, term_sort_key
from .namespaces import OWL, QB, QB4O, RDF, RDFS, XSD, namespace_of

logger = logging.getLogger(__name__)

# Class memberships that make an IRI a "concept" of a TBox. The QB
# vocabulary spells DataSet with a capital S but data in the wild also
# uses qb:Dataset, so both are accepted.
CONCEPT_TYPES = frozenset(
    {
        RDFS.Class,
        OWL.Class,
        QB.DataStructureDefinition,
        QB.DataSet,
        QB.term("Dataset"),
        QB.DimensionProperty,
        QB4O.term("DimensionProperty"),
        QB4O.LevelProperty,
        QB4O.Hierarchy,
        QB4O.HierarchyStep,
    }
)

PROPERTY_TYPES = frozenset(
    {
        RDF.Property,
        OWL.ObjectProperty,
        OWL.DatatypeProperty,
        QB4O.LevelAttribute,
        QB.MeasureProperty,
        QB.term("MeassureProperty"),
        QB4O.RollupProperty,
    }
)

UPDATE_TYPES = {QB4O.Type1: 1, QB4O.Type2: 2, QB4O.Type3: 3}

AGGREGATE_FUNCTIONS = {
    QB4O.sum: "SUM",
    QB4O.avg: "AVG",
    QB4O.max: "MAX",
    QB4O.min: "MIN",
    QB4O.count: "COUNT",
}


def concepts_of(graph: Graph) -> set:
    """IRIs typed as concept-forming classes."""
    found = set()
    for cls in CONCEPT_TYPES:
        found |= {s for s in graph.typed_subjects(cls) if isinstance(s, Iri)}
    return found


def properties_of(graph: Graph) -> set:
    """IRIs typed as property-forming classes."""
    found = set()
    for cls in PROPERTY_TYPES:
        found |= {s for s in graph.typed_subjects(cls) if isinstance(s, Iri)}
    return found


@dataclass(frozen=True)
class HierarchyStep:
    hierarchy: Optional[Iri]
    child: Iri
    parent: Iri
    cardinality: Optional[Iri] = None
    rollup: Optional[Iri] = None


@dataclass
class DimensionSchema:
    name: Iri
    levels: dict = field(default_factory=dict)  # level -> frozenset of attributes
    order: set = field(default_factory=set)  # (child, parent) edges
    hierarchies: dict = field(default_factory=dict)  # hierarchy -> frozenset of levels
    rollups: dict = field(default_factory=dict)  # (child, parent) -> rollup property
    cardinalities: dict = field(default_factory=dict)  # HierarchyStep -> cardinality IRI


@dataclass
class CubeSchema:
    name: Iri
    structure: Optional[Iri]
    bottom_levels: frozenset
    measures: frozenset
    aggregations: frozenset  # (measure, function-name) pairs


@dataclass
class TargetTBox:
    graph: Graph
    prefix: str
    dimensions: dict = field(default_factory=dict)
    cubes: dict = field(default_factory=dict)
    levels: dict = field(default_factory=dict)  # level -> frozenset of attributes
    level_ranges: dict = field(default_factory=dict)
    attribute_update_types: dict = field(default_factory=dict)
    attribute_ranges: dict = field(default_factory=dict)
    rollup_ranges: dict = field(default_factory=dict)  # rollup property -> parent level
    measures: set = field(default_factory=set)
    datasets: set = field(default_factory=set)

    def concepts(self) -> set:
        return concepts_of(self.graph)

    def properties(self) -> set:
        return properties_of(self.graph)

    def is_construct(self, iri) -> bool:
        return iri in self.concepts() or iri in self.properties()

    def construct_kind(self, iri) -> Optional[str]:
        """One of level / attribute / rollup / measure / dataset, or None."""
        types = set(self.graph.objects(iri, RDF.type))
        if QB4O.LevelProperty in types:
            return "level"
        if QB4O.LevelAttribute in types:
            return "attribute"
        if QB4O.RollupProperty in types:
            return "rollup"
        if types & {QB.MeasureProperty, QB.term("MeassureProperty")}:
            return "measure"
        if types & {QB.DataSet, QB.term("Dataset")}:
            return "dataset"
        return None

    def range_of(self, iri) -> Optional[Iri]:
        if iri in self.rollup_ranges:
            return self.rollup_ranges[iri]
        value = self.graph.value(iri, RDFS.range)
        return value if isinstance(value, Iri) else None

    def update_type_of(self, attribute) -> int:
        return self.attribute_update_types.get(attribute, 1)


def _object_values(graph, subject, *predicates):
    out = []
    for p in predicates:
        out.extend(graph.objects(subject, p))
    return out


def load_target_tbox(graph: Graph) -> TargetTBox:
    """Interpret a QB4OLAP graph as a structured target schema.

    Cross-references must resolve: a hierarchy step naming an undeclared
    level is an error. Attributes without an update type default to
    Type1 with a warning.
    """
    levels = {s for s in graph.typed_subjects(QB4O.LevelProperty) if isinstance(s, Iri)}
    attributes = {s for s in graph.typed_subjects(QB4O.LevelAttribute) if isinstance(s, Iri)}
    rollups = {s for s in graph.typed_subjects(QB4O.RollupProperty) if isinstance(s, Iri)}
    measures = {
        s
        for cls in (QB.MeasureProperty, QB.term("MeassureProperty"))
        for s in graph.typed_subjects(cls)
        if isinstance(s, Iri)
    }
    datasets = {
        s
        for cls in (QB.DataSet, QB.term("Dataset"))
        for s in graph.typed_subjects(cls)
        if isinstance(s, Iri)
    }

    # level -> attributes, from both qb4o:hasAttribute and qb4o:inLevel
    level_attributes = {level: set() for level in levels}
    for level in levels:
        for attr in graph.objects(level, QB4O.hasAttribute):
            if attr not in attributes:
                raise SchemaError(f"level {level!r} names undeclared attribute {attr!r}")
            level_attributes[level].add(attr)
    for attr in attributes:
        for level in graph.objects(attr, QB4O.inLevel):
            if level not in levels:
                raise SchemaError(f"attribute {attr!r} names undeclared level {level!r}")
            level_attributes[level].add(attr)

    update_types = {}
    for attr in sorted(attributes, key=term_sort_key):
        declared = graph.value(attr, QB4O.updateType)
        if declared is None:
            logger.warning("attribute %r has no update type; defaulting to Type1", attr)
            update_types[attr] = 1
        elif declared in UPDATE_TYPES:
            update_types[attr] = UPDATE_TYPES[declared]
        else:
            raise SchemaError(f"attribute {attr!r} has unknown update type {declared!r}")

    attribute_ranges = {}
    for attr in attributes:
        rng = graph.value(attr, RDFS.range)
        if rng is not None:
            attribute_ranges[attr] = rng

    level_ranges = {}
    for level in levels:
        rng = graph.value(level, RDFS.range)
        if isinstance(rng, Iri):
            level_ranges[level] = rng

    # hierarchy steps
    steps = []
    for node in graph.typed_subjects(QB4O.HierarchyStep):
        child = graph.value(node, QB4O.childLevel)
        parent = graph.value(node, QB4O.parentLevel)
        if child is None or parent is None:
            raise SchemaError(f"hierarchy step {node!r} lacks a child or parent level")
        for end in (child, parent):
            if end not in levels:
                raise SchemaError(f"hierarchy step {node!r} references undeclared level {end!r}")
        hierarchy = graph.value(node, QB4O.inHierarchy)
        steps.append(
            HierarchyStep(
                hierarchy=hierarchy if isinstance(hierarchy, Iri) else None,
                child=child,
                parent=parent,
                cardinality=graph.value(node, QB4O.pcCardinality),
                rollup=graph.value(node, QB4O.rollup),
            )
        )
    steps.sort(key=lambda s: (term_sort_key(s.child), term_sort_key(s.parent)))

    rollup_ranges = {}
    for step in steps:
        if step.rollup is not None:
            rollup_ranges[step.rollup] = step.parent

    # dimensions, linked to hierarchies from either direction
    dimensions = {}
    dim_iris = set()
    for cls in (QB.DimensionProperty, QB4O.term("DimensionProperty")):
        dim_iris |= {s for s in graph.typed_subjects(cls) if isinstance(s, Iri)}
    for dim in sorted(dim_iris, key=term_sort_key):
        hier_iris = set(_object_values(graph, dim, QB4O.hasHierarchy, QB4O.term("hasHierarcy")))
        hier_iris |= graph.subjects(QB4O.inDimension, dim)
        hierarchies, dim_levels = {}, set()
        for h in sorted(hier_iris, key=term_sort_key):
            h_levels = {
                lv
                for lv in _object_values(graph, h, QB4O.hasLevel, QB4O.term("haslevel"))
            }
            for lv in h_levels:
                if lv not in levels:
                    raise SchemaError(f"hierarchy {h!r} references undeclared level {lv!r}")
            hierarchies[h] = frozenset(h_levels)
            dim_levels |= h_levels
        schema = DimensionSchema(name=dim, hierarchies=hierarchies)
        for step in steps:
            if step.hierarchy in hier_iris or step.child in dim_levels:
                schema.order.add((step.child, step.parent))
                if step.rollup is not None:
                    schema.rollups[(step.child, step.parent)] = step.rollup
                schema.cardinalities[step] = step.cardinality
                dim_levels |= {step.child, step.parent}
        schema.levels = {lv: frozenset(level_attributes.get(lv, ())) for lv in dim_levels}
        dimensions[dim] = schema

    # cubes: data structure definitions plus the datasets bound to them
    cubes = {}
    for dsd in sorted(graph.typed_subjects(QB.DataStructureDefinition), key=term_sort_key):
        bottom, cube_measures, aggregations = set(), set(), set()
        for component in graph.objects(dsd, QB.component):
            level = graph.value(component, QB4O.level)
            if level is not None:
                if level not in levels:
                    raise SchemaError(f"cube {dsd!r} references undeclared level {level!r}")
                bottom.add(level)
            measure = graph.value(component, QB.measure)
            if measure is not None:
                cube_measures.add(measure)
                for fn in graph.objects(component, QB4O.aggregateFunction):
                    name = AGGREGATE_FUNCTIONS.get(fn)
                    if name is None:
                        raise SchemaError(f"unknown aggregate function {fn!r} on {dsd!r}")
                    aggregations.add((measure, name))
        cubes[dsd] = CubeSchema(
            name=dsd,
            structure=dsd,
            bottom_levels=frozenset(bottom),
            measures=frozenset(cube_measures),
            aggregations=frozenset(aggregations),
        )

    prefix = _warehouse_prefix(levels | attributes | rollups | measures | datasets | dim_iris)
    return TargetTBox(
        graph=graph,
        prefix=prefix,
        dimensions=dimensions,
        cubes=cubes,
        levels={lv: frozenset(level_attributes.get(lv, ())) for lv in levels},
        level_ranges=level_ranges,
        attribute_update_types=update_types,
        attribute_ranges=attribute_ranges,
        rollup_ranges=rollup_ranges,
        measures=measures,
        datasets=datasets,
    )


def _warehouse_prefix(constructs) -> str:
    """Most common namespace among the declared constructs."""
    counts = Counter(namespace_of(iri) for iri in constructs if isinstance(iri, Iri))
    if not counts:
        return ""
    best = max(sorted(counts), key=lambda ns: counts[ns])
    return best


def _local(iri: Iri) -> str:
    from .namespaces import local_name

    return local_name(iri)


def validate_target_tbox(tbox: TargetTBox) -> list:
    """Structural diagnostics; empty list means the schema is well formed."""
    diagnostics = []
    for dim in sorted(tbox.dimensions, key=term_sort_key):
        schema = tbox.dimensions[dim]
        all_levels = [lv for lv in schema.levels if _local(lv) == "All"]
        if len(all_levels) != 1:
            diagnostics.append(f"dimension {dim!r} must have exactly one All level, found {len(all_levels)}")
        for lv in all_levels:
            if schema.levels[lv]:
                diagnostics.append(f"top level {lv!r} of {dim!r} must carry no attributes")

        # cycle check over the level order
        adjacency = {}
        for child, parent in schema.order:
            adjacency.setdefault(child, set()).add(parent)
        state = {}

        def visit(node, stack):
            state[node] = "active"
            for nxt in adjacency.get(node, ()):
                if state.get(nxt) == "active":
                    diagnostics.append(f"dimension {dim!r} has a cyclic level order through {nxt!r}")
                    return False
                if nxt not in state and not visit(nxt, stack):
                    return False
            state[node] = "done"
            return True

        acyclic = True
        for node in sorted(adjacency, key=term_sort_key):
            if node not in state:
                if not visit(node, []):
                    acyclic = False
                    break

        if acyclic and all_levels:
            top = all_levels[0]
            for node in sorted(adjacency, key=term_sort_key):
                frontier, seen = [node], set()
                reaches_all = False
                while frontier:
                    current = frontier.pop()
                    if current == top:
                        reaches_all = True
                        break
                    seen.add(current)
                    frontier.extend(n for n in adjacency.get(current, ()) if n not in seen)
                if not reaches_all:
                    diagnostics.append(f"level {node!r} of {dim!r} cannot reach the All level")

        for pair in schema.rollups:
            if pair not in schema.order:
                diagnostics.append(f"rollup on {pair!r} is not an edge of {dim!r}'s level order")

    level_to_dim = {}
    for dim, schema in tbox.dimensions.items():
        for lv in schema.levels:
            level_to_dim.setdefault(lv, set()).add(dim)
    for cube in sorted(tbox.cubes, key=term_sort_key):
        schema = tbox.cubes[cube]
        seen_dims = []
        for lv in sorted(schema.bottom_levels, key=term_sort_key):
            dims = level_to_dim.get(lv)
            if not dims:
                diagnostics.append(f"cube {cube!r} bottom level {lv!r} belongs to no dimension")
            else:
                seen_dims.append(min(dims, key=term_sort_key))
        if len(seen_dims) != len(set(seen_dims)):
            diagnostics.append(f"cube {cube!r} has two bottom levels from the same dimension")
        for measure in schema.measures:
            if not any(m == measure for m, _ in schema.aggregations):
                diagnostics.append(f"measure {measure!r} of {cube!r} has no aggregate function")
    return diagnostics


# ---------------------------------------------------------------------------
# TBox extraction from an ABox


def extract_tbox(abox: Graph) -> Graph:
    """Derive schema triples from instance data.

    Classes come from rdf:type objects; the taxonomy compares instance
    sets (strict containment -> subclass, equality -> equivalence,
    disjointness -> owl:disjointWith); predicates become object or
    datatype properties with observed domains and ranges.
    """
    if len(abox) == 0:
        raise SchemaError("cannot extract a TBox from an empty ABox")

    instances = {}
    for t in abox.match(None, RDF.type, None):
        instances.setdefault(t.object, set()).add(t.subject)

    out = []
    classes = sorted(instances, key=term_sort_key)
    for cls in classes:
        if isinstance(cls, (Iri, BlankNode)):
            out.append(Triple(cls, RDF.type, OWL.Class))

    for a in classes:
        for b in classes:
            if a == b or not isinstance(a, (Iri, BlankNode)) or not isinstance(b, (Iri, BlankNode)):
                continue
            ia, ib = instances[a], instances[b]
            if ia == ib:
                out.append(Triple(a, OWL.equivalentClass, b))
            elif ia < ib:
                out.append(Triple(a, RDFS.subClassOf, b))
            elif not (ia & ib):
                out.append(Triple(a, OWL.disjointWith, b))

    types_of = {}
    for t in abox.match(None, RDF.type, None):
        types_of.setdefault(t.subject, set()).add(t.object)

    predicates = sorted({t.predicate for t in abox if t.predicate != RDF.type}, key=term_sort_key)
    for p in predicates:
        uses = list(abox.match(None, p, None))
        literal_objects = [t for t in uses if isinstance(t.object, Literal)]
        resource_objects = [t for t in uses if not isinstance(t.object, Literal)]
        if literal_objects and resource_objects:
            logger.warning("property %r mixes literal and resource objects; treating as object property", p)
        if resource_objects:
            out.append(Triple(p, RDF.type, OWL.ObjectProperty))
            ranges = set()
            for t in resource_objects:
                ranges |= types_of.get(t.object, set())
            for r in sorted(ranges, key=term_sort_key):
                out.append(Triple(p, RDFS.range, r))
        else:
            out.append(Triple(p, RDF.type, OWL.DatatypeProperty))
            datatypes = {t.object.datatype for t in literal_objects if t.object.datatype}
            for dt in sorted(datatypes, key=term_sort_key):
                out.append(Triple(p, RDFS.range, dt))
        domains = set()
        for t in uses:
            domains |= types_of.get(t.subject, set())
        for d in sorted(domains, key=term_sort_key):
            if isinstance(d, (Iri, BlankNode)):
                out.append(Triple(p, RDFS.domain, d))
    return Graph(out)
