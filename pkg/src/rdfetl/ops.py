"""Execution-layer operations.

Every operation consumes graphs plus concept-mapping metadata and
materializes its result; the optional ``output_path`` writes the result
as N-Triples so downstream steps can pick it up, matching the
intermediate-result contract of generated flows.
"""

from __future__ import annotations

import datetime
import logging
import os
from typing import Iterable, Optional

from . import expressions as ex
from .errors import OperationError
from .iri import IriGraph, generate_iri, update_iri, validate_iri_value
from .mapping import mapped_source_instances, instance_type_predicate, tuples_to_triples
from .model import (
    BlankNode,
    Graph,
    Iri,
    Literal,
    Triple,
    Variable,
    graph_difference,
    graph_union,
    term_sort_key,
)
from .namespaces import OWL, QB, QB4O, RDF, local_name
from .ntriples import write_ntriples_file
from .query import (
    And,
    Filter,
    MembershipCondition,
    Opt,
    TriplePattern,
    execute_query,
    get_properties_from_expressions,
    validate_expressions,
)
from .schema import TargetTBox

logger = logging.getLogger(__name__)

DEFAULT_CHUNK_SIZE = 500_000


def _materialize(graph: Graph, output_path) -> Graph:
    if output_path is not None:
        os.makedirs(os.path.dirname(os.path.abspath(output_path)) or ".", exist_ok=True)
        write_ntriples_file(graph, output_path)
        return graph.with_label(str(output_path))
    return graph


def primary_source_property(expr, properties=None) -> Optional[Iri]:
    """First property IRI an expression mentions (its carrier column)."""
    for node in ex.walk(expr):
        if isinstance(node, ex.IriRef):
            if properties is None or node.iri in properties:
                return node.iri
    return None


# ---------------------------------------------------------------------------
# GraphExtractor


def graph_extractor(q, graph: Graph, output_pattern: Iterable, tabox_path=None) -> Graph:
    """Instantiate the output triple patterns once per solution of q,
    keeping only well-formed triples (bound, non-literal subject)."""
    output_pattern = list(output_pattern)
    variables = []
    for tp in output_pattern:
        for component in tp.components():
            if isinstance(component, Variable) and component not in variables:
                variables.append(component)
    rows = execute_query(q, graph, variables)
    triples = set()
    for row in rows:
        binding = dict(zip(variables, row))
        for tp in output_pattern:
            s, p, o = (
                binding.get(c) if isinstance(c, Variable) else c for c in tp.components()
            )
            if s is None or p is None or o is None:
                continue
            if isinstance(s, Literal) or not isinstance(p, Iri):
                continue
            triples.add(Triple(s, p, o))
    return _materialize(Graph(triples), tabox_path)


# ---------------------------------------------------------------------------
# TransformationOnLiteral


def _instance_pattern(construct: Iri, properties, type_predicate):
    """(?i, type, construct) with one optional pattern per property.

    Returns the pattern and the instance variable. Dedicated variables
    per property are what lets validate_expressions swap properties for
    variables.
    """
    i = Variable("i")
    pattern = TriplePattern(i, type_predicate, construct)
    for n, prop in enumerate(sorted(properties, key=term_sort_key)):
        pattern = Opt(pattern, TriplePattern(i, prop, Variable(f"v{n}")))
    return pattern, i


def transformation_on_literal(
    s_construct: Iri,
    t_construct: Iri,
    stbox: Graph,
    sabox: Graph,
    pms,
    tabox_path=None,
) -> Graph:
    """Resolve the mapped source expressions over each instance of the
    source construct and emit the transformed instances."""
    elements = [pm.source_as_expression() for pm in pms]
    properties = get_properties_from_expressions(stbox, elements)
    pattern, i = _instance_pattern(
        s_construct, properties, instance_type_predicate(s_construct, stbox)
    )
    validated = validate_expressions(elements, pattern, 1)
    rows = execute_query(pattern, sabox, [i] + validated)
    out = tuples_to_triples(rows, t_construct, pattern, pms, (i, *validated))
    return _materialize(out, tabox_path)


# ---------------------------------------------------------------------------
# JoinTransformation


def extract_instance_triples(construct: Iri, abox: Graph) -> Graph:
    """All triples whose subject is typed as the construct."""
    subjects = abox.typed_subjects(construct)
    triples = [t for s in subjects for t in abox.match(s, None, None)]
    return Graph(triples)


def join_transformation(
    s_construct: Iri,
    t_construct: Iri,
    stbox: Graph,
    ttbox: Graph,
    sabox: Graph,
    tabox: Graph,
    com_props,
    pms,
    relation,
    output_path=None,
) -> Graph:
    """Join the two constructs on their common properties and emit the
    target construct rebuilt from the mapped expressions.

    The relation picks the preserved operand: natural join keeps
    matches only, a right outer join preserves the target side, a left
    outer join preserves the source side.
    """
    from .mapping import RelationKind

    if not relation.is_join:
        raise OperationError(f"{relation} is not a join relation")
    if not com_props:
        raise OperationError("join transformation requires common properties")

    elements = [pm.source_as_expression() for pm in pms]
    t_props = get_properties_from_expressions(ttbox, elements)
    s_props = get_properties_from_expressions(stbox, elements)

    i_t, i_s = Variable("i_t"), Variable("i_s")

    def side(instance_var, construct, join_predicates, properties, offset):
        pattern = TriplePattern(instance_var, RDF.type, construct)
        for n, pair_predicate in enumerate(join_predicates):
            pattern = And(pattern, TriplePattern(instance_var, pair_predicate, Variable(f"j{n}")))
        for n, prop in enumerate(sorted(properties, key=term_sort_key)):
            pattern = Opt(pattern, TriplePattern(instance_var, prop, Variable(f"v{offset}{n}")))
        return pattern

    q_t = side(i_t, t_construct, [cp.target_property for cp in com_props], t_props, "t")
    q_s = side(i_s, s_construct, [cp.source_property for cp in com_props], s_props, "s")

    if relation == RelationKind.NATURAL_JOIN:
        combined, instance = And(q_t, q_s), i_t
    elif relation == RelationKind.RIGHT_OUTER_JOIN:
        combined, instance = Opt(q_t, q_s), i_t
    else:
        combined, instance = Opt(q_s, q_t), i_s

    data = graph_union(
        extract_instance_triples(t_construct, tabox), extract_instance_triples(s_construct, sabox)
    )
    validated = validate_expressions(elements, combined, 1)
    rows = execute_query(combined, data, [instance] + validated)
    out = tuples_to_triples(rows, t_construct, combined, pms, (instance, *validated))
    return _materialize(out, output_path)


# ---------------------------------------------------------------------------
# Level members and observations


def _iter_subject_chunks(sabox: Graph, chunk_size):
    if chunk_size is None or len(sabox) <= chunk_size:
        yield sabox
        return
    by_subject = {}
    for t in sabox:
        by_subject.setdefault(t.subject, []).append(t)
    chunk, count = [], 0
    for subject in sorted(by_subject, key=term_sort_key):
        chunk.extend(by_subject[subject])
        count += len(by_subject[subject])
        if count >= chunk_size:
            yield Graph(chunk)
            chunk, count = [], 0
    if chunk:
        yield Graph(chunk)


def _eval_over_pairs(expr, pairs):
    leaf_map = {}
    for node in ex.walk(expr):
        if isinstance(node, ex.IriRef):
            value = next((v for p, v in sorted(pairs, key=lambda pv: term_sort_key(pv[1]))
                          if p == node.iri), None)
            if value is None:
                raise OperationError(f"instance lacks property {node.iri!r} needed by an expression")
            leaf_map[node] = ex.Const(value)
    return ex.eval_expression(ex.transform(expr, leaf_map), {})


def _iri_rule_properties(iri_rule) -> set:
    """Properties the IRI rule reads; they must survive into the mapped
    instance pairs even when no property-mapping mentions them."""
    if iri_rule.kind == iri_rule.PROPERTY:
        return {iri_rule.property}
    if iri_rule.kind == iri_rule.EXPRESSION:
        return ex.expression_iris(iri_rule.expression)
    return set()


def _resolve_iri_value(instance, pairs, iri_rule, ig: IriGraph, construct: Iri):
    """The paper's resolve(): property value, expression value, or the
    next per-construct counter, zero-padded like '_01'."""
    if iri_rule.kind == iri_rule.PROPERTY:
        for prop, value in sorted(pairs, key=lambda pv: term_sort_key(pv[0])):
            if prop == iri_rule.property:
                return value
        raise OperationError(
            f"IRI-value property {iri_rule.property!r} missing from instance {instance!r}"
        )
    if iri_rule.kind == iri_rule.EXPRESSION:
        return _eval_over_pairs(iri_rule.expression, pairs)
    if iri_rule.kind == iri_rule.INCREMENTAL:
        return Literal(f"_{ig.next_counter(construct):02d}")
    raise OperationError(f"cannot resolve IRI rule {iri_rule.kind}")


def _short_value(term) -> Literal:
    """iriValue(v): literals pass through, IRIs keep their last portion."""
    if isinstance(term, Literal):
        return term
    if isinstance(term, Iri):
        return Literal(local_name(term))
    raise OperationError(f"cannot derive an IRI value from {term!r}")


def _effective_pairs(pairs, pms, stbox_properties):
    """Associate each property-mapping with its value for one instance.

    Property mappings read the matching (p, v) pairs directly;
    expression mappings are evaluated over the pairs and keyed by the
    expression's carrier property.
    """
    out = []
    for pm in pms:
        if pm.source_kind == "property":
            for prop, value in sorted(pairs, key=lambda pv: term_sort_key(pv[1])):
                if prop == pm.source_property:
                    out.append((pm, value))
        else:
            try:
                out.append((pm, _eval_over_pairs(pm.source_expression, pairs)))
            except OperationError:
                continue
    return out


def _generated_member_iri(ig, ttbox, instance, pairs, iri_rule, level, clock=None):
    if iri_rule.kind == iri_rule.SAME_AS_SOURCE:
        return instance
    t_type = ttbox.level_ranges.get(level, level)
    namespace = t_type.value if ttbox.is_construct(t_type) else ttbox.prefix.rstrip("#/")
    existing = ig.lookup(instance, namespace)
    if existing is not None:
        return existing
    value = _resolve_iri_value(instance, pairs, iri_rule, ig, level)
    return generate_iri(instance, value, t_type, ttbox, ig)


def level_member_generator(
    s_construct: Iri,
    level: Iri,
    stbox: Graph,
    sabox: Graph,
    ttbox: TargetTBox,
    iri_rule,
    ig: IriGraph,
    pms,
    tabox_path=None,
    chunk_size=DEFAULT_CHUNK_SIZE,
) -> Graph:
    """Populate a dimension level: identity triples per instance plus
    one description triple per mapped property value."""
    stbox_props = get_properties_from_expressions(
        stbox, [pm.source_as_expression() for pm in pms]
    )
    extra = _iri_rule_properties(iri_rule)
    triples = []
    for chunk in _iter_subject_chunks(sabox, chunk_size):
        instances = mapped_source_instances(s_construct, stbox, chunk, pms, extra)
        for instance in sorted(instances, key=term_sort_key):
            pairs = instances[instance]
            member = _generated_member_iri(ig, ttbox, instance, pairs, iri_rule, level)
            triples.append(Triple(member, RDF.type, QB4O.LevelMember))
            triples.append(Triple(member, QB4O.memberOf, level))
            for pm, value in _effective_pairs(pairs, pms, stbox_props):
                types = set(ttbox.graph.objects(pm.target_property, RDF.type))
                if QB4O.RollupProperty in types or OWL.ObjectProperty in types:
                    target_range = ttbox.range_of(pm.target_property) or pm.target_property
                    obj = generate_iri(value, _short_value(value), target_range, ttbox, ig)
                else:
                    # level attributes (and anything datatype-like) copy the value
                    obj = value
                triples.append(Triple(member, pm.target_property, obj))
    return _materialize(Graph(triples), tabox_path)


def observation_generator(
    s_construct: Iri,
    dataset: Iri,
    stbox: Graph,
    sabox: Graph,
    ttbox: TargetTBox,
    iri_rule,
    ig: IriGraph,
    pms,
    tabox_path=None,
    chunk_size=DEFAULT_CHUNK_SIZE,
) -> Graph:
    """Populate a cube dataset: one observation per source instance,
    linking level members and copying measure values."""
    stbox_props = get_properties_from_expressions(
        stbox, [pm.source_as_expression() for pm in pms]
    )
    extra = _iri_rule_properties(iri_rule)
    namespace = dataset.value if ttbox.is_construct(dataset) else ttbox.prefix.rstrip("#/")
    triples = []
    for chunk in _iter_subject_chunks(sabox, chunk_size):
        instances = mapped_source_instances(s_construct, stbox, chunk, pms, extra)
        for instance in sorted(instances, key=term_sort_key):
            pairs = instances[instance]
            if iri_rule.kind == iri_rule.SAME_AS_SOURCE:
                obs = instance
            else:
                obs = ig.lookup(instance, namespace)
                if obs is None:
                    value = _resolve_iri_value(instance, pairs, iri_rule, ig, dataset)
                    obs = generate_iri(instance, value, dataset, ttbox, ig)
            triples.append(Triple(obs, RDF.type, QB.Observation))
            triples.append(Triple(obs, QB.dataset, dataset))
            for pm, value in _effective_pairs(pairs, pms, stbox_props):
                kind = ttbox.construct_kind(pm.target_property)
                if kind == "level":
                    target_range = ttbox.range_of(pm.target_property) or pm.target_property
                    obj = generate_iri(value, _short_value(value), target_range, ttbox, ig)
                elif kind == "measure":
                    obj = value
                else:
                    raise OperationError(
                        f"target property {pm.target_property!r} of an observation must be "
                        f"a level or a measure, got {kind}"
                    )
                triples.append(Triple(obs, pm.target_property, obj))
    return _materialize(Graph(triples), tabox_path)


# ---------------------------------------------------------------------------
# ChangedDataCapture


def changed_data_capture(nabox: Graph, oabox: Graph, flag: int, output_path=None) -> Graph:
    """flag=0: descriptions of instances new in nabox. flag=1: triples of
    existing instances whose values changed."""
    new_subjects = {t.subject for t in nabox.match(None, RDF.type, None)} - {
        t.subject for t in oabox.match(None, RDF.type, None)
    }
    new_descriptions = Graph(
        t for s in new_subjects for t in nabox.match(s, None, None)
    )
    if flag == 0:
        return _materialize(new_descriptions, output_path)
    if flag != 1:
        raise OperationError(f"flag must be 0 or 1, got {flag!r}")
    changed = graph_difference(graph_difference(nabox, new_descriptions), oabox)
    return _materialize(changed, output_path)


# ---------------------------------------------------------------------------
# UpdateLevel


def _scd_properties(ttbox: TargetTBox):
    prefix = ttbox.prefix
    return Iri(prefix + "fromDate"), Iri(prefix + "toDate"), Iri(prefix + "status")


def _target_property_of(source_property: Iri, pms) -> Iri:
    for pm in pms:
        if pm.source_kind == "property" and pm.source_property == source_property:
            return pm.target_property
        if pm.source_kind == "expression":
            carrier = primary_source_property(pm.source_expression)
            if carrier == source_property:
                return pm.target_property
    raise OperationError(f"changed property {source_property!r} is not mapped")


def _replace_value(current, old_value, new_value):
    """Eq-style replace over the lexical form; whole-object replacement
    when the old value is not a substring of the current one."""
    new_text = new_value.lexical if isinstance(new_value, Literal) else new_value.value
    if current is None:
        return new_value
    old_text = old_value.lexical if isinstance(old_value, Literal) else old_value.value
    if isinstance(current, Literal):
        if old_text and old_text in current.lexical:
            return Literal(
                current.lexical.replace(old_text, new_text),
                datatype=None if current.lang else current.datatype,
                lang=current.lang,
            )
        return new_value
    if isinstance(current, Iri) and old_text and old_text in current.value:
        return Iri(current.value.replace(old_text, new_text))
    return new_value


def _member_iri(instance, ig: IriGraph, ttbox: TargetTBox, level: Iri, tabox: Graph):
    for namespace in (level.value, (ttbox.level_ranges.get(level) or level).value):
        found = ig.lookup(instance, namespace)
        if found is not None:
            return found
    found = ig.lookup(instance)
    if found is not None:
        return found
    return instance


def update_level(
    level: Iri,
    updated_triples: Graph,
    sabox: Graph,
    ttbox: TargetTBox,
    tabox: Graph,
    pms,
    ig: IriGraph,
    clock,
    tabox_path=None,
) -> Graph:
    """Apply source-side changes to the level's members.

    Per changed property the attribute's update type decides: Type1
    overwrites, Type3 overwrites and keeps the previous value under
    <property>_oldValue, Type2 expires the current version, mints a
    dated new version, and recursively re-versions every lower-level
    member that referenced the old one.
    """
    from_date, to_date, status = _scd_properties(ttbox)
    bookkeeping = {from_date, to_date, status}
    today = clock.today()
    today_text = today.isoformat()
    yesterday_text = (today - datetime.timedelta(days=1)).isoformat()

    changes = {}
    for t in sorted(updated_triples, key=lambda t: term_sort_key(t.subject)):
        old_value = sabox.value(t.subject, t.predicate)
        changes.setdefault(t.subject, []).append((t.predicate, t.object, old_value))

    deletes, inserts = set(), set()
    versioned = {}

    def target_value(member, prop):
        return tabox.value(member, prop)

    def expire(member, changed_targets):
        deletes.update(tabox.match(member, to_date, None))
        deletes.update(tabox.match(member, status, None))
        if tabox.value(member, from_date) is None:
            inserts.add(Triple(member, from_date, Literal("0000-00-00")))
        inserts.add(Triple(member, to_date, Literal(yesterday_text)))
        inserts.add(Triple(member, status, Literal("Expired")))
        new_member = versioned.get(member)
        if new_member is None:
            new_member = update_iri(member, ig, clock)
            versioned[member] = new_member
        inserts.add(Triple(new_member, from_date, Literal(today_text)))
        inserts.add(Triple(new_member, to_date, Literal("9999-12-31")))
        inserts.add(Triple(new_member, status, Literal("Current")))
        for t in tabox.match(member, None, None):
            if t.predicate in bookkeeping or t.predicate in changed_targets:
                continue
            inserts.add(Triple(new_member, t.predicate, t.object))
        cascade(member, new_member)
        return new_member

    def cascade(old_member, new_member):
        associates = {}
        for t in tabox.match(None, None, old_member):
            if Triple(t.subject, RDF.type, QB4O.LevelMember) in tabox:
                associates.setdefault(t.subject, set()).add(t.predicate)
        for child in sorted(associates, key=term_sort_key):
            links = associates[child]
            if child in versioned:
                new_child = versioned[child]
            else:
                new_child = expire(child, links)
            for link in sorted(links, key=term_sort_key):
                inserts.add(Triple(new_child, link, new_member))
                inserts.discard(Triple(new_child, link, old_member))

    for instance in sorted(changes, key=term_sort_key):
        member = _member_iri(instance, ig, ttbox, level, tabox)
        per_type = {1: [], 2: [], 3: []}
        for prop, new_value, old_value in changes[instance]:
            target_prop = _target_property_of(prop, pms)
            update_type = ttbox.update_type_of(target_prop)
            per_type[update_type].append((target_prop, new_value, old_value))

        for target_prop, new_value, old_value in per_type[1]:
            current = target_value(member, target_prop)
            deletes.update(tabox.match(member, target_prop, None))
            inserts.add(Triple(member, target_prop, _replace_value(current, old_value, new_value)))

        for target_prop, new_value, old_value in per_type[3]:
            current = target_value(member, target_prop)
            old_prop = Iri(target_prop.value + "_oldValue")
            deletes.update(tabox.match(member, target_prop, None))
            deletes.update(tabox.match(member, old_prop, None))
            inserts.add(Triple(member, target_prop, _replace_value(current, old_value, new_value)))
            if current is not None:
                inserts.add(Triple(member, old_prop, current))

        if per_type[2]:
            if (
                Literal("Expired") in tabox.objects(member, status)
                and Literal("Current") not in tabox.objects(member, status)
            ):
                raise OperationError(f"member {member!r} has no current version to update")
            changed_targets = {target_prop for target_prop, _, _ in per_type[2]}
            new_member = expire(member, changed_targets)
            for target_prop, new_value, old_value in per_type[2]:
                current = target_value(member, target_prop)
                inserts.add(
                    Triple(new_member, target_prop, _replace_value(current, old_value, new_value))
                )

    result = graph_union(graph_difference(tabox, Graph(deletes)), Graph(inserts))
    return _materialize(result, tabox_path)


# ---------------------------------------------------------------------------
# ExternalLinking


def _semantic_bag(graph: Graph, subject) -> frozenset:
    tokens = set()
    for t in graph.match(subject, None, None):
        if isinstance(t.object, Literal):
            tokens.update(t.object.lexical.lower().split())
    return frozenset(tokens)


def external_linking(sabox: Graph, external_kb: Graph, top_k: int, theta: float) -> Graph:
    """Link internal resources to external ones whose token bags have a
    Jaccard similarity above theta; candidates are the top-k external
    subjects sharing at least one token."""
    if not 0.0 <= theta <= 1.0:
        raise OperationError(f"theta must be within [0, 1], got {theta}")

    external_bags = {}
    token_index = {}
    for subject in external_kb.subjects():
        bag = _semantic_bag(external_kb, subject)
        if bag:
            external_bags[subject] = bag
            for token in bag:
                token_index.setdefault(token, set()).add(subject)

    links = []
    for subject in sorted(sabox.subjects(), key=term_sort_key):
        bag = _semantic_bag(sabox, subject)
        if not bag:
            continue
        shared_counts = {}
        for token in bag:
            for candidate in token_index.get(token, ()):
                shared_counts[candidate] = shared_counts.get(candidate, 0) + 1
        ranked = sorted(
            shared_counts, key=lambda c: (-shared_counts[c], term_sort_key(c))
        )[:top_k]
        for candidate in ranked:
            other = external_bags[candidate]
            jaccard = len(bag & other) / len(bag | other)
            if jaccard > theta:
                links.append(Triple(subject, OWL.sameAs, candidate))
    return graph_union(sabox, Graph(links))


# ---------------------------------------------------------------------------
# MaterializeInference


def materialize_inference(abox: Graph, tbox: Graph) -> Graph:
    """Fixed-point closure under a fixed rule subset: subclass
    transitivity and type propagation, subproperty propagation,
    domain/range typing, and owl:sameAs symmetry/transitivity with
    subject-side property copying. Never removes triples."""
    triples = set(abox) | set(tbox)

    def closure_pass(current):
        new = set()
        subclass = [(t.subject, t.object) for t in current if t.predicate == RDFS.subClassOf]
        subprop = [(t.subject, t.object) for t in current if t.predicate == RDFS.subPropertyOf]
        domains = [(t.subject, t.object) for t in current if t.predicate == RDFS.domain]
        ranges = [(t.subject, t.object) for t in current if t.predicate == RDFS.range]
        same = [(t.subject, t.object) for t in current if t.predicate == OWL.sameAs]

        sub_map = {}
        for child, parent in subclass:
            sub_map.setdefault(child, set()).add(parent)
        for child, parents in sub_map.items():
            for parent in parents:
                for grand in sub_map.get(parent, ()):
                    new.add(Triple(child, RDFS.subClassOf, grand))
        prop_map = {}
        for child, parent in subprop:
            prop_map.setdefault(child, set()).add(parent)

        domain_map, range_map = {}, {}
        for prop, cls in domains:
            domain_map.setdefault(prop, set()).add(cls)
        for prop, cls in ranges:
            range_map.setdefault(prop, set()).add(cls)

        same_pairs = set(same)
        for x, y in same:
            if not isinstance(y, Literal):
                new.add(Triple(y, OWL.sameAs, x))
        same_map = {}
        for x, y in same_pairs:
            same_map.setdefault(x, set()).add(y)
        for x, ys in same_map.items():
            for y in ys:
                for z in same_map.get(y, ()):
                    if z != x:
                        new.add(Triple(x, OWL.sameAs, z))

        for t in current:
            if t.predicate == RDF.type:
                for parent in sub_map.get(t.object, ()):
                    new.add(Triple(t.subject, RDF.type, parent))
            for parent_prop in prop_map.get(t.predicate, ()):
                if isinstance(parent_prop, Iri):
                    new.add(Triple(t.subject, parent_prop, t.object))
            for cls in domain_map.get(t.predicate, ()):
                new.add(Triple(t.subject, RDF.type, cls))
            if not isinstance(t.object, Literal):
                for cls in range_map.get(t.predicate, ()):
                    new.add(Triple(t.object, RDF.type, cls))
            for twin in same_map.get(t.subject, ()):
                if not isinstance(twin, Literal):
                    new.add(Triple(twin, t.predicate, t.object))
        return new - current

    while True:
        added = closure_pass(triples)
        if not added:
            break
        triples |= added
    return Graph(triples)


# ---------------------------------------------------------------------------
# Loader


def loader(triples: Graph, ts_path) -> "Store":
    """Merge the triples into the store at ts_path (created on demand)."""
    from .store import open_store

    store = open_store(ts_path)
    store.merge(triples)
    return store
