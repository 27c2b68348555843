"""Independent reference implementations used to check the engine.

These deliberately avoid the production code paths: the query oracle
enumerates variable-to-term assignments at pattern leaves and combines
solution sets with naive quadratic loops; the inference oracle re-scans
the whole graph every pass.
"""

import itertools

from rdfetl.model import Iri, Literal, Triple, Variable
from rdfetl.namespaces import OWL, RDF, RDFS
from rdfetl.query import (
    And,
    ExpressionCondition,
    Filter,
    MembershipCondition,
    Opt,
    TriplePattern,
    Union,
)
from rdfetl import expressions as ex


def graph_terms(graph):
    terms = set()
    for t in graph:
        terms.update(t)
    return sorted(terms, key=repr)


def _leaf_solutions(tp, graph, universe):
    variables = sorted({c for c in tp.components() if isinstance(c, Variable)}, key=repr)
    solutions = set()
    for assignment in itertools.product(universe, repeat=len(variables)):
        mapping = dict(zip(variables, assignment))
        s, p, o = (
            mapping[c] if isinstance(c, Variable) else c for c in tp.components()
        )
        if isinstance(s, Literal) or not isinstance(p, Iri):
            continue
        if Triple(s, p, o) in graph:
            solutions.add(frozenset(mapping.items()))
    return solutions


def _compatible(m1, m2):
    d1, d2 = dict(m1), dict(m2)
    return all(d2[k] == v for k, v in d1.items() if k in d2)


def _check_condition(condition, mapping):
    values = dict(mapping)
    if isinstance(condition, MembershipCondition):
        value = values.get(condition.var)
        return value is not None and (value in condition.values) != condition.negate
    if isinstance(condition, ExpressionCondition):
        expr = condition.expression
        if isinstance(expr, ex.BinOp) and expr.op in ("=", "!="):
            left = _expr_value(expr.left, values)
            right = _expr_value(expr.right, values)
            if left is None or right is None:
                return False
            return (left == right) if expr.op == "=" else (left != right)
    raise AssertionError(f"oracle does not know condition {condition!r}")


def _expr_value(node, values):
    if isinstance(node, ex.VarRef):
        return values.get(node.var)
    if isinstance(node, ex.IriRef):
        return node.iri
    if isinstance(node, ex.Const):
        return node.term
    return None


def oracle_solutions(pattern, graph):
    """Set of solution mappings, each a frozenset of (variable, term)."""
    universe = graph_terms(graph)
    if isinstance(pattern, TriplePattern):
        return _leaf_solutions(pattern, graph, universe)
    if isinstance(pattern, And):
        left = oracle_solutions(pattern.left, graph)
        right = oracle_solutions(pattern.right, graph)
        return {
            frozenset(dict(list(m1) + list(m2)).items())
            for m1 in left
            for m2 in right
            if _compatible(m1, m2)
        }
    if isinstance(pattern, Opt):
        left = oracle_solutions(pattern.left, graph)
        right = oracle_solutions(pattern.right, graph)
        joined = {
            frozenset(dict(list(m1) + list(m2)).items())
            for m1 in left
            for m2 in right
            if _compatible(m1, m2)
        }
        unmatched = {m1 for m1 in left if not any(_compatible(m1, m2) for m2 in right)}
        return joined | unmatched
    if isinstance(pattern, Union):
        return oracle_solutions(pattern.left, graph) | oracle_solutions(pattern.right, graph)
    if isinstance(pattern, Filter):
        return {
            m for m in oracle_solutions(pattern.pattern, graph) if _check_condition(pattern.condition, m)
        }
    raise AssertionError(f"oracle does not know pattern {pattern!r}")


def engine_solutions(pattern, graph):
    from rdfetl.query import evaluate_pattern

    relation = evaluate_pattern(pattern, graph)
    return {
        frozenset((v, value) for v, value in zip(relation.vars, row) if value is not None)
        for row in relation.rows
    }


# ---------------------------------------------------------------------------
# Naive inference closure (full re-scan every pass)


def naive_inference_closure(abox, tbox):
    triples = set(abox) | set(tbox)
    while True:
        new = set()
        listing = list(triples)
        for a in listing:
            if a.predicate == RDFS.subClassOf:
                for b in listing:
                    if b.predicate == RDFS.subClassOf and b.subject == a.object:
                        new.add(Triple(a.subject, RDFS.subClassOf, b.object))
                    if b.predicate == RDF.type and b.object == a.subject:
                        new.add(Triple(b.subject, RDF.type, a.object))
            if a.predicate == RDFS.subPropertyOf and isinstance(a.object, Iri):
                for b in listing:
                    if b.predicate == a.subject:
                        new.add(Triple(b.subject, a.object, b.object))
            if a.predicate == RDFS.domain:
                for b in listing:
                    if b.predicate == a.subject:
                        new.add(Triple(b.subject, RDF.type, a.object))
            if a.predicate == RDFS.range:
                for b in listing:
                    if b.predicate == a.subject and not isinstance(b.object, Literal):
                        new.add(Triple(b.object, RDF.type, a.object))
            if a.predicate == OWL.sameAs:
                if not isinstance(a.object, Literal):
                    new.add(Triple(a.object, OWL.sameAs, a.subject))
                    for b in listing:
                        if b.predicate == OWL.sameAs and b.subject == a.object and b.object != a.subject:
                            new.add(Triple(a.subject, OWL.sameAs, b.object))
                        if b.subject == a.subject:
                            if not isinstance(a.object, Literal):
                                new.add(Triple(a.object, b.predicate, b.object))
        if new <= triples:
            return triples
        triples |= new
