"""Graph-pattern evaluation: triple patterns combined with AND, OPT,
UNION, and FILTER, answered under set semantics.

The evaluator works on relations (a variable header plus a set of rows)
so that joins over bulk data stay cheap; ``None`` inside a row marks an
unbound variable, which is what OPT produces and what projection turns
into an explicit NULL.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Iterable, Optional

from . import expressions as ex
from .errors import ExpressionError, QueryError, UnboundVariableError
from .model import Graph, Iri, Literal, Term, Variable, term_sort_key
from .schema import properties_of

logger = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# Patterns


@dataclass(frozen=True, slots=True)
class TriplePattern:
    subject: object
    predicate: object
    object: object

    def __post_init__(self):
        if isinstance(self.subject, Literal):
            raise QueryError("triple pattern subject cannot be a literal")
        if not isinstance(self.predicate, (Iri, Variable)):
            raise QueryError("triple pattern predicate must be an IRI or variable")

    def components(self):
        return (self.subject, self.predicate, self.object)


@dataclass(frozen=True, slots=True)
class And:
    left: object
    right: object


@dataclass(frozen=True, slots=True)
class Opt:
    left: object
    right: object


@dataclass(frozen=True, slots=True)
class Union:
    left: object
    right: object


@dataclass(frozen=True, slots=True)
class Filter:
    pattern: object
    condition: object


QueryPattern = object


def and_all(patterns):
    """Left-deep AND chain; patterns must be non-empty."""
    patterns = list(patterns)
    result = patterns[0]
    for p in patterns[1:]:
        result = And(result, p)
    return result


def opt_chain(base, patterns):
    for p in patterns:
        base = Opt(base, p)
    return base


def pattern_variables(q) -> set:
    if isinstance(q, TriplePattern):
        return {c for c in q.components() if isinstance(c, Variable)}
    if isinstance(q, (And, Opt, Union)):
        return pattern_variables(q.left) | pattern_variables(q.right)
    if isinstance(q, Filter):
        return pattern_variables(q.pattern)
    raise QueryError(f"not a query pattern: {q!r}")


def triple_patterns_of(q) -> list:
    """Triple patterns in document order."""
    if isinstance(q, TriplePattern):
        return [q]
    if isinstance(q, (And, Opt, Union)):
        return triple_patterns_of(q.left) + triple_patterns_of(q.right)
    if isinstance(q, Filter):
        return triple_patterns_of(q.pattern)
    raise QueryError(f"not a query pattern: {q!r}")


# ---------------------------------------------------------------------------
# Filter conditions


class Condition:
    def satisfied(self, binding) -> bool:
        raise NotImplementedError


@dataclass(frozen=True, slots=True)
class ExpressionCondition(Condition):
    expression: object

    def satisfied(self, binding) -> bool:
        try:
            return ex.effective_boolean_value(ex.eval_expression(self.expression, binding))
        except ExpressionError:
            return False


@dataclass(frozen=True, slots=True)
class MembershipCondition(Condition):
    """?var IN {terms}; unbound variables never satisfy it."""

    var: Variable
    values: frozenset
    negate: bool = False

    def satisfied(self, binding) -> bool:
        value = binding.get(self.var)
        if value is None:
            return False
        return (value in self.values) != self.negate


@dataclass(frozen=True, slots=True)
class Conjunction(Condition):
    conditions: tuple

    def satisfied(self, binding) -> bool:
        return all(c.satisfied(binding) for c in self.conditions)


# ---------------------------------------------------------------------------
# Relations


class Relation:
    __slots__ = ("vars", "rows")

    def __init__(self, vars: tuple, rows):
        self.vars = vars
        self.rows = set(rows)

    def binding(self, row) -> dict:
        return {v: value for v, value in zip(self.vars, row) if value is not None}


def _match_triple_pattern(tp: TriplePattern, graph: Graph) -> Relation:
    s, p, o = tp.components()
    const_s = s if not isinstance(s, Variable) else None
    const_p = p if not isinstance(p, Variable) else None
    const_o = o if not isinstance(o, Variable) else None

    out_vars = []
    for c in (s, p, o):
        if isinstance(c, Variable) and c not in out_vars:
            out_vars.append(c)

    rows = set()
    for t in graph.match(const_s, const_p, const_o):
        seen = {}
        ok = True
        for c, value in zip((s, p, o), t):
            if isinstance(c, Variable):
                if c in seen and seen[c] != value:
                    ok = False
                    break
                seen[c] = value
        if ok:
            rows.add(tuple(seen[v] for v in out_vars))
    return Relation(tuple(out_vars), rows)


def _compatible(left_row, right_row, left_pos, right_pos):
    for lp, rp in zip(left_pos, right_pos):
        lv, rv = left_row[lp], right_row[rp]
        if lv is not None and rv is not None and lv != rv:
            return False
    return True


def _merge(left_row, right_row, left_rel, right_rel, out_vars, right_index):
    merged = list(left_row) + [None] * (len(out_vars) - len(left_row))
    for i, v in enumerate(out_vars):
        if merged[i] is None and v in right_index:
            merged[i] = right_row[right_index[v]]
    return tuple(merged)


def _join(left: Relation, right: Relation, keep_unmatched_left: bool) -> Relation:
    shared = [v for v in left.vars if v in right.vars]
    out_vars = tuple(left.vars) + tuple(v for v in right.vars if v not in left.vars)
    right_index = {v: i for i, v in enumerate(right.vars)}
    left_shared_pos = [left.vars.index(v) for v in shared]
    right_shared_pos = [right_index[v] for v in shared]

    pad = (None,) * (len(out_vars) - len(left.vars))
    rows = set()

    if not shared:
        for lr in left.rows:
            matched = False
            for rr in right.rows:
                rows.add(_merge(lr, rr, left, right, out_vars, right_index))
                matched = True
            if not matched and keep_unmatched_left:
                rows.add(tuple(lr) + pad)
        return Relation(out_vars, rows)

    buckets = {}
    partial_right = []
    for rr in right.rows:
        key = tuple(rr[i] for i in right_shared_pos)
        if None in key:
            partial_right.append(rr)
        else:
            buckets.setdefault(key, []).append(rr)

    for lr in left.rows:
        key = tuple(lr[i] for i in left_shared_pos)
        matched = False
        if None not in key:
            for rr in buckets.get(key, ()):
                rows.add(_merge(lr, rr, left, right, out_vars, right_index))
                matched = True
            candidates = partial_right
        else:
            candidates = list(right.rows)
        for rr in candidates:
            if _compatible(lr, rr, left_shared_pos, right_shared_pos):
                rows.add(_merge(lr, rr, left, right, out_vars, right_index))
                matched = True
        if not matched and keep_unmatched_left:
            rows.add(tuple(lr) + pad)
    return Relation(out_vars, rows)


def evaluate_pattern(q, graph: Graph) -> Relation:
    if isinstance(q, TriplePattern):
        return _match_triple_pattern(q, graph)
    if isinstance(q, And):
        return _join(evaluate_pattern(q.left, graph), evaluate_pattern(q.right, graph), False)
    if isinstance(q, Opt):
        return _join(evaluate_pattern(q.left, graph), evaluate_pattern(q.right, graph), True)
    if isinstance(q, Union):
        left = evaluate_pattern(q.left, graph)
        right = evaluate_pattern(q.right, graph)
        out_vars = tuple(left.vars) + tuple(v for v in right.vars if v not in left.vars)
        rows = set()
        for lr in left.rows:
            rows.add(tuple(lr) + (None,) * (len(out_vars) - len(left.vars)))
        right_index = {v: i for i, v in enumerate(right.vars)}
        for rr in right.rows:
            rows.add(tuple(rr[right_index[v]] if v in right_index else None for v in out_vars))
        return Relation(out_vars, rows)
    if isinstance(q, Filter):
        rel = evaluate_pattern(q.pattern, graph)
        rows = {row for row in rel.rows if q.condition.satisfied(rel.binding(row))}
        return Relation(rel.vars, rows)
    raise QueryError(f"not a query pattern: {q!r}")


# ---------------------------------------------------------------------------
# Projection


def execute_query(q, graph: Graph, header: Iterable) -> frozenset:
    """Evaluate the pattern and project each solution through the header.

    Header entries are variables or expressions over them. Solutions
    are sets (duplicates collapse). Unbound variables project to None;
    an expression over an unbound variable yields None in that column; a
    genuine type error drops the solution with a warning. Aggregate
    expressions group solutions by the header's plain variables.
    """
    header = list(header)
    q_vars = pattern_variables(q)
    for item in header:
        wanted = {item.var} if isinstance(item, ex.VarRef) else (
            {item} if isinstance(item, Variable) else ex.expression_variables(item)
        )
        missing = wanted - q_vars
        if missing:
            raise QueryError(f"header references variables absent from the pattern: {missing}")

    rel = evaluate_pattern(q, graph)
    plain_vars = [h for h in header if isinstance(h, Variable)]
    has_aggregate = any(
        not isinstance(h, Variable) and ex.contains_aggregate(h) for h in header
    )

    if has_aggregate:
        groups = {}
        for row in rel.rows:
            binding = rel.binding(row)
            key = tuple(binding.get(v) for v in plain_vars)
            groups.setdefault(key, []).append(binding)
        results = set()
        for key, bindings in groups.items():
            bindings.sort(key=lambda b: tuple(term_sort_key(b.get(v)) for v in sorted(rel.vars, key=lambda v: v.name)))
            out = []
            try:
                for item in header:
                    if isinstance(item, Variable):
                        out.append(key[plain_vars.index(item)])
                    else:
                        out.append(ex.eval_aggregate(item, bindings))
            except ExpressionError as error:
                logger.warning("dropping group %s: %s", key, error)
                continue
            results.add(tuple(out))
        return frozenset(results)

    results = set()
    for row in rel.rows:
        binding = rel.binding(row)
        out = []
        dropped = False
        for item in header:
            if isinstance(item, Variable):
                out.append(binding.get(item))
                continue
            try:
                out.append(ex.eval_expression(item, binding))
            except UnboundVariableError:
                out.append(None)
            except ExpressionError as error:
                logger.warning("dropping solution %s: %s", binding, error)
                dropped = True
                break
        if not dropped:
            results.add(tuple(out))
    return frozenset(results)


def sorted_results(results) -> list:
    return sorted(results, key=lambda row: tuple(term_sort_key(v) for v in row))


# ---------------------------------------------------------------------------
# Expression utilities over query patterns


def get_properties_from_expressions(stbox, exps) -> set:
    """Properties of the TBox that the expressions mention.

    ``stbox`` can be a Graph, a loaded target TBox, or a plain set of
    property IRIs.
    """
    if isinstance(stbox, (set, frozenset)):
        properties = set(stbox)
    elif isinstance(stbox, Graph):
        properties = properties_of(stbox)
    else:
        properties = properties_of(stbox.graph)
    used = set()
    for expr in exps:
        used |= ex.expression_iris(expr) & properties
    return used


def validate_expressions(exps, q, flag: int) -> list:
    """Swap property IRIs and query variables in expressions.

    flag=1 replaces each property IRI with the object variable of the
    triple pattern whose predicate it is; flag=0 replaces each variable
    with the predicate of the triple pattern whose object it is. A term
    with no matching triple pattern raises QueryError.
    """
    tps = triple_patterns_of(q)
    out = []
    for expr in exps:
        leaf_map = {}
        if flag == 1:
            for node in ex.walk(expr):
                if isinstance(node, ex.IriRef) and node not in leaf_map:
                    replacement = None
                    for tp in tps:
                        if tp.predicate == node.iri and isinstance(tp.object, Variable):
                            replacement = ex.VarRef(tp.object)
                            break
                    if replacement is None:
                        raise QueryError(
                            f"property {node.iri!r} has no matching triple pattern in the query"
                        )
                    leaf_map[node] = replacement
        elif flag == 0:
            for node in ex.walk(expr):
                if isinstance(node, ex.VarRef) and node not in leaf_map:
                    replacement = None
                    for tp in tps:
                        if tp.object == node.var and isinstance(tp.predicate, Iri):
                            replacement = ex.IriRef(tp.predicate)
                            break
                    if replacement is None:
                        raise QueryError(
                            f"variable ?{node.var.name} has no matching triple pattern in the query"
                        )
                    leaf_map[node] = replacement
        else:
            raise QueryError(f"flag must be 0 or 1, got {flag!r}")
        out.append(ex.transform(expr, leaf_map))
    return out
