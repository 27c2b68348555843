"""RDF term, triple, and graph model.

Graphs are immutable sets of triples; every mutation-style operation
returns a new graph, so instances are safe to share across threads.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Optional, Union

from .errors import RdfEtlError

_SCHEME_RE = re.compile(r"^[A-Za-z][A-Za-z0-9+.\-]*:")

XSD_STRING = "http://www.w3.org/2001/XMLSchema#string"
_RDF_TYPE = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type"


@dataclass(frozen=True, slots=True)
class Iri:
    value: str

    def __post_init__(self):
        if not _SCHEME_RE.match(self.value):
            raise RdfEtlError(f"IRI is not absolute: {self.value!r}")

    def __repr__(self):
        return f"<{self.value}>"


@dataclass(frozen=True, slots=True)
class BlankNode:
    label: str

    def __repr__(self):
        return f"_:{self.label}"


class Literal:
    """A literal carries either a datatype IRI or a language tag, never both.

    Plain literals are normalized to xsd:string so that equality used by
    joins and common-property comparison is purely lexical.
    """

    __slots__ = ("lexical", "datatype", "lang", "_hash")

    def __init__(self, lexical: str, datatype: Optional[Iri] = None, lang: Optional[str] = None):
        if lang is not None and datatype is not None:
            raise RdfEtlError("literal cannot carry both a language tag and a datatype")
        if lang is None and datatype is None:
            datatype = Iri(XSD_STRING)
        self.lexical = lexical
        self.datatype = datatype
        self.lang = lang
        self._hash = hash((lexical, datatype, lang))

    def __eq__(self, other):
        return (
            isinstance(other, Literal)
            and self.lexical == other.lexical
            and self.datatype == other.datatype
            and self.lang == other.lang
        )

    def __hash__(self):
        return self._hash

    def __repr__(self):
        if self.lang:
            return f'"{self.lexical}"@{self.lang}'
        return f'"{self.lexical}"^^{self.datatype!r}'


Term = Union[Iri, BlankNode, Literal]


@dataclass(frozen=True, slots=True)
class Variable:
    """Query variable; written ?name, disjoint from RDF terms."""

    name: str

    def __repr__(self):
        return f"?{self.name}"


@dataclass(frozen=True, slots=True)
class Triple:
    subject: Term
    predicate: Term
    object: Term

    def __post_init__(self):
        if isinstance(self.subject, Literal):
            raise RdfEtlError("triple subject cannot be a literal")
        if not isinstance(self.predicate, Iri):
            raise RdfEtlError("triple predicate must be an IRI")

    def __iter__(self):
        return iter((self.subject, self.predicate, self.object))


def term_sort_key(term):
    """Total order over terms (and None) for deterministic iteration."""
    if term is None:
        return (0, "", "", "")
    if isinstance(term, BlankNode):
        return (1, term.label, "", "")
    if isinstance(term, Iri):
        return (2, term.value, "", "")
    return (3, term.lexical, term.datatype.value if term.datatype else "", term.lang or "")


def triple_sort_key(t: Triple):
    return (term_sort_key(t.subject), term_sort_key(t.predicate), term_sort_key(t.object))


class Graph:
    """An immutable, order-insensitive set of triples.

    ``namespaces`` preserves the prefix table of the document the graph
    was parsed from; it does not participate in equality.
    """

    __slots__ = ("triples", "source_label", "namespaces", "_index")

    def __init__(
        self,
        triples: Iterable[Triple] = (),
        source_label: Optional[str] = None,
        namespaces: Optional[dict] = None,
    ):
        object.__setattr__(self, "triples", frozenset(triples))
        object.__setattr__(self, "source_label", source_label)
        object.__setattr__(self, "namespaces", dict(namespaces or {}))
        object.__setattr__(self, "_index", None)

    def __setattr__(self, name, value):
        raise AttributeError("Graph is immutable")

    def __len__(self) -> int:
        return len(self.triples)

    def __iter__(self) -> Iterator[Triple]:
        return iter(self.triples)

    def __contains__(self, triple: Triple) -> bool:
        return triple in self.triples

    def __eq__(self, other):
        return isinstance(other, Graph) and self.triples == other.triples

    def __hash__(self):
        return hash(self.triples)

    def __repr__(self):
        label = f" {self.source_label}" if self.source_label else ""
        return f"<Graph{label} ({len(self)} triples)>"

    # -- set algebra ---------------------------------------------------

    def union(self, other: "Graph") -> "Graph":
        return Graph(self.triples | other.triples, self.source_label, self.namespaces)

    def difference(self, other: "Graph") -> "Graph":
        return Graph(self.triples - other.triples, self.source_label, self.namespaces)

    def intersection(self, other: "Graph") -> "Graph":
        return Graph(self.triples & other.triples, self.source_label, self.namespaces)

    # -- access helpers ------------------------------------------------

    def _ensure_index(self):
        index = self._index
        if index is None:
            by_subject, by_predicate = {}, {}
            for t in self.triples:
                by_subject.setdefault(t.subject, []).append(t)
                by_predicate.setdefault(t.predicate, []).append(t)
            index = (by_subject, by_predicate)
            object.__setattr__(self, "_index", index)
        return index

    def match(self, subject=None, predicate=None, obj=None) -> Iterator[Triple]:
        """Triples matching the given constants; None is a wildcard."""
        by_subject, by_predicate = self._ensure_index()
        if subject is not None:
            candidates = by_subject.get(subject, ())
        elif predicate is not None:
            candidates = by_predicate.get(predicate, ())
        else:
            candidates = self.triples
        for t in candidates:
            if subject is not None and t.subject != subject:
                continue
            if predicate is not None and t.predicate != predicate:
                continue
            if obj is not None and t.object != obj:
                continue
            yield t

    def objects(self, subject=None, predicate=None) -> list:
        return [t.object for t in self.match(subject, predicate)]

    def subjects(self, predicate=None, obj=None) -> set:
        return {t.subject for t in self.match(None, predicate, obj)}

    def value(self, subject=None, predicate=None):
        """Single object value or None; smallest under term order if several."""
        values = self.objects(subject, predicate)
        if not values:
            return None
        return min(values, key=term_sort_key)

    def typed_subjects(self, cls: Term) -> set:
        return self.subjects(Iri(_RDF_TYPE), cls)

    def sorted_triples(self) -> list:
        return sorted(self.triples, key=triple_sort_key)

    def with_label(self, label: str) -> "Graph":
        return Graph(self.triples, label, self.namespaces)


EMPTY_GRAPH = Graph()


def graph_union(a: Graph, b: Graph) -> Graph:
    return a.union(b)


def graph_difference(a: Graph, b: Graph) -> Graph:
    return a.difference(b)


def _blank_signature(graph: Graph):
    """Blank node -> multiset-ish signature invariant under relabeling."""
    sig = {}
    for t in graph:
        for position, term in enumerate(t):
            if isinstance(term, BlankNode):
                others = tuple(
                    o if not isinstance(o, BlankNode) else BlankNode("*")
                    for i, o in enumerate(t)
                    if i != position
                )
                sig.setdefault(term, []).append((position, others))
    return {b: tuple(sorted(entries, key=repr)) for b, entries in sig.items()}


def _rename_blanks(graph: Graph, mapping) -> frozenset:
    def ren(term):
        return mapping.get(term, term) if isinstance(term, BlankNode) else term

    return frozenset(Triple(ren(t.subject), t.predicate, ren(t.object)) for t in graph)


def isomorphic(a: Graph, b: Graph) -> bool:
    """Graph equality up to a bijective relabeling of blank nodes.

    Exhaustive backtracking over signature-compatible candidates; meant
    for test-sized graphs, not bulk data.
    """
    if len(a) != len(b):
        return False
    sig_a, sig_b = _blank_signature(a), _blank_signature(b)
    blanks_a, blanks_b = sorted(sig_a, key=repr), sorted(sig_b, key=repr)
    if len(blanks_a) != len(blanks_b):
        return False
    if not blanks_a:
        return a.triples == b.triples

    candidates = {
        ba: [bb for bb in blanks_b if sig_a[ba] == sig_b[bb]] for ba in blanks_a
    }
    if any(not c for c in candidates.values()):
        return False

    target = b.triples

    def assign(i, mapping, used):
        if i == len(blanks_a):
            return _rename_blanks(a, mapping) == target
        ba = blanks_a[i]
        for bb in candidates[ba]:
            if bb in used:
                continue
            mapping[ba] = bb
            if assign(i + 1, mapping, used | {bb}):
                return True
            del mapping[ba]
        return False

    return assign(0, {}, frozenset())
