"""Restricted Turtle reader for hand-authored TBox and mapping files.

Supported syntax: @prefix/PREFIX declarations, prefixed names, the 'a'
keyword, ';' and ',' abbreviations, string/numeric/boolean literals
(with optional @lang or ^^datatype), labelled blank nodes, and bracketed
blank-node property lists as objects (the ``qb:component [...]`` idiom).
Collections and the remaining Turtle grammar are intentionally out.
"""

from __future__ import annotations

import re

from .errors import RdfSyntaxError
from .model import BlankNode, Graph, Iri, Literal, Triple
from .namespaces import RDF, XSD
from .ntriples import _unescape

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+|\#[^\n]*)
  | (?P<iriref><[^<>"{}|^`\\\x00-\x20]*>)
  | (?P<string>"(?:[^"\\\n\r]|\\.)*")
  | (?P<prefix_decl>@prefix\b|(?i:PREFIX)\b)
  | (?P<langtag>@[a-zA-Z]+(?:-[a-zA-Z0-9]+)*)
  | (?P<dtype>\^\^)
  | (?P<blank>_:[A-Za-z0-9][A-Za-z0-9_\-.]*)
  | (?P<number>[+-]?(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)
  | (?P<pname>(?:[A-Za-z][A-Za-z0-9_\-.]*?)?:(?:[A-Za-z0-9_](?:[A-Za-z0-9_\-.]*[A-Za-z0-9_\-])?)?)
  | (?P<kw_a>a\b)
  | (?P<boolean>true\b|false\b)
  | (?P<punct>[.;,\[\]])
    """,
    re.VERBOSE,
)


class _Tokens:
    def __init__(self, text: str, source=None):
        self.text = text
        self.source = source
        self.pos = 0
        self.tokens = []
        self._tokenize()
        self.index = 0

    def _line(self, pos: int) -> int:
        return self.text.count("\n", 0, pos) + 1

    def _tokenize(self):
        pos = 0
        while pos < len(self.text):
            m = _TOKEN_RE.match(self.text, pos)
            if not m:
                raise RdfSyntaxError(
                    f"unexpected character {self.text[pos]!r}", self._line(pos), self.source
                )
            pos = m.end()
            if m.lastgroup != "ws":
                self.tokens.append((m.lastgroup, m.group(), m.start()))

    def peek(self):
        return self.tokens[self.index] if self.index < len(self.tokens) else (None, None, len(self.text))

    def next(self):
        token = self.peek()
        self.index += 1
        return token

    def expect(self, kind, value=None):
        got_kind, got_value, pos = self.next()
        if got_kind != kind or (value is not None and got_value != value):
            want = value or kind
            raise RdfSyntaxError(
                f"expected {want!r}, found {got_value!r}", self._line(pos), self.source
            )
        return got_value, pos

    def error(self, message, pos):
        raise RdfSyntaxError(message, self._line(pos), self.source)


class _TurtleParser:
    def __init__(self, text: str, source=None):
        self.tokens = _Tokens(text, source)
        self.prefixes = {}
        self.triples = []
        self.blanks = {}
        self.anon_count = 0

    # -- terms ---------------------------------------------------------

    def _blank(self, label: str) -> BlankNode:
        node = self.blanks.get(label)
        if node is None:
            node = BlankNode(f"b{self.anon_count}")
            self.anon_count += 1
            self.blanks[label] = node
        return node

    def _fresh_blank(self) -> BlankNode:
        node = BlankNode(f"b{self.anon_count}")
        self.anon_count += 1
        return node

    def _resolve_pname(self, pname: str, pos: int) -> Iri:
        prefix, _, local = pname.partition(":")
        if prefix not in self.prefixes:
            self.tokens.error(f"unknown prefix {prefix!r}", pos)
        return Iri(self.prefixes[prefix] + local)

    def _number_literal(self, text: str) -> Literal:
        if "e" in text.lower():
            return Literal(text, datatype=XSD.double)
        if "." in text:
            return Literal(text, datatype=XSD.decimal)
        return Literal(text, datatype=XSD.integer)

    def parse_term(self, *, as_subject=False, as_predicate=False):
        kind, value, pos = self.tokens.next()
        if kind == "iriref":
            return Iri(_unescape(value[1:-1], self.tokens._line(pos), self.tokens.source))
        if kind == "pname":
            return self._resolve_pname(value, pos)
        if kind == "kw_a":
            if as_subject or as_predicate:
                return RDF.type if as_predicate else self.tokens.error("'a' cannot be a subject", pos)
            return RDF.type
        if as_predicate:
            self.tokens.error(f"predicate must be an IRI, found {value!r}", pos)
        if kind == "blank":
            return self._blank(value[2:])
        if as_subject:
            self.tokens.error(f"invalid subject {value!r}", pos)
        if kind == "string":
            lex = _unescape(value[1:-1], self.tokens._line(pos), self.tokens.source)
            nk, nv, npos = self.tokens.peek()
            if nk == "dtype":
                self.tokens.next()
                dtype = self.parse_term(as_predicate=True)
                return Literal(lex, datatype=dtype)
            if nk == "langtag":
                self.tokens.next()
                return Literal(lex, lang=nv[1:])
            return Literal(lex)
        if kind == "number":
            return self._number_literal(value)
        if kind == "boolean":
            return Literal(value, datatype=XSD.boolean)
        if kind == "punct" and value == "[":
            node = self._fresh_blank()
            self.parse_predicate_object_list(node)
            self.tokens.expect("punct", "]")
            return node
        self.tokens.error(f"unexpected token {value!r}", pos)

    # -- statements ----------------------------------------------------

    def parse_predicate_object_list(self, subject):
        while True:
            predicate = self.parse_term(as_predicate=True)
            while True:
                obj = self.parse_term()
                self.triples.append(Triple(subject, predicate, obj))
                kind, value, _ = self.tokens.peek()
                if kind == "punct" and value == ",":
                    self.tokens.next()
                    continue
                break
            kind, value, _ = self.tokens.peek()
            if kind == "punct" and value == ";":
                self.tokens.next()
                # trailing ';' before '.' or ']' is tolerated
                kind, value, _ = self.tokens.peek()
                if kind == "punct" and value in (".", "]"):
                    break
                continue
            break

    def parse_prefix_decl(self, keyword: str):
        name, pos = self.tokens.expect("pname")
        if not name.endswith(":") or name.count(":") != 1:
            self.tokens.error(f"bad prefix declaration {name!r}", pos)
        iri, ipos = self.tokens.expect("iriref")
        self.prefixes[name[:-1]] = _unescape(iri[1:-1], 0, self.tokens.source)
        if keyword == "@prefix":
            self.tokens.expect("punct", ".")

    def parse(self) -> Graph:
        while True:
            kind, value, pos = self.tokens.peek()
            if kind is None:
                break
            if kind == "prefix_decl":
                self.tokens.next()
                self.parse_prefix_decl(value.lower())
                continue
            subject = self.parse_term(as_subject=True)
            self.parse_predicate_object_list(subject)
            self.tokens.expect("punct", ".")
        return Graph(self.triples, source_label=self.tokens.source, namespaces=self.prefixes)


def parse_turtle_subset(data, source_label=None) -> Graph:
    """Parse the restricted Turtle subset into a Graph.

    The resulting graph keeps the document's prefix table in
    ``Graph.namespaces`` so expression strings stored as literals can be
    resolved later.
    """
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    return _TurtleParser(data, source_label).parse()


def read_turtle_file(path) -> Graph:
    with open(path, "rb") as handle:
        return parse_turtle_subset(handle.read(), source_label=str(path))


def read_rdf_file(path) -> Graph:
    """Dispatch on extension: .ttl via the Turtle subset, else N-Triples."""
    from .ntriples import read_ntriples_file

    if str(path).endswith((".ttl", ".turtle")):
        return read_turtle_file(path)
    return read_ntriples_file(path)
