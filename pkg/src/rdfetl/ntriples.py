"""N-Triples reading and writing.

The serializer is canonical: one triple per line, lexicographically
sorted, fixed escaping. Equal graphs therefore serialize to identical
bytes, which the golden-file tests and the store's atomic rewrite rely
on.
"""

from __future__ import annotations

import re

from .errors import RdfSyntaxError
from .model import BlankNode, Graph, Iri, Literal, Triple

_IRIREF = r"<([^<>\"{}|^`\\\x00-\x20]*)>"
_BLANK = r"_:([A-Za-z0-9][A-Za-z0-9_\-.]*)"
_STRING = r'"((?:[^"\\\n\r]|\\.)*)"'
_LANGTAG = r"@([a-zA-Z]+(?:-[a-zA-Z0-9]+)*)"

_TERM_RE = re.compile(
    rf"\s*(?:{_IRIREF}|{_BLANK}|{_STRING}(?:\^\^{_IRIREF}|{_LANGTAG})?)"
)
_DOT_RE = re.compile(r"\s*\.\s*(?:#.*)?$")

_UNESCAPE_RE = re.compile(r"\\(?:u([0-9A-Fa-f]{4})|U([0-9A-Fa-f]{8})|(.))")
_ECHAR_DECODE = {"t": "\t", "b": "\b", "n": "\n", "r": "\r", "f": "\f", '"': '"', "'": "'", "\\": "\\"}


def _unescape(raw: str, line_no: int, source=None) -> str:
    def repl(m):
        if m.group(1):
            return chr(int(m.group(1), 16))
        if m.group(2):
            return chr(int(m.group(2), 16))
        ch = m.group(3)
        if ch not in _ECHAR_DECODE:
            raise RdfSyntaxError(f"invalid escape '\\{ch}'", line_no, source)
        return _ECHAR_DECODE[ch]

    return _UNESCAPE_RE.sub(repl, raw)


class _BlankScope:
    """Document-scoped blank labels, renamed _:bN in order of appearance."""

    def __init__(self):
        self.seen = {}

    def get(self, label: str) -> BlankNode:
        node = self.seen.get(label)
        if node is None:
            node = BlankNode(f"b{len(self.seen)}")
            self.seen[label] = node
        return node


def _parse_term(line: str, pos: int, line_no: int, blanks: _BlankScope, source):
    m = _TERM_RE.match(line, pos)
    if not m:
        raise RdfSyntaxError(f"expected RDF term at column {pos}", line_no, source)
    iri, blank, lexical, dtype, lang = m.groups()
    if iri is not None:
        try:
            term = Iri(_unescape(iri, line_no, source))
        except Exception as exc:
            raise RdfSyntaxError(str(exc), line_no, source)
    elif blank is not None:
        term = blanks.get(blank)
    else:
        lex = _unescape(lexical, line_no, source)
        if dtype:
            term = Literal(lex, datatype=Iri(_unescape(dtype, line_no, source)))
        elif lang:
            term = Literal(lex, lang=lang)
        else:
            term = Literal(lex)
    return term, m.end()


def parse_ntriples(data, source_label=None) -> Graph:
    """Parse N-Triples text (bytes or str) into a Graph.

    Duplicate statements collapse; blank labels are stable within the
    document. Raises RdfSyntaxError with a line number on bad input.
    """
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    blanks = _BlankScope()
    triples = []
    for line_no, line in enumerate(data.split("\n"), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        s, pos = _parse_term(line, 0, line_no, blanks, source_label)
        if isinstance(s, Literal):
            raise RdfSyntaxError("literal in subject position", line_no, source_label)
        p, pos = _parse_term(line, pos, line_no, blanks, source_label)
        if not isinstance(p, Iri):
            raise RdfSyntaxError("predicate must be an IRI", line_no, source_label)
        o, pos = _parse_term(line, pos, line_no, blanks, source_label)
        if not _DOT_RE.match(line, pos):
            raise RdfSyntaxError("missing terminating '.'", line_no, source_label)
        triples.append(Triple(s, p, o))
    return Graph(triples, source_label=source_label)


_ESCAPE_MAP = {
    "\\": "\\\\",
    '"': '\\"',
    "\n": "\\n",
    "\r": "\\r",
    "\t": "\\t",
    "\b": "\\b",
    "\f": "\\f",
}


def _escape(text: str) -> str:
    out = []
    for ch in text:
        if ch in _ESCAPE_MAP:
            out.append(_ESCAPE_MAP[ch])
        elif ord(ch) < 0x20:
            out.append(f"\\u{ord(ch):04X}")
        else:
            out.append(ch)
    return "".join(out)


def format_term(term) -> str:
    if isinstance(term, Iri):
        return f"<{_escape(term.value)}>"
    if isinstance(term, BlankNode):
        return f"_:{term.label}"
    if term.lang:
        return f'"{_escape(term.lexical)}"@{term.lang}'
    return f'"{_escape(term.lexical)}"^^<{_escape(term.datatype.value)}>'


def format_triple(t: Triple) -> str:
    return f"{format_term(t.subject)} {format_term(t.predicate)} {format_term(t.object)} ."


def serialize_ntriples(graph: Graph) -> bytes:
    """Canonical N-Triples bytes: sorted lines, deterministic escaping."""
    lines = sorted(format_triple(t) for t in graph)
    if not lines:
        return b""
    return ("\n".join(lines) + "\n").encode("utf-8")


def read_ntriples_file(path) -> Graph:
    with open(path, "rb") as handle:
        return parse_ntriples(handle.read(), source_label=str(path))


def write_ntriples_file(graph: Graph, path) -> None:
    with open(path, "wb") as handle:
        handle.write(serialize_ntriples(graph))
