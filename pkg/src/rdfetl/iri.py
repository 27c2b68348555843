"""Warehouse IRI minting, provenance tracking, and date versioning.

The IRI graph pairs every minted warehouse IRI with the source term it
was derived from, so re-runs reuse identical IRIs and SCD updates can
find the current version of a member. Incremental counters are kept per
target construct.
"""

from __future__ import annotations

import datetime
import re
from dataclasses import dataclass
from typing import Optional

from .errors import OperationError
from .model import Graph, Iri, Literal, Term, Triple, term_sort_key
from .namespaces import OWL, namespace_of


class SystemClock:
    def today(self) -> datetime.date:
        return datetime.date.today()


@dataclass(frozen=True)
class FixedClock:
    date: datetime.date

    def today(self) -> datetime.date:
        return self.date


def clock_from_string(text: str) -> FixedClock:
    return FixedClock(datetime.date.fromisoformat(text))


# Characters rewritten when a raw value becomes an IRI fragment.
_RESERVED = set(':/?#[]@!$&\'()*+,;=%"<>\\^`{|}')


def validate_iri_value(value: str) -> str:
    """Spaces become underscores; IRI-reserved characters are
    percent-encoded (UTF-8)."""
    out = []
    for ch in value.replace(" ", "_"):
        if ch in _RESERVED or ord(ch) < 0x20:
            out.extend(f"%{b:02X}" for b in ch.encode("utf-8"))
        else:
            out.append(ch)
    return "".join(out)


def _key_text(term) -> str:
    if isinstance(term, Iri):
        return term.value
    if isinstance(term, Literal):
        return term.lexical
    return repr(term)


class IriGraph:
    """Provenance table: (source term, target namespace) -> target IRI.

    Serializes to owl:sameAs triples plus a counters table; on reload
    the namespace key is recovered from each target IRI and the newest
    version of a lineage (the longest, lexicographically greatest IRI)
    wins the lookup.
    """

    def __init__(self):
        self._pairs = []  # (target Iri, source Term) in insertion order
        self._current = {}  # (source key text, namespace) -> Iri
        self._latest_version = {}  # replaced Iri -> replacement Iri
        self._source_of = {}  # target Iri -> (source Term, namespace)
        self.counters = {}  # construct Iri -> last issued int

    def __len__(self):
        return len(self._pairs)

    @staticmethod
    def _namespace_key(target: Iri) -> str:
        value = target.value
        if "#" in value:
            return value.rsplit("#", 1)[0]
        return namespace_of(target).rstrip("/#")

    def lookup(self, source, namespace: Optional[str] = None) -> Optional[Iri]:
        if source is None:
            return None
        key = _key_text(source)
        if namespace is not None:
            return self._current.get((key, namespace.rstrip("/#")))
        candidates = [iri for (k, _), iri in self._current.items() if k == key]
        if not candidates:
            return None
        return max(candidates, key=lambda i: (len(i.value), i.value))

    def record(self, target: Iri, source, namespace: Optional[str] = None) -> None:
        ns = (namespace or self._namespace_key(target)).rstrip("/#")
        key = (_key_text(source), ns)
        self._pairs.append((target, source))
        self._current[key] = target
        self._source_of[target] = (source, ns)

    def record_version(self, old: Iri, new: Iri) -> None:
        origin = self._source_of.get(old)
        if origin is not None:
            source, ns = origin
        else:
            source, ns = old, self._namespace_key(old)
        self.record(new, source, ns)
        self._latest_version[old] = new

    def latest_version_of(self, iri: Iri) -> Optional[Iri]:
        return self._latest_version.get(iri)

    def next_counter(self, construct: Iri) -> int:
        value = self.counters.get(construct, 0) + 1
        self.counters[construct] = value
        return value

    # -- persistence ----------------------------------------------------

    def to_graph(self) -> Graph:
        triples = []
        for target, source in self._pairs:
            if isinstance(source, (Iri, Literal)):
                triples.append(Triple(target, OWL.sameAs, source))
        return Graph(triples)

    @classmethod
    def from_graph(cls, graph: Graph, counters: Optional[dict] = None) -> "IriGraph":
        ig = cls()
        pairs = sorted(
            ((t.subject, t.object) for t in graph.match(None, OWL.sameAs, None)),
            key=lambda p: (len(p[0].value), p[0].value),
        )
        for target, source in pairs:
            ig.record(target, source)
            base = _strip_version_suffix(target.value)
            if base != target.value:
                ig._latest_version[Iri(base)] = target
        if counters:
            ig.counters.update(counters)
        return ig

    def counters_tsv(self) -> str:
        lines = [
            f"{construct.value}\t{self.counters[construct]}"
            for construct in sorted(self.counters, key=term_sort_key)
        ]
        return "\n".join(lines) + ("\n" if lines else "")

    @staticmethod
    def parse_counters_tsv(text: str) -> dict:
        counters = {}
        for line in text.splitlines():
            if not line.strip():
                continue
            construct, _, count = line.partition("\t")
            counters[Iri(construct)] = int(count)
        return counters


_VERSION_SUFFIX_RE = re.compile(r"(_\d{4}_\d{2}_\d{2})+$")


def _strip_version_suffix(value: str) -> str:
    return _VERSION_SUFFIX_RE.sub("", value)


def lineage_base(iri: Iri) -> Iri:
    """Target IRI with all date-version suffixes removed."""
    return Iri(_strip_version_suffix(iri.value))


def generate_iri(s_iri, value, t_type: Iri, ttbox, ig: IriGraph) -> Iri:
    """Mint (or reuse) the warehouse IRI for a source resource.

    An existing mapping for the source wins. Otherwise the IRI is the
    target construct (when the construct is part of the target schema)
    or the warehouse prefix, a '#', and the cleaned value.
    """
    in_schema = t_type is not None and ttbox.is_construct(t_type)
    if in_schema:
        base = t_type.value
    else:
        base = ttbox.prefix.rstrip("#/")
    existing = ig.lookup(s_iri, base)
    if existing is not None:
        return existing
    if value is None:
        raise OperationError(f"no stored IRI for {s_iri!r} and no value to build one")
    lexical = value.lexical if isinstance(value, Literal) else (
        value.value if isinstance(value, Iri) else str(value)
    )
    target = Iri(base + "#" + validate_iri_value(lexical))
    if s_iri is not None:
        ig.record(target, s_iri, base)
    return target


def update_iri(iri: Iri, ig: IriGraph, clock) -> Iri:
    """Version an IRI by appending the current date (YYYY_MM_DD).

    Calling twice on the same day returns the same version.
    """
    stamp = clock.today().strftime("%Y_%m_%d")
    existing = ig.latest_version_of(iri)
    if existing is not None and existing.value == f"{iri.value}_{stamp}":
        return existing
    new = Iri(f"{iri.value}_{stamp}")
    ig.record_version(iri, new)
    return new
