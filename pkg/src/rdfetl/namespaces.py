"""Well-known vocabulary namespaces and IRI helpers."""

from .model import Iri


class Namespace:
    """Builds IRIs under a common base, e.g. ``RDF.type``."""

    def __init__(self, base: str):
        self.base = base

    def term(self, local: str) -> Iri:
        return Iri(self.base + local)

    def __getattr__(self, local: str) -> Iri:
        if local.startswith("_"):
            raise AttributeError(local)
        return self.term(local)

    def __contains__(self, iri) -> bool:
        return isinstance(iri, Iri) and iri.value.startswith(self.base)


RDF = Namespace("http://www.w3.org/1999/02/22-rdf-syntax-ns#")
RDFS = Namespace("http://www.w3.org/2000/01/rdf-schema#")
OWL = Namespace("http://www.w3.org/2002/07/owl#")
XSD = Namespace("http://www.w3.org/2001/XMLSchema#")
QB = Namespace("http://purl.org/linked-data/cube#")
QB4O = Namespace("http://purl.org/qb4olap/cubes#")
MAP = Namespace("http://extbi.lab.aau.dk/ontology/s2tmap/")

# Default prefix table used when parsing expression strings and CLI IRIs.
WELL_KNOWN_PREFIXES = {
    "rdf": RDF.base,
    "rdfs": RDFS.base,
    "owl": OWL.base,
    "xsd": XSD.base,
    "qb": QB.base,
    "qb4o": QB4O.base,
    "map": MAP.base,
}


def local_name(iri: Iri) -> str:
    """Portion of the IRI after the last '#' or '/'."""
    value = iri.value
    for sep in ("#", "/"):
        if sep in value:
            tail = value.rsplit(sep, 1)[1]
            if tail:
                return tail
    return value


def namespace_of(iri: Iri) -> str:
    """Portion of the IRI up to and including the last '#' or '/'."""
    value = iri.value
    hash_pos = value.rfind("#")
    slash_pos = value.rfind("/")
    cut = max(hash_pos, slash_pos)
    if cut < 0:
        return value
    return value[: cut + 1]
