"""rdfetl: metadata-driven ETL for RDF data warehouses.

The package is layered: an RDF core (terms, graphs, two syntaxes), a
graph-pattern query engine with an expression language, the QB4OLAP
target-schema model, the source-to-target mapping model, the execution
operations, and the automatic flow generator that wires them together.
"""

from .model import (
    BlankNode,
    Graph,
    Iri,
    Literal,
    Triple,
    Variable,
    graph_difference,
    graph_union,
    isomorphic,
)
from .ntriples import parse_ntriples, serialize_ntriples
from .turtle import parse_turtle_subset

__all__ = [
    "BlankNode",
    "Graph",
    "Iri",
    "Literal",
    "Triple",
    "Variable",
    "graph_difference",
    "graph_union",
    "isomorphic",
    "parse_ntriples",
    "serialize_ntriples",
    "parse_turtle_subset",
]

__version__ = "0.1.0"
