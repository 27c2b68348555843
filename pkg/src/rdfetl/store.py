"""Minimal file-backed triple store.

Layout: a directory holding ``data.nt`` (the default graph),
``iri-graph.nt`` (provenance pairs), and ``counters.tsv`` (per-construct
incremental counters). Writes go through a temp-file rename so a crash
mid-write leaves the previous state intact.
"""

from __future__ import annotations

import os
import tempfile
from pathlib import Path

from .errors import RdfSyntaxError, StoreError
from .iri import IriGraph
from .model import EMPTY_GRAPH, Graph
from .ntriples import parse_ntriples, serialize_ntriples
from .query import execute_query

DATA_FILE = "data.nt"
IRI_GRAPH_FILE = "iri-graph.nt"
COUNTERS_FILE = "counters.tsv"


class Store:
    def __init__(self, root):
        self.root = Path(root)
        self._data = None

    @property
    def data_path(self) -> Path:
        return self.root / DATA_FILE

    @property
    def data(self) -> Graph:
        if self._data is None:
            self._data = self._read_graph(self.data_path)
        return self._data

    def _read_graph(self, path: Path) -> Graph:
        if not path.exists():
            return EMPTY_GRAPH
        try:
            return parse_ntriples(path.read_bytes(), source_label=str(path))
        except RdfSyntaxError as error:
            raise StoreError(f"corrupt store file {path}: {error}") from error

    def _atomic_write(self, path: Path, payload: bytes) -> None:
        fd, temp_name = tempfile.mkstemp(dir=self.root, prefix=path.name, suffix=".tmp")
        try:
            with os.fdopen(fd, "wb") as handle:
                handle.write(payload)
            os.replace(temp_name, path)
        except BaseException:
            if os.path.exists(temp_name):
                os.unlink(temp_name)
            raise

    def merge(self, graph: Graph) -> Graph:
        """Set-union the graph into the default graph; idempotent."""
        merged = self.data.union(graph)
        self._atomic_write(self.data_path, serialize_ntriples(merged))
        self._data = merged
        return merged

    def replace(self, graph: Graph) -> Graph:
        """Overwrite the default graph (updates delete triples)."""
        self._atomic_write(self.data_path, serialize_ntriples(graph))
        self._data = graph
        return graph

    def query(self, pattern, header):
        return execute_query(pattern, self.data, header)

    # -- IRI graph persistence ------------------------------------------

    def load_iri_graph(self) -> IriGraph:
        graph = self._read_graph(self.root / IRI_GRAPH_FILE)
        counters_path = self.root / COUNTERS_FILE
        counters = (
            IriGraph.parse_counters_tsv(counters_path.read_text()) if counters_path.exists() else {}
        )
        return IriGraph.from_graph(graph, counters)

    def save_iri_graph(self, iri_graph: IriGraph) -> None:
        self._atomic_write(self.root / IRI_GRAPH_FILE, serialize_ntriples(iri_graph.to_graph()))
        self._atomic_write(self.root / COUNTERS_FILE, iri_graph.counters_tsv().encode("utf-8"))


def open_store(root) -> Store:
    root = Path(root)
    try:
        root.mkdir(parents=True, exist_ok=True)
    except OSError as error:
        raise StoreError(f"cannot create store directory {root}: {error}") from error
    return Store(root)


# Aliases matching the operation names used elsewhere in the docs.
def store_open(root) -> Store:
    return open_store(root)


def store_merge(store: Store, graph: Graph) -> Store:
    store.merge(graph)
    return store


def store_query(store: Store, pattern, header):
    return store.query(pattern, header)
