import random
from pathlib import Path

import pytest

from rdfetl.mapping import parse_mapping
from rdfetl.model import BlankNode, Graph, Iri, Literal, Triple
from rdfetl.namespaces import XSD
from rdfetl.schema import load_target_tbox
from rdfetl.turtle import read_rdf_file

DATA_DIR = Path(__file__).parent / "data" / "usecase"


@pytest.fixture(scope="session")
def data_dir() -> Path:
    return DATA_DIR


@pytest.fixture(scope="session")
def business_graph():
    return read_rdf_file(DATA_DIR / "dbd.nt")


@pytest.fixture(scope="session")
def subsidy_graph():
    return read_rdf_file(DATA_DIR / "subsidy.nt")


@pytest.fixture(scope="session")
def business_tbox():
    return read_rdf_file(DATA_DIR / "businessTBox.ttl")


@pytest.fixture(scope="session")
def subsidy_tbox():
    return read_rdf_file(DATA_DIR / "subsidyTBox.ttl")


@pytest.fixture(scope="session")
def warehouse_tbox_graph():
    return read_rdf_file(DATA_DIR / "subsidyMDTBox.ttl")


@pytest.fixture(scope="session")
def warehouse_tbox(warehouse_tbox_graph):
    return load_target_tbox(warehouse_tbox_graph)


@pytest.fixture(scope="session")
def mapping_file():
    return parse_mapping(read_rdf_file(DATA_DIR / "mapping.ttl"))


def random_term(rng: random.Random, blanks=True):
    kind = rng.randrange(4 if blanks else 3)
    if kind == 0:
        return Iri(f"http://x.example/r{rng.randrange(8)}")
    if kind == 1:
        return Literal(f"v{rng.randrange(8)}")
    if kind == 2:
        return Literal(str(rng.randrange(50)), datatype=XSD.integer)
    return BlankNode(f"b{rng.randrange(5)}")


def random_graph(rng: random.Random, size: int, blanks=True) -> Graph:
    triples = []
    for _ in range(size):
        subject = random_term(rng, blanks)
        while isinstance(subject, Literal):
            subject = random_term(rng, blanks)
        predicate = Iri(f"http://x.example/p{rng.randrange(5)}")
        triples.append(Triple(subject, predicate, random_term(rng, blanks)))
    return Graph(triples)
