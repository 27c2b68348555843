import random

import pytest

from rdfetl.errors import RdfEtlError, RdfSyntaxError
from rdfetl.model import (
    BlankNode,
    Graph,
    Iri,
    Literal,
    Triple,
    graph_difference,
    graph_union,
    isomorphic,
)
from rdfetl.namespaces import RDF, XSD
from rdfetl.ntriples import parse_ntriples, serialize_ntriples
from rdfetl.turtle import parse_turtle_subset

BUS = "http://extbi.lab.aau.dk/ontology/business/"
SUB = "http://extbi.lab.aau.dk/ontology/subsidy/"


def test_term_equality_is_lexical():
    assert Literal("01", datatype=XSD.integer) != Literal("1", datatype=XSD.integer)
    assert Literal("x") == Literal("x", datatype=XSD.string)
    assert Iri("http://a") != Literal("http://a")


def test_plain_literal_defaults_to_xsd_string():
    assert Literal("x").datatype == XSD.string
    assert Literal("x", lang="en").datatype is None


def test_literal_rejects_lang_plus_datatype():
    with pytest.raises(RdfEtlError):
        Literal("x", datatype=XSD.string, lang="en")


def test_iri_must_be_absolute():
    with pytest.raises(RdfEtlError):
        Iri("relative/path")
    Iri("urn:uuid:1234")


def test_triple_positions_enforced():
    with pytest.raises(RdfEtlError):
        Triple(Literal("s"), Iri("http://p"), Literal("o"))
    with pytest.raises(RdfEtlError):
        Triple(Iri("http://s"), BlankNode("b"), Literal("o"))


# -- N-Triples --------------------------------------------------------------


def test_parse_single_triple():
    g = parse_ntriples(b'<http://a> <http://p> "x" .')
    assert g == Graph([Triple(Iri("http://a"), Iri("http://p"), Literal("x"))])


def test_parse_empty_input():
    assert len(parse_ntriples(b"")) == 0
    assert len(parse_ntriples(b"\n# comment only\n")) == 0


def test_parse_duplicate_lines_collapse():
    text = '<http://a> <http://p> "x" .\n' * 3
    assert len(parse_ntriples(text)) == 1


def test_parse_company_block(data_dir):
    text = (data_dir / "dbd.nt").read_text()
    block = "\n".join(line for line in text.splitlines() if "10058996" in line)
    g = parse_ntriples(block)
    assert len(g) == 9
    company = Iri(BUS + "Company#10058996")
    assert Triple(company, RDF.type, Iri(BUS + "Company")) in g
    assert Triple(company, Iri(BUS + "ownerName"), Literal("Kim Jonni Larsen")) in g


def test_parse_errors_carry_line_numbers():
    with pytest.raises(RdfSyntaxError) as err:
        parse_ntriples('<http://a> <http://p> "x" .\n<http://a> <http://p> "y"')
    assert "line 2" in str(err.value)
    with pytest.raises(RdfSyntaxError):
        parse_ntriples('"lit" <http://p> "x" .')


def test_blank_node_labels_renamed_but_stable():
    g = parse_ntriples("_:alpha <http://p> _:alpha .\n_:alpha <http://p> _:beta .")
    subjects = {t.subject for t in g}
    assert subjects == {BlankNode("b0")}
    objects = {t.object for t in g}
    assert objects == {BlankNode("b0"), BlankNode("b1")}


def test_serialize_empty_graph():
    assert serialize_ntriples(Graph()) == b""


def test_serialize_single_triple_explicit_string_datatype():
    g = Graph([Triple(Iri("http://a"), Iri("http://p"), Literal("x"))])
    expected = b'<http://a> <http://p> "x"^^<http://www.w3.org/2001/XMLSchema#string> .\n'
    assert serialize_ntriples(g) == expected


def test_serialize_is_sorted_and_deterministic():
    t1 = Triple(Iri("http://b"), Iri("http://p"), Literal("1", datatype=XSD.integer))
    t2 = Triple(Iri("http://a"), Iri("http://p"), Literal("2", datatype=XSD.integer))
    assert serialize_ntriples(Graph([t1, t2])) == serialize_ntriples(Graph([t2, t1]))
    lines = serialize_ntriples(Graph([t1, t2])).decode().splitlines()
    assert lines == sorted(lines)


def test_escaping_round_trip():
    tricky = Literal('quote " backslash \\ newline \n tab \t end')
    g = Graph([Triple(Iri("http://s"), Iri("http://p"), tricky)])
    assert parse_ntriples(serialize_ntriples(g)) == g


@pytest.mark.parametrize("seed", range(10))
def test_random_graph_round_trip_isomorphic(seed):
    from conftest import random_graph

    rng = random.Random(seed)
    g = random_graph(rng, 50)
    again = parse_ntriples(serialize_ntriples(g))
    assert isomorphic(g, again)


def test_isomorphic_detects_blank_renaming():
    g1 = parse_ntriples("_:x <http://p> <http://o> .")
    g2 = parse_ntriples("_:y <http://p> <http://o> .")
    g3 = parse_ntriples("_:y <http://p> <http://other> .")
    assert isomorphic(g1, g2)
    assert not isomorphic(g1, g3)


# -- Turtle subset ----------------------------------------------------------


def test_turtle_prefix_and_abbreviations():
    g = parse_turtle_subset("PREFIX ex: <http://e/> ex:a ex:p ex:b.")
    assert g == Graph([Triple(Iri("http://e/a"), Iri("http://e/p"), Iri("http://e/b"))])


def test_turtle_semicolon_comma_and_a():
    g = parse_turtle_subset(
        """
        @prefix ex: <http://e/> .
        ex:s a ex:T ; ex:p "x", "y" .
        """
    )
    assert Triple(Iri("http://e/s"), RDF.type, Iri("http://e/T")) in g
    assert len(g) == 3


def test_turtle_mapping_file_relation(data_dir):
    g = parse_turtle_subset((data_dir / "mapping.ttl").read_text())
    cm = Iri("http://extbi.lab.aau.dk/ontology/s2tmap/example#Recipient_Company")
    relation = Iri("http://extbi.lab.aau.dk/ontology/s2tmap/relation")
    right = Iri("http://extbi.lab.aau.dk/ontology/s2tmap/rightOuterjoin")
    assert Triple(cm, relation, right) in g


def test_turtle_instance_listing(data_dir):
    g = parse_turtle_subset(
        """
        @prefix sub: <http://extbi.lab.aau.dk/ontology/subsidy/> .
        @prefix recipient: <http://extbi.lab.aau.dk/ontology/subsidy/Recipient#> .
        recipient:291894 a sub:Recipient ;
            sub:name "Kristian Kristensen" .
        """
    )
    assert Triple(
        Iri(SUB + "Recipient#291894"), Iri(SUB + "name"), Literal("Kristian Kristensen")
    ) in g


def test_turtle_numbers_and_bnode_property_list():
    g = parse_turtle_subset(
        """
        @prefix ex: <http://e/> .
        ex:s ex:count 42 ; ex:rate 1.5 ; ex:part [ ex:q "inner" ] .
        """
    )
    assert Triple(Iri("http://e/s"), Iri("http://e/count"), Literal("42", datatype=XSD.integer)) in g
    assert Triple(Iri("http://e/s"), Iri("http://e/rate"), Literal("1.5", datatype=XSD.decimal)) in g
    inner = [t for t in g if t.predicate == Iri("http://e/q")]
    assert len(inner) == 1 and isinstance(inner[0].subject, BlankNode)


def test_turtle_unknown_prefix_is_an_error():
    with pytest.raises(RdfSyntaxError):
        parse_turtle_subset("ex:a ex:p ex:b .")


def test_turtle_namespaces_preserved():
    g = parse_turtle_subset("PREFIX ex: <http://e/> ex:a ex:p ex:b.")
    assert g.namespaces["ex"] == "http://e/"


# -- set algebra ------------------------------------------------------------


def _triples(n):
    return [
        Triple(Iri(f"http://s{i}"), Iri("http://p"), Literal(str(i), datatype=XSD.integer))
        for i in range(n)
    ]


def test_union_identity_and_difference_self():
    g = Graph(_triples(4))
    assert graph_union(Graph(), g) == g
    assert len(graph_difference(g, g)) == 0


def test_union_laws_and_cardinality():
    rng = random.Random(7)
    from conftest import random_graph

    for _ in range(25):
        a, b, c = (random_graph(rng, rng.randrange(12), blanks=False) for _ in range(3))
        assert graph_union(a, b) == graph_union(b, a)
        assert graph_union(graph_union(a, b), c) == graph_union(a, graph_union(b, c))
        assert graph_union(a, a) == a
        assert len(graph_difference(a, b)) + len(a.intersection(b)) == len(a)


def test_difference_finds_changed_name(data_dir):
    from rdfetl.turtle import read_rdf_file

    old = read_rdf_file(data_dir / "recipient_old.nt")
    new = read_rdf_file(data_dir / "recipient_new.nt")
    delta = graph_difference(new, old)
    changed = Triple(
        Iri(SUB + "Recipient#291894"), Iri(SUB + "name"), Literal("Kristian Jensen")
    )
    assert changed in delta
