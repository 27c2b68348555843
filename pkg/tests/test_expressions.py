import pytest

from rdfetl import expressions as ex
from rdfetl.errors import ExpressionError, UnboundVariableError
from rdfetl.model import Iri, Literal, Variable
from rdfetl.namespaces import XSD

SUB = "http://extbi.lab.aau.dk/ontology/subsidy/"
PREFIXES = {"sub": SUB, "xsd": XSD.base}


def evaluate(text, binding=None):
    return ex.eval_expression(ex.parse_expression(text, PREFIXES), binding or {})


def test_integer_cast_truncates_toward_zero():
    assert evaluate('xsd:integer("8928.31")') == Literal("8928", datatype=XSD.integer)
    assert evaluate('xsd:integer("-3.9")') == Literal("-3", datatype=XSD.integer)


def test_integer_cast_rejects_garbage():
    with pytest.raises(ExpressionError):
        evaluate('xsd:integer("not-a-number")')


def test_double_and_string_casts():
    assert evaluate('xsd:double("2")') == Literal("2.0", datatype=XSD.double)
    assert evaluate("xsd:string(42)") == Literal("42")


def test_day_month_year_both_date_shapes():
    for lexical in ("2010-05-25", "2010/05/25"):
        binding = {Variable("d"): Literal(lexical)}
        assert ex.eval_expression(
            ex.Call("DAY", (ex.VarRef(Variable("d")),)), binding
        ) == Literal("25", datatype=XSD.integer)
        assert ex.eval_expression(
            ex.Call("MONTH", (ex.VarRef(Variable("d")),)), binding
        ) == Literal("5", datatype=XSD.integer)
        assert ex.eval_expression(
            ex.Call("YEAR", (ex.VarRef(Variable("d")),)), binding
        ) == Literal("2010", datatype=XSD.integer)


def test_pay_date_concat_renders_unpadded():
    # hand evaluation: day 25, month 5, year 2010 -> "25/5/2010"
    binding = {Variable("d"): Literal("2010-05-25")}
    expr = ex.parse_expression(
        'CONCAT(STR(DAY(?d)), "/", STR(MONTH(?d)), "/", STR(YEAR(?d)))', PREFIXES
    )
    assert ex.eval_expression(expr, binding) == Literal("25/5/2010")


def test_strafter_trims_whitespace():
    assert evaluate('STRAFTER("Valsomaglevej 117, Ringsted", ",")') == Literal("Ringsted")
    assert evaluate('STRAFTER("Donskaervej 31,Vemb", ",")') == Literal("Vemb")
    assert evaluate('STRAFTER("no separator", ";")') == Literal("")


def test_strbefore_substr_case_functions():
    assert evaluate('STRBEFORE("a,b", ",")') == Literal("a")
    assert evaluate('SUBSTR("warehouse", 1, 4)') == Literal("ware")
    assert evaluate('UCASE("abc")') == Literal("ABC")
    assert evaluate('LCASE("AbC")') == Literal("abc")
    assert evaluate('REPLACE("a DK b", "DK", "Denmark")') == Literal("a Denmark b")


def test_arithmetic_and_division_by_zero():
    assert evaluate("1 + 2 * 3") == Literal("7", datatype=XSD.integer)
    assert evaluate("(8 - 2) / 4") == Literal("1.5", datatype=XSD.double)
    with pytest.raises(ExpressionError):
        evaluate("1 / 0")


def test_comparisons_and_boolean_connectives():
    assert evaluate("3 < 5") == Literal("true", datatype=XSD.boolean)
    assert evaluate('"a" = "a" && !(2 > 3)') == Literal("true", datatype=XSD.boolean)
    assert evaluate('"a" != "a" || 1 >= 2') == Literal("false", datatype=XSD.boolean)


def test_numeric_equality_crosses_datatypes():
    assert evaluate('7 = xsd:integer("7.2")') == Literal("true", datatype=XSD.boolean)


def test_unbound_variable_raises():
    with pytest.raises(UnboundVariableError):
        ex.eval_expression(ex.VarRef(Variable("missing")), {})


def test_property_iris_parse_with_prefixes():
    expr = ex.parse_expression('STRAFTER(sub:address, ",")', PREFIXES)
    assert ex.expression_iris(expr) == {Iri(SUB + "address")}


def test_unknown_prefix_rejected():
    with pytest.raises(ExpressionError):
        ex.parse_expression("nope:property", PREFIXES)


def test_expression_to_string_round_trips():
    source = 'CONCAT(STR(DAY(sub:payDate)), "/", STR(MONTH(sub:payDate)))'
    expr = ex.parse_expression(source, PREFIXES)
    rendered = ex.expression_to_string(expr)
    assert ex.parse_expression(rendered, PREFIXES) == expr


def test_aggregate_outside_group_context_errors():
    with pytest.raises(ExpressionError):
        evaluate("SUM(1)")
