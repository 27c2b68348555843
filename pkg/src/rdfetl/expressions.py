"""Expression language used in property-mappings and query headers.

Covers the SPARQL-function subset the mapping vocabulary needs: string
functions, date part extraction, arithmetic/comparison/boolean
operators, xsd casts, and the five group functions. Expressions are
parsed from the literal strings found in mapping files.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional

from .errors import ExpressionError, UnboundVariableError
from .model import Iri, Literal, Term, Variable
from .namespaces import XSD

STRING_FUNCTIONS = frozenset(
    {"CONCAT", "STR", "STRAFTER", "STRBEFORE", "REPLACE", "UCASE", "LCASE", "SUBSTR"}
)
DATE_FUNCTIONS = frozenset({"DAY", "MONTH", "YEAR"})
AGGREGATES = frozenset({"SUM", "AVG", "MAX", "MIN", "COUNT"})
FUNCTIONS = STRING_FUNCTIONS | DATE_FUNCTIONS | AGGREGATES

CAST_TYPES = {
    "xsd:integer": XSD.integer,
    "xsd:double": XSD.double,
    "xsd:string": XSD.string,
}


@dataclass(frozen=True, slots=True)
class VarRef:
    var: Variable


@dataclass(frozen=True, slots=True)
class IriRef:
    iri: Iri


@dataclass(frozen=True, slots=True)
class Const:
    term: Term


@dataclass(frozen=True, slots=True)
class Call:
    func: str
    args: tuple


@dataclass(frozen=True, slots=True)
class Cast:
    datatype: Iri
    arg: object


@dataclass(frozen=True, slots=True)
class BinOp:
    op: str
    left: object
    right: object


@dataclass(frozen=True, slots=True)
class UnOp:
    op: str
    arg: object


Expression = object  # any of the node types above


# ---------------------------------------------------------------------------
# Parsing


_EXPR_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<string>"(?:[^"\\]|\\.)*")
  | (?P<number>\d+\.\d+|\d+)
  | (?P<var>\?[A-Za-z_][A-Za-z0-9_]*)
  | (?P<iriref><[^<>\s]*>)
  | (?P<name>[A-Za-z_][A-Za-z0-9_\-.]*(?::[A-Za-z0-9_][A-Za-z0-9_\-.]*)?)
  | (?P<op>&&|\|\||!=|<=|>=|[=<>!+\-*/(),])
    """,
    re.VERBOSE,
)

_STRING_UNESCAPE = {"\\\\": "\\", '\\"': '"', "\\n": "\n", "\\t": "\t", "\\r": "\r"}


def _tokenize(text: str):
    pos, tokens = 0, []
    while pos < len(text):
        m = _EXPR_TOKEN_RE.match(text, pos)
        if not m:
            raise ExpressionError(f"cannot tokenize expression at {text[pos:pos + 12]!r}")
        pos = m.end()
        if m.lastgroup != "ws":
            tokens.append((m.lastgroup, m.group()))
    return tokens


class _ExprParser:
    def __init__(self, text: str, prefixes: Optional[dict] = None):
        self.text = text
        self.tokens = _tokenize(text)
        self.prefixes = prefixes or {}
        self.index = 0

    def peek(self):
        return self.tokens[self.index] if self.index < len(self.tokens) else (None, None)

    def next(self):
        token = self.peek()
        self.index += 1
        return token

    def expect_op(self, symbol):
        kind, value = self.next()
        if kind != "op" or value != symbol:
            raise ExpressionError(f"expected {symbol!r} in expression {self.text!r}, found {value!r}")

    def at_op(self, *symbols):
        kind, value = self.peek()
        return kind == "op" and value in symbols

    def parse(self):
        expr = self.parse_or()
        if self.peek()[0] is not None:
            raise ExpressionError(f"trailing tokens in expression {self.text!r}")
        return expr

    def parse_or(self):
        left = self.parse_and()
        while self.at_op("||"):
            self.next()
            left = BinOp("||", left, self.parse_and())
        return left

    def parse_and(self):
        left = self.parse_not()
        while self.at_op("&&"):
            self.next()
            left = BinOp("&&", left, self.parse_not())
        return left

    def parse_not(self):
        if self.at_op("!"):
            self.next()
            return UnOp("!", self.parse_not())
        return self.parse_comparison()

    def parse_comparison(self):
        left = self.parse_additive()
        if self.at_op("=", "!=", "<", "<=", ">", ">="):
            op = self.next()[1]
            return BinOp(op, left, self.parse_additive())
        return left

    def parse_additive(self):
        left = self.parse_multiplicative()
        while self.at_op("+", "-"):
            op = self.next()[1]
            left = BinOp(op, left, self.parse_multiplicative())
        return left

    def parse_multiplicative(self):
        left = self.parse_unary()
        while self.at_op("*", "/"):
            op = self.next()[1]
            left = BinOp(op, left, self.parse_unary())
        return left

    def parse_unary(self):
        if self.at_op("-"):
            self.next()
            return UnOp("-", self.parse_unary())
        return self.parse_primary()

    def _args(self):
        self.expect_op("(")
        args = []
        if not self.at_op(")"):
            args.append(self.parse_or())
            while self.at_op(","):
                self.next()
                args.append(self.parse_or())
        self.expect_op(")")
        return tuple(args)

    def parse_primary(self):
        kind, value = self.next()
        if kind == "op" and value == "(":
            inner = self.parse_or()
            self.expect_op(")")
            return inner
        if kind == "string":
            lex = value[1:-1]
            for escaped, plain in _STRING_UNESCAPE.items():
                lex = lex.replace(escaped, plain)
            return Const(Literal(lex))
        if kind == "number":
            if "." in value:
                return Const(Literal(value, datatype=XSD.double))
            return Const(Literal(value, datatype=XSD.integer))
        if kind == "var":
            return VarRef(Variable(value[1:]))
        if kind == "iriref":
            return IriRef(Iri(value[1:-1]))
        if kind == "name":
            upper = value.upper()
            if upper in FUNCTIONS and self.at_op("("):
                return Call(upper, self._args())
            if value in CAST_TYPES and self.at_op("("):
                args = self._args()
                if len(args) != 1:
                    raise ExpressionError(f"{value} cast takes exactly one argument")
                return Cast(CAST_TYPES[value], args[0])
            if ":" in value:
                prefix, _, local = value.partition(":")
                base = self.prefixes.get(prefix)
                if base is None:
                    raise ExpressionError(f"unknown prefix {prefix!r} in expression {self.text!r}")
                iri = Iri(base + local)
                if self.at_op("(") and iri in CAST_TYPES.values():
                    args = self._args()
                    if len(args) != 1:
                        raise ExpressionError(f"{value} cast takes exactly one argument")
                    return Cast(iri, args[0])
                return IriRef(iri)
            raise ExpressionError(f"unknown identifier {value!r} in expression {self.text!r}")
        raise ExpressionError(f"unexpected token {value!r} in expression {self.text!r}")


def parse_expression(text: str, prefixes: Optional[dict] = None) -> Expression:
    return _ExprParser(text, prefixes).parse()


# ---------------------------------------------------------------------------
# Inspection and rewriting


def walk(expr):
    yield expr
    if isinstance(expr, Call):
        for arg in expr.args:
            yield from walk(arg)
    elif isinstance(expr, Cast):
        yield from walk(expr.arg)
    elif isinstance(expr, BinOp):
        yield from walk(expr.left)
        yield from walk(expr.right)
    elif isinstance(expr, UnOp):
        yield from walk(expr.arg)


def expression_iris(expr) -> set:
    """All IRIs referenced by the expression (the paper's returnIRIs)."""
    return {node.iri for node in walk(expr) if isinstance(node, IriRef)}


def expression_variables(expr) -> set:
    return {node.var for node in walk(expr) if isinstance(node, VarRef)}


def contains_aggregate(expr) -> bool:
    return any(isinstance(n, Call) and n.func in AGGREGATES for n in walk(expr))


def transform(expr, leaf_map):
    """Rebuild the expression, replacing leaves found in ``leaf_map``."""
    if expr in leaf_map:
        return leaf_map[expr]
    if isinstance(expr, Call):
        return Call(expr.func, tuple(transform(a, leaf_map) for a in expr.args))
    if isinstance(expr, Cast):
        return Cast(expr.datatype, transform(expr.arg, leaf_map))
    if isinstance(expr, BinOp):
        return BinOp(expr.op, transform(expr.left, leaf_map), transform(expr.right, leaf_map))
    if isinstance(expr, UnOp):
        return UnOp(expr.op, transform(expr.arg, leaf_map))
    return expr


def expression_to_string(expr) -> str:
    """Round-trippable rendering; IRIs in angle brackets, no prefixes."""
    if isinstance(expr, VarRef):
        return f"?{expr.var.name}"
    if isinstance(expr, IriRef):
        return f"<{expr.iri.value}>"
    if isinstance(expr, Const):
        term = expr.term
        if isinstance(term, Literal) and term.datatype in (XSD.integer, XSD.double):
            return term.lexical
        lex = term.lexical.replace("\\", "\\\\").replace('"', '\\"')
        return f'"{lex}"'
    if isinstance(expr, Call):
        return f"{expr.func}({', '.join(expression_to_string(a) for a in expr.args)})"
    if isinstance(expr, Cast):
        name = {XSD.integer: "xsd:integer", XSD.double: "xsd:double", XSD.string: "xsd:string"}[
            expr.datatype
        ]
        return f"{name}({expression_to_string(expr.arg)})"
    if isinstance(expr, BinOp):
        return f"({expression_to_string(expr.left)} {expr.op} {expression_to_string(expr.right)})"
    if isinstance(expr, UnOp):
        return f"{expr.op}({expression_to_string(expr.arg)})"
    raise ExpressionError(f"cannot render {expr!r}")


# ---------------------------------------------------------------------------
# Evaluation


_DATE_RE = re.compile(r"^(\d{4})([-/])(\d{1,2})\2(\d{1,2})$")

_NUMERIC_TYPES = {
    XSD.integer,
    XSD.double,
    XSD.decimal,
    XSD.float,
    XSD.int,
    XSD.long,
    XSD.nonNegativeInteger,
}


def _lexical(term) -> str:
    if isinstance(term, Literal):
        return term.lexical
    if isinstance(term, Iri):
        return term.value
    raise ExpressionError(f"no lexical form for {term!r}")


def _numeric(term):
    if isinstance(term, Literal):
        text = term.lexical.strip()
        try:
            if re.fullmatch(r"[+-]?\d+", text):
                return int(text)
            return float(text)
        except ValueError:
            pass
    raise ExpressionError(f"not a numeric value: {term!r}")


def _number_literal(value) -> Literal:
    if isinstance(value, int):
        return Literal(str(value), datatype=XSD.integer)
    if isinstance(value, float) and value.is_integer():
        return Literal(repr(value), datatype=XSD.double)
    return Literal(repr(value), datatype=XSD.double)


def _boolean(value: bool) -> Literal:
    return Literal("true" if value else "false", datatype=XSD.boolean)


def effective_boolean_value(term) -> bool:
    if isinstance(term, Literal):
        if term.datatype == XSD.boolean:
            return term.lexical == "true"
        if term.datatype in _NUMERIC_TYPES:
            try:
                return _numeric(term) != 0
            except ExpressionError:
                return False
        return term.lexical != ""
    raise ExpressionError(f"no effective boolean value for {term!r}")


def _parse_date(term):
    m = _DATE_RE.match(_lexical(term).strip())
    if not m:
        raise ExpressionError(f"not a date: {term!r}")
    year, _, month, day = m.groups()
    return int(year), int(month), int(day)


def _compare(op, left, right) -> bool:
    if op in ("=", "!="):
        if isinstance(left, Literal) and isinstance(right, Literal):
            try:
                equal = _numeric(left) == _numeric(right)
            except ExpressionError:
                equal = left == right
        else:
            equal = left == right
        return equal if op == "=" else not equal
    try:
        lv, rv = _numeric(left), _numeric(right)
    except ExpressionError:
        lv, rv = _lexical(left), _lexical(right)
    if op == "<":
        return lv < rv
    if op == "<=":
        return lv <= rv
    if op == ">":
        return lv > rv
    return lv >= rv


def _call(func, values):
    if func == "CONCAT":
        return Literal("".join(_lexical(v) for v in values))
    if func == "STR":
        return Literal(_lexical(values[0]))
    if func == "STRAFTER":
        text, sep = _lexical(values[0]), _lexical(values[1])
        _, found, after = text.partition(sep)
        # trimmed so "..., City" style extractions yield clean keys
        return Literal(after.strip() if found else "")
    if func == "STRBEFORE":
        text, sep = _lexical(values[0]), _lexical(values[1])
        before, found, _ = text.partition(sep)
        return Literal(before if found else "")
    if func == "REPLACE":
        return Literal(_lexical(values[0]).replace(_lexical(values[1]), _lexical(values[2])))
    if func == "UCASE":
        return Literal(_lexical(values[0]).upper())
    if func == "LCASE":
        return Literal(_lexical(values[0]).lower())
    if func == "SUBSTR":
        text = _lexical(values[0])
        start = int(_numeric(values[1]))
        if len(values) > 2:
            length = int(_numeric(values[2]))
            return Literal(text[start - 1 : start - 1 + length])
        return Literal(text[start - 1 :])
    if func == "DAY":
        return Literal(str(_parse_date(values[0])[2]), datatype=XSD.integer)
    if func == "MONTH":
        return Literal(str(_parse_date(values[0])[1]), datatype=XSD.integer)
    if func == "YEAR":
        return Literal(str(_parse_date(values[0])[0]), datatype=XSD.integer)
    raise ExpressionError(f"unsupported function {func}")


def _cast(datatype, value):
    if datatype == XSD.string:
        return Literal(_lexical(value))
    if datatype == XSD.integer:
        number = _numeric(value)
        return Literal(str(int(number)), datatype=XSD.integer)
    if datatype == XSD.double:
        number = float(_numeric(value))
        return Literal(repr(number), datatype=XSD.double)
    raise ExpressionError(f"unsupported cast target {datatype!r}")


def eval_expression(expr, binding) -> Term:
    """Evaluate under a binding (mapping Variable -> Term).

    Raises UnboundVariableError when a referenced variable is absent or
    NULL, ExpressionError on type failures (bad cast, division by zero,
    aggregates outside a grouped context).
    """
    if isinstance(expr, VarRef):
        value = binding.get(expr.var) if binding else None
        if value is None:
            raise UnboundVariableError(f"unbound variable ?{expr.var.name}")
        return value
    if isinstance(expr, IriRef):
        return expr.iri
    if isinstance(expr, Const):
        return expr.term
    if isinstance(expr, Cast):
        return _cast(expr.datatype, eval_expression(expr.arg, binding))
    if isinstance(expr, UnOp):
        if expr.op == "!":
            return _boolean(not effective_boolean_value(eval_expression(expr.arg, binding)))
        return _number_literal(-_numeric(eval_expression(expr.arg, binding)))
    if isinstance(expr, BinOp):
        if expr.op in ("&&", "||"):
            left = effective_boolean_value(eval_expression(expr.left, binding))
            if expr.op == "&&":
                return _boolean(left and effective_boolean_value(eval_expression(expr.right, binding)))
            return _boolean(left or effective_boolean_value(eval_expression(expr.right, binding)))
        left = eval_expression(expr.left, binding)
        right = eval_expression(expr.right, binding)
        if expr.op in ("=", "!=", "<", "<=", ">", ">="):
            return _boolean(_compare(expr.op, left, right))
        lv, rv = _numeric(left), _numeric(right)
        if expr.op == "+":
            return _number_literal(lv + rv)
        if expr.op == "-":
            return _number_literal(lv - rv)
        if expr.op == "*":
            return _number_literal(lv * rv)
        if rv == 0:
            raise ExpressionError("division by zero")
        return _number_literal(lv / rv)
    if isinstance(expr, Call):
        if expr.func in AGGREGATES:
            raise ExpressionError(f"{expr.func} used outside a grouped context")
        return _call(expr.func, [eval_expression(a, binding) for a in expr.args])
    raise ExpressionError(f"cannot evaluate {expr!r}")


def eval_aggregate(expr, bindings) -> Term:
    """Evaluate an expression over a group of bindings.

    Aggregate calls fold their argument across the group; everything
    outside an aggregate is evaluated against the group's first binding.
    """
    if isinstance(expr, Call) and expr.func in AGGREGATES:
        if expr.func == "COUNT" and not expr.args:
            return Literal(str(len(bindings)), datatype=XSD.integer)
        values = []
        for binding in bindings:
            try:
                values.append(eval_expression(expr.args[0], binding))
            except UnboundVariableError:
                continue
        if expr.func == "COUNT":
            return Literal(str(len(values)), datatype=XSD.integer)
        if not values:
            raise ExpressionError(f"{expr.func} over an empty group")
        if expr.func in ("SUM", "AVG"):
            total = sum(_numeric(v) for v in values)
            return _number_literal(total if expr.func == "SUM" else total / len(values))
        try:
            numbers = [_numeric(v) for v in values]
            chosen = max(numbers) if expr.func == "MAX" else min(numbers)
            return _number_literal(chosen)
        except ExpressionError:
            texts = [_lexical(v) for v in values]
            return Literal(max(texts) if expr.func == "MAX" else min(texts))
    if isinstance(expr, Call):
        return _call(expr.func, [eval_aggregate(a, bindings) for a in expr.args])
    if isinstance(expr, Cast):
        return _cast(expr.datatype, eval_aggregate(expr.arg, bindings))
    if isinstance(expr, BinOp) and contains_aggregate(expr):
        rebuilt = BinOp(
            expr.op,
            Const(eval_aggregate(expr.left, bindings)),
            Const(eval_aggregate(expr.right, bindings)),
        )
        return eval_expression(rebuilt, {})
    return eval_expression(expr, bindings[0] if bindings else {})
