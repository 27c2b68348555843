"""Exception hierarchy shared across the package."""


class RdfEtlError(Exception):
    """Base class for all errors raised by this package."""


class RdfSyntaxError(RdfEtlError):
    """Malformed N-Triples or Turtle input."""

    def __init__(self, message, line=None, source=None):
        self.line = line
        self.source = source
        where = ""
        if source:
            where += f"{source}:"
        if line is not None:
            where += f"line {line}: "
        super().__init__(where + message)


class ExpressionError(RdfEtlError):
    """Expression cannot be parsed or evaluated."""


class UnboundVariableError(ExpressionError):
    """A variable required by an expression has no binding."""


class QueryError(RdfEtlError):
    """Ill-formed query pattern or output header."""


class SchemaError(RdfEtlError):
    """Target TBox violates a structural requirement."""


class MappingError(RdfEtlError):
    """Mapping graph cannot be interpreted."""


class OperationError(RdfEtlError):
    """An ETL operation was invoked with unusable parameters or data."""


class FlowError(RdfEtlError):
    """ETL flow generation or validation failed."""


class PlanCompatibilityError(FlowError):
    """Two adjacent plan steps are not compatible successors."""


class StepExecutionError(FlowError):
    """A plan step failed at runtime; prior intermediates are preserved."""

    def __init__(self, message, report=None):
        self.report = report
        super().__init__(message)


class StoreError(RdfEtlError):
    """Triple store directory is unusable."""
