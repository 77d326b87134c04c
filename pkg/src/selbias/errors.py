"""Exception hierarchy shared by the graph, SCM and study layers."""


class SelbiasError(Exception):
    """Base class for every error raised by this package."""


class ParseError(SelbiasError, ValueError):
    """A text file (DAG, SCM, grid) could not be parsed."""

    def __init__(self, message, source="<string>", line=None, token=None):
        self.source = source
        self.line = line
        self.token = token
        where = source if line is None else f"{source}:{line}"
        if token is not None:
            message = f"{message} (token {token!r})"
        super().__init__(f"{where}: {message}")


# graph layer

class GraphError(SelbiasError, ValueError):
    pass


class CycleDetected(GraphError):
    def __init__(self, cycle):
        self.cycle = tuple(cycle)
        super().__init__("directed cycle " + " -> ".join(self.cycle))


class UnknownEndpoint(GraphError):
    pass


class UnknownNode(GraphError):
    pass


class DuplicateNode(GraphError):
    pass


class DuplicateEdge(GraphError):
    pass


class InvalidName(GraphError):
    pass


class OverlappingSets(GraphError):
    pass


class NameClash(GraphError):
    pass


class SelectionError(GraphError):
    """The selection node is not a sink with at least one parent."""


class InvalidQuery(GraphError):
    pass


# SCM layer

class ScmError(SelbiasError, ValueError):
    pass


class InvalidMechanism(ScmError):
    pass


class TooLarge(ScmError):
    pass


class NumericError(SelbiasError, ArithmeticError):
    """Base for failures that come from the numbers rather than the inputs."""


class ZeroConditioningEvent(NumericError):
    pass


class PositivityViolation(NumericError):
    pass


class NumericalOverflow(NumericError):
    pass


# study layer

class InvalidParams(SelbiasError, ValueError):
    pass


class GridSyntax(ParseError):
    pass


class EmptyGrid(SelbiasError, ValueError):
    pass
