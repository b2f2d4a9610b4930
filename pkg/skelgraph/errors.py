r"""
Exceptions raised by skelgraph.

Each class maps to one exit code of the command line interface (see
:func:`skelgraph.__main__.exit_code`).

EXAMPLES::

    >>> from skelgraph.errors import ParseError, DataError
    >>> issubclass(ParseError, DataError) and issubclass(DataError, ValueError)
    True
"""

class DimensionError(ValueError):
    r"""
    Shapes of the operands are incompatible.
    """

class DomainError(ValueError):
    r"""
    A value lies outside the domain of a function (e.g. ``log`` of a
    non-positive entry). The attribute ``index`` holds the offending position.
    """
    def __init__(self, msg, index=None):
        ValueError.__init__(self, msg)
        self.index = index

class IsolatedNodeError(ValueError):
    r"""
    A softmax row has no admissible entry. The attribute ``rows`` lists them.
    """
    def __init__(self, msg, rows=()):
        ValueError.__init__(self, msg)
        self.rows = tuple(rows)

class ContractError(ValueError):
    r"""
    A precondition of an operation is not satisfied.
    """

class InvariantError(ValueError):
    r"""
    A data object violates one of its invariants.
    """

class ParameterError(ValueError):
    r"""
    An argument is outside of its admissible range.
    """

class ConfigurationError(ValueError):
    r"""
    The configuration is inconsistent or cannot be parsed.
    """

class DataError(ValueError):
    r"""
    Input data is invalid. ``record_id`` is set when the error concerns a
    dataset record.
    """
    def __init__(self, msg, record_id=None):
        ValueError.__init__(self, msg)
        self.record_id = record_id

class ParseError(DataError):
    r"""
    A file is malformed. ``line`` is the 1-based line number.
    """
    def __init__(self, msg, line=None):
        DataError.__init__(self, msg if line is None else 'line %d: %s' % (line, msg))
        self.line = line

class NumericalError(ArithmeticError):
    r"""
    A numerical routine failed (non-finite loss, eigensolver failure).
    """
