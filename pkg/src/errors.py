"""
Base error types for the GraphLoc pipeline

Module-specific errors subclass GraphlocError next to the code that raises them.
"""


class GraphlocError(Exception):
    """Base class for all pipeline errors"""
    pass


class InvalidInputError(GraphlocError, ValueError):
    """Input data violates a documented precondition (non-finite values, empty sets, ...)"""
    pass


class CommandUsageError(GraphlocError):
    """A command was invoked without the inputs it needs"""
    pass
