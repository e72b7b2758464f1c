"""Exception types shared across the library.

The CLI maps exception classes to exit codes, so library code should raise
ParseError for malformed input files and NumericError for failures inside
the numerical routines. Plain ValueError is used for bad arguments.
"""


class ParseError(ValueError):
    """A file could not be parsed. Carries path and line context in the message."""


class NumericError(RuntimeError):
    """A numerical routine failed (non-convergence, divergence, degenerate data)."""
