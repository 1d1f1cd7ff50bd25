"""Exception hierarchy.

Grouped by the failure class the CLI maps to exit codes: usage errors are
argparse's business, ``DataError`` subclasses exit 2, ``NumericalAbortError``
exits 3, everything else is a programming error.
"""

from __future__ import annotations


class GammaEError(Exception):
    """Base class for all library errors."""


class DomainError(GammaEError, ValueError):
    """Mathematical domain violation (non-positive or non-finite input)."""


class DimensionMismatchError(GammaEError, ValueError):
    """Operands disagree on embedding dimensionality."""


class WeightSimplexError(GammaEError, ValueError):
    """Mixture/intersection weights do not sum to one per dimension."""


class DataError(GammaEError):
    """Malformed or inconsistent external data (files, records, vocab)."""


class ParseError(DataError):
    """Unparseable record; carries location diagnostics in the message."""


class CheckpointError(DataError):
    """Checkpoint version or shape mismatch."""


class GraphError(GammaEError, ValueError):
    """Malformed computation graph (cycle, dangling node, bad template)."""


class SamplingExhaustedError(GammaEError, RuntimeError):
    """Query sampling failed to produce a valid instance within the attempt budget."""


class NonConvergenceError(GammaEError, RuntimeError):
    """Quadrature truncation left more tail mass than the tolerance allows."""


class NumericalAbortError(GammaEError, RuntimeError):
    """Training produced a non-finite loss; carries a diagnostic dump."""

    def __init__(self, message: str, diagnostics: dict | None = None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class ConstantInputError(GammaEError, ValueError):
    """Correlation requested on a constant sequence (undefined)."""
