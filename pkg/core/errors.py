#!/usr/bin/env python3
"""
Verifier Errors - Exception hierarchy shared by every layer of the verifier
"""

from typing import Any, Optional


class VerifierError(Exception):
    """Base class for all verifier errors"""


class TypingError(VerifierError):
    """
    A term, formula or computation is ill-typed

    Args:
        location: Human-readable description of the offending node
        expected: Expected type (or shape) as text
        found: Type actually found as text
    """

    def __init__(self, location: str, expected: Any, found: Any):
        self.location = location
        self.expected = expected
        self.found = found
        super().__init__(f"type error in {location}: expected {expected}, found {found}")


class UnboundVariable(VerifierError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"unbound variable: {name}")


class CarrierTooLarge(VerifierError):
    """A carrier (or table space) exceeds its configured cap"""

    def __init__(self, what: str, size: int, cap: int):
        self.what = what
        self.size = size
        self.cap = cap
        super().__init__(f"carrier of {what} has size {size}, cap is {cap}")


class ResourceLimit(CarrierTooLarge):
    """Predicate or function table enumeration exceeds its cap"""


class InputExhausted(VerifierError):
    """A read happened past the end of a finite input stream"""


class ShapeMismatch(VerifierError):
    pass


class ObservationMismatch(VerifierError):
    pass


class AlgebraLawViolation(VerifierError):
    """An algebra (or observation) does not respect the monad's equations"""

    def __init__(self, message: str, witness: Optional[Any] = None):
        self.witness = witness
        super().__init__(message)


class UnhandledOp(VerifierError):
    def __init__(self, op: str):
        self.op = op
        super().__init__(f"operation has no handler clause or rule: {op}")


class NonTermination(VerifierError):
    pass


class UnsupportedShape(VerifierError):
    pass


class UnknownObservation(VerifierError):
    def __init__(self, key: str):
        self.key = key
        super().__init__(f"unknown observation: {key}")


class ParseError(VerifierError):
    """
    Source text does not match the grammar

    Args:
        line: 1-based line (0 when unknown)
        column: 1-based column (0 when unknown)
        expected: Tokens that would have been accepted
    """

    def __init__(self, message: str, line: int = 0, column: int = 0, expected=()):
        self.line = line
        self.column = column
        self.expected = tuple(sorted(expected))
        where = f"{line}:{column}: " if line else ""
        super().__init__(f"{where}{message}")


class ElaborationError(VerifierError):
    """A parsed program cannot be turned into annotated computations"""

    def __init__(self, message: str, line: int = 0, column: int = 0):
        self.line = line
        self.column = column
        where = f"{line}:{column}: " if line else ""
        super().__init__(f"{where}{message}")
