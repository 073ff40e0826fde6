"""
Exception hierarchy.

Every error raised on purpose by eicsr derives from EicsrError so the
command surface can turn it into an ErrorResponse.
"""
from typing import Any


class EicsrError(Exception):
    """Base error carrying a stable error code and optional details."""

    error: str = "EicsrError"

    def __init__(self, message: str, **details: Any) -> None:
        super().__init__(message)
        self.message = message
        self.details: dict[str, Any] = details


class ExprSyntaxError(EicsrError):
    """Malformed formula text; `offset` is the byte offset of the problem."""

    error = "SyntaxError"

    def __init__(self, message: str, offset: int) -> None:
        super().__init__(f"{message} at offset {offset}", offset=offset)
        self.offset = offset


class UnknownSymbolError(EicsrError):
    error = "UnknownSymbol"

    def __init__(self, name: str, offset: int) -> None:
        super().__init__(f"unknown symbol {name!r} at offset {offset}", symbol=name, offset=offset)
        self.symbol = name
        self.offset = offset


class ArityError(EicsrError):
    error = "ArityError"


class DatasetError(EicsrError):
    error = "DatasetError"


class DomainError(EicsrError):
    error = "DomainError"


class InsufficientDataError(EicsrError):
    error = "InsufficientData"


class DegenerateFitError(EicsrError):
    error = "DegenerateFit"


class BudgetZeroError(EicsrError):
    error = "BudgetZero"


class FilterExhaustedError(EicsrError):
    error = "FilterExhausted"


class EmptyCorpusError(EicsrError):
    error = "EmptyCorpus"


class BinMismatchError(EicsrError):
    error = "BinMismatch"
