"""
Exception hierarchy for kripkeu
kripkeu 使用的异常类型
"""

from __future__ import annotations

from typing import Sequence


class KripkeuError(Exception):
    """Base class for every error raised by the library."""


class ResourceLimitError(KripkeuError):
    """A configured cap was hit; carries the level reached and partial counts."""

    def __init__(self, message: str, level: int | None = None, counts: Sequence[int] = ()):
        super().__init__(message)
        self.level = level
        self.counts = tuple(counts)


class FormulaSyntaxError(KripkeuError, ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (位置 {position})")
        self.position = position


class VariableRangeError(KripkeuError, ValueError):
    pass


class AmbientMismatchError(KripkeuError, ValueError):
    pass


class DepthInsufficientError(KripkeuError, ValueError):
    pass


class PreconditionError(KripkeuError, ValueError):
    pass


class NotReducedError(PreconditionError):
    pass


class InvalidPosetError(KripkeuError, ValueError):
    pass


class InvalidModelError(KripkeuError, ValueError):
    pass


class InvariantError(KripkeuError, RuntimeError):
    """An internal invariant failed; always a bug, never a user error."""


class EmbeddingError(InvariantError):
    """Lookup failure while embedding a reduced model."""


class UndecidableError(KripkeuError):
    """The descriptor does not carry enough information to answer."""


__all__ = [
    "KripkeuError",
    "ResourceLimitError",
    "FormulaSyntaxError",
    "VariableRangeError",
    "AmbientMismatchError",
    "DepthInsufficientError",
    "PreconditionError",
    "NotReducedError",
    "InvalidPosetError",
    "InvalidModelError",
    "InvariantError",
    "EmbeddingError",
    "UndecidableError",
]
