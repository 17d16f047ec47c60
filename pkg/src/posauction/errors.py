"""Exception hierarchy.

Two families matter to callers: ``InputError`` (bad documents, bad
arguments, invalid instances) and ``InvariantViolation`` (a property the
library guarantees did not hold at run time).  The CLI maps them to exit
codes 1 and 2.
"""

from __future__ import annotations

from dataclasses import dataclass


class AuctionError(Exception):
    """Base class for every error raised by this package."""


class InputError(AuctionError, ValueError):
    pass


class InvariantViolation(AuctionError):
    pass


@dataclass(frozen=True)
class Violation:
    code: str
    message: str

    def __str__(self) -> str:
        return f"{self.code}: {self.message}"


class InstanceError(InputError):
    """An instance broke one or more invariants; ``violations`` lists all of them."""

    def __init__(self, violations: list[Violation]):
        self.violations = list(violations)
        super().__init__("; ".join(str(v) for v in self.violations))

    @property
    def codes(self) -> list[str]:
        return [v.code for v in self.violations]


class ParseError(InputError):
    def __init__(self, message: str, field: str | None = None, line: int | None = None):
        self.field = field
        self.line = line
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field {field!r}")
        prefix = f"[{', '.join(where)}] " if where else ""
        super().__init__(prefix + message)


class ModelProfileMismatch(InputError):
    pass


class SlotIndexError(InputError, IndexError):
    pass


class GridTooSmall(InputError):
    pass


class SlotEmpty(InputError):
    pass


class NotOrdered(InputError):
    pass


class NoCandidates(InputError):
    pass


class InstanceTooLarge(InputError):
    pass


class InfeasibleConfig(InputError):
    pass


class TooManyPositions(InputError):
    pass


class PreconditionNotMet(InputError):
    pass


class ZeroOptimal(InputError):
    pass


class EpsilonOutOfRange(InputError):
    pass


class NotShown(InputError):
    pass


class ZeroClickRate(InputError):
    pass


class MonotonicityViolation(InvariantViolation):
    pass


class NonMonotoneOccupancy(InvariantViolation):
    pass


class SignViolation(InvariantViolation):
    pass


class NonPositiveEpsilon(EpsilonOutOfRange):
    pass


class NonPositiveLambda(InputError):
    pass
