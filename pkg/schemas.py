from __future__ import annotations

from typing import Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator


class DomainError(ValueError):
    """Raised when an input violates a documented precondition."""


class BoundViolationError(RuntimeError):
    """Thinning ratio exceeded one: the bound does not dominate the estimator.

    A violated domination invalidates the invariant law of the sampler, so
    runs stop instead of clamping the ratio.
    """

    def __init__(self, coordinate: int, time: float, ratio: float) -> None:
        self.coordinate = coordinate
        self.time = time
        self.ratio = ratio
        super().__init__(
            f"Bound violation for coordinate {coordinate} at clock {time:.6g}: "
            f"acceptance ratio {ratio:.12g} > 1"
        )


class OracleError(RuntimeError):
    """Raised when a rejection oracle accepts nothing."""

    def __init__(self, attempts: int, acceptance_rate: float, detail: str = "") -> None:
        self.attempts = attempts
        self.acceptance_rate = acceptance_rate
        message = f"No accepted paths after {attempts} attempts (acceptance rate {acceptance_rate:.3g})"
        if detail:
            message = f"{message}: {detail}"
        super().__init__(message)


class SkeletonParseError(ValueError):
    """Raised for a malformed skeleton file; `row` is 1-based, header excluded."""

    def __init__(self, path: str, row: Optional[int], detail: str) -> None:
        self.path = path
        self.row = row
        where = f"row {row}" if row is not None else "header"
        super().__init__(f"{path}: {where}: {detail}")


class DyadicIndex(BaseModel):
    """Level/position address of a Faber-Schauder function.

    The single index is n = 2^i + j, so n = 1 is (0, 0) and the
    coefficients of a truncation at level N are n = 1..2^{N+1} - 1.
    """

    model_config = ConfigDict(frozen=True)

    i: int = Field(ge=0)
    j: int = Field(ge=0)

    @model_validator(mode="after")
    def _check_position(self) -> "DyadicIndex":
        if self.j >= 2**self.i:
            raise ValueError(f"position j={self.j} out of range for level i={self.i}")
        return self

    @property
    def n(self) -> int:
        return 2**self.i + self.j

    @classmethod
    def from_index(cls, n: int) -> "DyadicIndex":
        if n < 1:
            raise DomainError(f"single index must be >= 1, got {n}")
        i = n.bit_length() - 1
        return cls(i=i, j=n - 2**i)
