"""
Pydantic schemas for SHUFFLE_POSETS
Defines contexts, run limits and the JSON documents read or written by the CLI.
"""
import os
from fractions import Fraction
from typing import Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator


class ShuffleContext(BaseModel):
    """
    Sizes of the two alphabets of a poset of shuffles W_{M,N}.

    Fields:
    - lower_size: M, number of letters a_1..a_M (deleted going up)
    - upper_size: N, number of letters x_1..x_N (inserted going up)
    """

    model_config = ConfigDict(frozen=True)

    lower_size: int = Field(..., ge=0)
    upper_size: int = Field(..., ge=0)

    @property
    def total_rank(self) -> int:
        """Rank M+N of the top element."""
        return self.lower_size + self.upper_size


class RunLimits(BaseModel):
    """
    Caps applied before expensive constructions.

    Fields:
    - max_rank: largest M+N accepted for an explicit poset (env SHUFFLES_MAX_RANK)
    - max_isomorphism_size: largest poset handed to the isomorphism search
    """

    max_rank: int = Field(default=8, ge=0)
    max_isomorphism_size: int = Field(default=1000, ge=1)

    @classmethod
    def from_env(cls) -> "RunLimits":
        """Read limits from the environment, falling back to defaults."""
        raw = os.environ.get("SHUFFLES_MAX_RANK")
        if raw is None or raw.strip() == "":
            return cls()
        try:
            return cls(max_rank=int(raw))
        except ValueError as e:
            raise ValueError(f"SHUFFLES_MAX_RANK must be a non-negative integer, got {raw!r}") from e


def parse_rational(text) -> Fraction:
    """Parse "p/q", an integer or a Fraction into an exact rational."""
    if isinstance(text, Fraction):
        return text
    if isinstance(text, int):
        return Fraction(text)
    try:
        return Fraction(str(text).strip())
    except (ValueError, ZeroDivisionError) as e:
        raise ValueError(f"Not an exact rational: {text!r}") from e


class MultiplicativeTableSchema(BaseModel):
    """
    JSON table of a multiplicative function on the infinite poset of shuffles.

    Example: {"trunc": [2, 2], "values": {"0,0": "1", "1,0": "1/2"}}
    Missing entries inside the truncation are zero.
    """

    trunc: tuple[int, int]
    values: dict[str, str]

    model_config = ConfigDict(
        json_schema_extra={
            "example": {"trunc": [1, 1], "values": {"0,0": "1", "1,0": "1", "0,1": "1", "1,1": "1"}}
        }
    )

    @field_validator("trunc")
    @classmethod
    def validate_trunc(cls, v):
        """Truncation bounds must be non-negative."""
        if v[0] < 0 or v[1] < 0:
            raise ValueError("Truncation bounds must be non-negative")
        return v

    @field_validator("values")
    @classmethod
    def validate_values(cls, v):
        """Keys are "i,j" pairs, values exact rationals, and f(0,0) = 1."""
        for key, value in v.items():
            parts = key.split(",")
            if len(parts) != 2 or not all(p.strip().isdigit() for p in parts):
                raise ValueError(f"Table key must look like 'i,j': {key!r}")
            parse_rational(value)
        if parse_rational(v.get("0,0", "0")) != 1:
            raise ValueError("Multiplicative function must satisfy f(0,0) = 1")
        return v

    def entries(self) -> dict[tuple[int, int], Fraction]:
        """Values keyed by (i, j), restricted to the truncation."""
        tx, ty = self.trunc
        out: dict[tuple[int, int], Fraction] = {}
        for key, value in self.values.items():
            i, j = (int(p) for p in key.split(","))
            if i <= tx and j <= ty:
                out[(i, j)] = parse_rational(value)
        return out


class OrbitRecord(BaseModel):
    """One orbit of maximal chains as reported by the CLI."""

    size: int = Field(..., ge=1)
    type: list[int]
    multiset: list[str]
    shape: list[int]
    representative: list[str]


class FindingRecord(BaseModel):
    """Serialized verification finding."""

    id: str
    suite: str
    title: str
    passed: bool
    description: str
    witness: Optional[dict] = None
