"""Small input-validation helpers shared by the core modules."""

from __future__ import annotations

import math
from typing import Iterable, Sequence

from .errors import InvalidInputError

Vec3 = tuple[float, float, float]


def check_finite_position(position: Sequence[float]) -> Vec3:
    """Coerce to a 3-tuple of finite floats, or raise InvalidInputError."""
    values = tuple(float(v) for v in position)
    if len(values) != 3:
        raise InvalidInputError(f"position must have 3 components, got {len(values)}")
    if not all(math.isfinite(v) for v in values):
        raise InvalidInputError(f"position components must be finite, got {values}")
    return values


def check_nonempty_instruction(instruction: str) -> str:
    if not isinstance(instruction, str) or not instruction.strip():
        raise InvalidInputError("instruction must be non-empty after whitespace trim")
    return instruction


def check_positive(name: str, value: float) -> None:
    if not value > 0:
        raise InvalidInputError(f"{name} must be > 0, got {value}")


def check_at_least(name: str, value: int, minimum: int) -> None:
    if value < minimum:
        raise InvalidInputError(f"{name} must be >= {minimum}, got {value}")


def check_binary_entries(rows: Iterable[Iterable[int]]) -> None:
    for r, row in enumerate(rows):
        for c, value in enumerate(row):
            if value not in (0, 1):
                raise InvalidInputError(
                    f"grounding entries must be 0 or 1, got {value!r} at ({r}, {c})"
                )
