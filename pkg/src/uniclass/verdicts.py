"""Three-valued verdicts with replayable witnesses."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .matcore import cmatrix_to_dict

__all__ = ["Value", "Verdict", "YES", "NO", "UNKNOWN", "to_jsonable"]


class Value(str, enum.Enum):
    YES = "yes"
    NO = "no"
    UNKNOWN = "unknown"

    def __str__(self):
        return self.value


YES, NO, UNKNOWN = Value.YES, Value.NO, Value.UNKNOWN


@dataclass(frozen=True)
class Verdict:
    """Outcome of a membership test.

    ``witness`` is a dict of plain values and numpy arrays from which the
    verdict can be re-checked; ``heuristic`` marks a No that rests on a
    numerical search rather than a certified bound.
    """

    value: Value
    witness: dict[str, Any] = field(default_factory=dict)
    heuristic: bool = False

    @property
    def yes(self) -> bool:
        return self.value is YES

    @property
    def no(self) -> bool:
        return self.value is NO

    def to_dict(self) -> dict:
        return {
            "value": self.value.value,
            "heuristic": bool(self.heuristic),
            "witness": to_jsonable(self.witness),
        }


def to_jsonable(obj):
    """Convert witnesses (arrays, complex numbers, enums) to JSON types."""
    if isinstance(obj, Value):
        return obj.value
    if isinstance(obj, Verdict):
        return obj.to_dict()
    if hasattr(obj, "to_dict") and not isinstance(obj, type):
        return obj.to_dict()
    if isinstance(obj, np.ndarray):
        if obj.ndim == 2:
            return cmatrix_to_dict(obj)
        if np.iscomplexobj(obj):
            return {"re": obj.real.tolist(), "im": obj.imag.tolist()}
        return obj.tolist()
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": float(obj.real), "im": float(obj.imag)}
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    return obj
