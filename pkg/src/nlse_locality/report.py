"""Signal reports shared by the symbolic tests and the simulator."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Union

from .gaussian import ExactScalar

TESTS = ("test1", "test2", "test3", "test4", "appendix")


def fmt_float(v: float) -> str:
    return format(float(v), ".17g")


@dataclass(frozen=True)
class SignalReport:
    """One measured or computed lambda-sensitivity.

    Symbolic values are exact and carry no error bar.  Numeric values carry a
    step-size based estimate; ``status`` is ``"zero"`` when the value is
    compatible with 0, ``"inconclusive"`` when the error bar exceeds half of a
    nonzero value and ``"resolved"`` otherwise.
    """

    test: str
    n: int
    value: Union[ExactScalar, float]
    provenance: str
    k: float = 0.0
    params: Dict[str, Any] = field(default_factory=dict)
    error: Optional[float] = None

    def __post_init__(self):
        if self.test not in TESTS:
            raise ValueError(f"unknown test id {self.test!r}")
        if self.provenance == "symbolic":
            if self.error is not None:
                raise ValueError("symbolic values carry no error bar")
        elif self.provenance == "numeric":
            if self.error is None or not self.error >= 0:
                raise ValueError("numeric values need a non-negative error estimate")
        else:
            raise ValueError(f"unknown provenance {self.provenance!r}")

    @property
    def status(self) -> str:
        if self.provenance == "symbolic":
            return "exact"
        v = abs(float(self.value))
        if v <= self.error:
            return "zero"
        return "inconclusive" if self.error > 0.5 * v else "resolved"

    @property
    def inconclusive(self) -> bool:
        return self.status == "inconclusive"

    def to_row(self) -> Dict[str, Any]:
        exact = isinstance(self.value, ExactScalar)
        return {
            "test": self.test,
            "n": self.n,
            "k": self.k,
            "params": dict(sorted(self.params.items())),
            "value": str(self.value) if exact else float(self.value),
            "error": self.error,
            "provenance": self.provenance,
            "status": self.status,
        }
