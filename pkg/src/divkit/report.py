"""Machine-readable outcome of a verified identity."""
from __future__ import annotations

from dataclasses import dataclass, field

__all__ = ["PropertyReport"]


@dataclass
class PropertyReport:
    """Outcome of one numerically verified identity."""

    name: str
    lhs: float
    rhs: float
    rtol: float = 1e-8
    atol: float = 0.0
    abs_err: float = field(init=False)
    rel_err: float = field(init=False)
    passed: bool = field(init=False)

    def __post_init__(self):
        self.abs_err = abs(self.lhs - self.rhs)
        scale = max(abs(self.lhs), abs(self.rhs))
        self.rel_err = self.abs_err / scale if scale > 0 else 0.0
        self.passed = bool(self.rel_err <= self.rtol or self.abs_err <= self.atol)

    def to_dict(self):
        return {
            "name": self.name,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "abs_err": self.abs_err,
            "rel_err": self.rel_err,
            "pass": self.passed,
        }
