from __future__ import annotations

from dataclasses import dataclass
from typing import Optional


@dataclass(frozen=True)
class Violation:
    """One failed constraint check."""

    constraint: str
    period: Optional[int]  # 1-based, None for horizon-wide rows
    margin: float  # amount by which the limit is exceeded
    detail: str = ""

    def as_dict(self) -> dict:
        return {"constraint": self.constraint, "period": self.period,
                "margin": self.margin, "detail": self.detail}
