"""Verdict and estimate records returned by testers and estimators."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from enum import Enum


class Decision(str, Enum):
    ACCEPT = "accept"
    REJECT = "reject"


@dataclass
class TestVerdict:
    """Outcome of one tester run.

    ``samples_used`` maps a source name (``"p"``, ``"q"``) to the number of
    draws the run took from it. ``details`` carries per-stage statistics.
    """

    __test__ = False  # not a pytest class

    decision: Decision
    params: dict
    samples_used: dict
    details: dict = field(default_factory=dict)

    @property
    def accepted(self) -> bool:
        return self.decision is Decision.ACCEPT

    @property
    def total_samples(self) -> int:
        return sum(self.samples_used.values())

    def to_json(self) -> dict:
        out = asdict(self)
        out["decision"] = self.decision.value
        return out


@dataclass
class EstimateReport:
    """Numeric EMD estimate with its declared additive error target."""

    estimate: float
    eps: float
    samples_used: dict
    grid_side: float | None = None
    seed: int | None = None
    details: dict = field(default_factory=dict)

    @property
    def total_samples(self) -> int:
        return sum(self.samples_used.values())

    def to_json(self) -> dict:
        return asdict(self)


def decide(reject: bool) -> Decision:
    return Decision.REJECT if reject else Decision.ACCEPT
