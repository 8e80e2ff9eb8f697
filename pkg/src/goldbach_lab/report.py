"""Uniform container pairing a measured quantity with an analytic bound."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field


@dataclass
class BoundReport:
    """A bound evaluated next to the quantity it is supposed to control.

    ``terms`` itemizes the pieces of the bound, ``slack`` is
    ``measured / bound`` (``nan`` when undefined) and ``holds`` says
    whether ``measured <= bound`` up to ``rel_tol``.
    """

    name: str
    measured: float
    bound: float
    terms: dict = field(default_factory=dict)
    params: dict = field(default_factory=dict)
    flags: list = field(default_factory=list)
    rel_tol: float = 0.0
    extra: dict = field(default_factory=dict)

    @property
    def slack(self) -> float:
        if self.bound == 0 or not math.isfinite(self.bound):
            return math.nan
        return self.measured / self.bound

    @property
    def holds(self) -> bool:
        if math.isnan(self.measured) or math.isnan(self.bound):
            return False
        return self.measured <= self.bound * (1.0 + self.rel_tol)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["slack"] = self.slack
        d["holds"] = self.holds
        return d
