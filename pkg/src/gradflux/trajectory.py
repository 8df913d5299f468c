from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional

from .profile import Profile, ThetaField


@dataclass
class Trajectory:
    """Snapshots ``(t, u(t,.), theta(t,.))`` of one run on a common domain."""

    domain: object
    times: List[float]
    profiles: List[Profile]
    thetas: List[Optional[ThetaField]]
    label: str = ""
    states: Optional[list] = None  # solver states per snapshot, when available
    events: list = field(default_factory=list)

    def __post_init__(self):
        if not (len(self.times) == len(self.profiles) == len(self.thetas)):
            raise ValueError("times, profiles and thetas must have equal length")
        if any(t1 <= t0 for t0, t1 in zip(self.times, self.times[1:])):
            raise ValueError("snapshot times must be strictly increasing")

    def __len__(self):
        return len(self.times)

    def at(self, t, tol=1e-12):
        for k, tk in enumerate(self.times):
            if abs(tk - t) <= tol:
                return self.profiles[k]
        raise KeyError(t)
