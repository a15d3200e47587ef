"""Sample and report containers shared by the classic and WALK-ESTIMATE samplers."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Optional


@dataclass
class SampleRecord:
    """One candidate produced by a sampler.

    Classic walkers emit only accepted records with ``p_est`` and ``beta``
    left as ``None``.
    """

    node: int
    accepted: bool
    walk_length: int
    p_est: Optional[float] = None
    beta: Optional[float] = None
    unique_queries: int = 0
    total_queries: int = 0

    def as_row(self) -> dict:
        return asdict(self)


@dataclass
class ExperimentReport:
    method: str
    samples: int = 0
    candidates: int = 0
    rejected: int = 0
    clipped: int = 0
    estimation_failures: int = 0
    unique_queries: int = 0
    total_queries: int = 0
    crawl_queries: int = 0
    forward_steps: int = 0
    backward_steps: int = 0
    backward_runs: int = 0
    sigma: Optional[float] = None
    budget_exhausted: bool = False
    extra: dict = field(default_factory=dict)

    @property
    def steps(self) -> int:
        return self.forward_steps + self.backward_steps

    @property
    def steps_per_sample(self) -> float:
        return self.steps / self.samples if self.samples else float("inf")

    def as_dict(self) -> dict:
        d = asdict(self)
        d["steps"] = self.steps
        return d
