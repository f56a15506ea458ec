"""Line records of the JSONL files written by experiments and sweeps."""

from __future__ import annotations

import math

from pydantic import BaseModel, ConfigDict, field_validator, model_validator


class HeavyCountRecord(BaseModel):
    model_config = ConfigDict(frozen=True)

    circuit_seed: int
    heavy_count: int
    shots: int

    @model_validator(mode="after")
    def counts_in_range(self) -> "HeavyCountRecord":
        if self.shots < 0:
            raise ValueError("shots must be non-negative")
        if not 0 <= self.heavy_count <= self.shots:
            raise ValueError("heavy_count must lie in [0, shots]")
        return self


class SimulationRecord(BaseModel):
    model_config = ConfigDict(frozen=True)

    seed: int
    n: int
    level: str
    model: str
    eps: float
    ideal_heavy_prob: float
    noisy_heavy_prob: float

    @field_validator("ideal_heavy_prob", "noisy_heavy_prob", mode="after")
    @classmethod
    def probability(cls, v: float) -> float:
        if not (math.isfinite(v) and -1e-9 <= v <= 1 + 1e-9):
            raise ValueError("heavy probabilities must lie in [0, 1]")
        return min(max(v, 0.0), 1.0)
