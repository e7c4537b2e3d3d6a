"""Run configuration: the free constants of the constructions, in one place."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, fields
from pathlib import Path

from .freiman import DEFAULT_BUDGET, DEFAULT_M_CAP


@dataclass
class RunConfig:
    epsilon: float | str = "auto"
    m_cap: int = DEFAULT_M_CAP
    rho_grid: float = 1e-3
    budget: int = DEFAULT_BUDGET
    seed: int = 0
    float_eq: float = 1e-9
    psd: float = 1e-12

    def __post_init__(self) -> None:
        if self.epsilon != "auto":
            self.epsilon = float(self.epsilon)
            if self.epsilon <= 0:
                raise ValueError("epsilon must be positive or 'auto'")
        for name in ("m_cap", "budget"):
            if int(getattr(self, name)) < 1:
                raise ValueError(f"{name} must be positive")
        for name in ("rho_grid", "float_eq", "psd"):
            if float(getattr(self, name)) <= 0:
                raise ValueError(f"{name} must be positive")
        self.m_cap = int(self.m_cap)
        self.budget = int(self.budget)
        self.seed = int(self.seed)

    def resolve_epsilon(self, M: int) -> float:
        """'auto' becomes 2^(-4M-2), the largest value keeping 2^(4M-1) eps < 1 with margin."""
        return 2.0 ** (-4 * M - 2) if self.epsilon == "auto" else float(self.epsilon)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_sources(cls, path: str | None = None, overrides: dict | None = None) -> "RunConfig":
        """Merge a JSON config file with explicit overrides (overrides win)."""
        data: dict = {}
        if path:
            data.update(json.loads(Path(path).read_text()))
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        for k, v in (overrides or {}).items():
            if v is not None:
                data[k] = v
        return cls(**data)
