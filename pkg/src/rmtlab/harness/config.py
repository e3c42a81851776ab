"""Experiment configuration, read from and written to JSON."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

from ..errors import InvalidArgumentError

KINDS = ("sample", "kernel-check", "moment", "h-scan", "theorem-verify", "full-suite")
DEFAULT_SEED = 20_240_601


@dataclass
class ExperimentConfig:
    kind: str
    N: list = field(default_factory=lambda: [10])
    a: list = field(default_factory=lambda: [0.01])
    K: list = field(default_factory=lambda: [1.5])
    m: list = field(default_factory=lambda: [3])
    samples: int = 10_000
    seed: int = DEFAULT_SEED
    workers: int = 1
    quadrature: dict = field(default_factory=dict)
    out: str = "results"
    quick: bool = False

    def __post_init__(self):
        self.validate()

    def validate(self) -> "ExperimentConfig":
        if self.kind not in KINDS:
            raise InvalidArgumentError(f"unknown experiment kind {self.kind!r}; expected one of {KINDS}")
        for name in ("N", "a", "K", "m"):
            grid = getattr(self, name)
            if not isinstance(grid, list) or not grid:
                raise InvalidArgumentError(f"grid {name!r} must be a nonempty list")
        if any(isinstance(n, bool) or int(n) != n or n < 1 for n in self.N):
            raise InvalidArgumentError("N values must be positive integers")
        if any(not a > 0 for a in self.a):
            raise InvalidArgumentError("a values must be positive")
        if any(not k >= 0 for k in self.K):
            raise InvalidArgumentError("K values must be nonnegative")
        if any(int(m) != m or m % 2 == 0 or m < 3 for m in self.m):
            raise InvalidArgumentError("m values must be odd integers >= 3")
        if int(self.samples) != self.samples or self.samples < 2:
            raise InvalidArgumentError("samples must be an integer >= 2")
        if int(self.seed) != self.seed or not 0 <= self.seed < 2**64:
            raise InvalidArgumentError("seed must be an unsigned 64-bit integer")
        if int(self.workers) != self.workers or self.workers < 1:
            raise InvalidArgumentError("workers must be a positive integer")
        unknown = set(self.quadrature) - {"rtol", "order"}
        if unknown:
            raise InvalidArgumentError(f"unknown quadrature overrides {sorted(unknown)}")
        self.N = [int(n) for n in self.N]
        self.a = [float(a) for a in self.a]
        self.K = [float(k) for k in self.K]
        self.m = [int(m) for m in self.m]
        self.samples, self.seed, self.workers = int(self.samples), int(self.seed), int(self.workers)
        return self

    @property
    def rtol(self) -> float:
        return float(self.quadrature.get("rtol", 1e-11))

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        fields = set(cls.__dataclass_fields__)
        extra = set(data) - fields
        if extra:
            raise InvalidArgumentError(f"unknown config fields {sorted(extra)}")
        if "kind" not in data:
            raise InvalidArgumentError("config needs a 'kind'")
        return cls(**data)

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))

    def dump(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8")
