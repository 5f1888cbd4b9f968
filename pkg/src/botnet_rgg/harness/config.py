"""Experiment configuration loaded from JSON."""

from __future__ import annotations

import itertools
import json
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any, Iterator

from botnet_rgg.detection import DEFAULT_EXACT_CAP
from botnet_rgg.estimation import DEFAULT_D_MAX

MODES = ("power", "risk", "calibrate", "histogram", "audit")
TESTS = ("star", "distance")
THRESHOLD_SOURCES = ("analytic", "monte_carlo")
STAR_METHODS = ("greedy", "exact", "auto")


class ConfigError(ValueError):
    pass


def _as_list(value) -> list:
    return list(value) if isinstance(value, (list, tuple)) else [value]


@dataclass
class ExperimentConfig:
    mode: str = "power"
    n: list[int] = field(default_factory=lambda: [10_000])
    d: list[int] = field(default_factory=lambda: [2])
    np: list[float] = field(default_factory=lambda: [10.0])
    k: list[int] = field(default_factory=lambda: [10])
    replicates: int = 100
    alphas: list[float] = field(default_factory=lambda: [0.05])
    epsilon: float = 0.1
    seed: int = 0
    tests: list[str] = field(default_factory=lambda: list(TESTS))
    threshold_source: str = "analytic"
    calibration_replicates: int = 5000
    star_method: str = "greedy"
    exact_cap: int = DEFAULT_EXACT_CAP
    d_max: int = DEFAULT_D_MAX
    distance_sample_pairs: int | None = None
    histogram_bin_width: float = 0.005
    workers: int | None = None

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}, got {self.mode!r}")
        for name in ("n", "d", "np", "k"):
            values = _as_list(getattr(self, name))
            if not values:
                raise ConfigError(f"grid {name!r} must be nonempty")
            setattr(self, name, values)
        self.alphas = [float(a) for a in _as_list(self.alphas)]
        self.tests = _as_list(self.tests)
        if self.replicates < 1:
            raise ConfigError("replicates must be >= 1")
        if any(not 0 < a < 1 for a in self.alphas):
            raise ConfigError("alphas must lie in (0, 1)")
        if not 0 < self.epsilon < 1:
            raise ConfigError("epsilon must lie in (0, 1)")
        if not self.tests or any(t not in TESTS for t in self.tests):
            raise ConfigError(f"tests must be a nonempty subset of {TESTS}")
        if self.threshold_source not in THRESHOLD_SOURCES:
            raise ConfigError(f"threshold_source must be one of {THRESHOLD_SOURCES}")
        if self.star_method not in STAR_METHODS:
            raise ConfigError(f"star_method must be one of {STAR_METHODS}")
        if self.calibration_replicates < 1:
            raise ConfigError("calibration_replicates must be >= 1")
        if self.histogram_bin_width <= 0:
            raise ConfigError("histogram_bin_width must be positive")

    def grid(self) -> Iterator[tuple[int, int, float, int]]:
        """Grid points ``(n, d, np, k)`` in a fixed order."""
        return itertools.product(self.n, self.d, self.np, self.k)

    @classmethod
    def from_dict(cls, obj: dict[str, Any]) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(obj) - known
        if unknown:
            raise ConfigError(f"unknown config fields: {sorted(unknown)}")
        return cls(**obj)

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON: {exc}") from None
        if not isinstance(obj, dict):
            raise ConfigError("config must be a JSON object")
        return cls.from_dict(obj)

    @classmethod
    def load(cls, path: str | Path) -> "ExperimentConfig":
        return cls.from_json(Path(path).read_text("utf-8"))

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)
