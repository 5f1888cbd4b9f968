"""Torus metric, ball volume on the torus and kissing numbers."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from typing import Sequence

import numpy as np

from botnet_rgg.numerics import DomainError, log_gamma

LOG_SQRT_PI = 0.5 * math.log(math.pi)
KISSING_GROWTH = 1.3233


class RadiusTooLargeError(DomainError):
    """The connection radius would exceed 1/2, where the ball wraps onto itself."""


@dataclass(frozen=True)
class TorusPoint:
    coords: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "coords", tuple(float(c) for c in self.coords))
        if len(self.coords) < 2:
            raise ValueError("torus points need dimension >= 2")
        if not all(0.0 <= c < 1.0 for c in self.coords):
            raise ValueError(f"coordinates must lie in [0, 1): {self.coords}")

    @property
    def d(self) -> int:
        return len(self.coords)


def torus_distance(x: TorusPoint | Sequence[float], y: TorusPoint | Sequence[float]) -> float:
    """Euclidean distance on the unit torus with per-coordinate wrap-around."""
    xs = np.asarray(x.coords if isinstance(x, TorusPoint) else x, dtype=float)
    ys = np.asarray(y.coords if isinstance(y, TorusPoint) else y, dtype=float)
    if xs.shape != ys.shape:
        raise ValueError(f"dimension mismatch: {xs.shape} vs {ys.shape}")
    diff = np.abs(xs - ys)
    diff = np.minimum(diff, 1.0 - diff)
    return float(math.sqrt(float(np.dot(diff, diff))))


def torus_distances_from(x: Sequence[float], points: np.ndarray) -> np.ndarray:
    """Vectorised torus distance from ``x`` to each row of ``points``."""
    diff = np.abs(np.asarray(points, dtype=float) - np.asarray(x, dtype=float))
    diff = np.minimum(diff, 1.0 - diff)
    return np.sqrt(np.sum(diff * diff, axis=-1))


def _check_dimension(d: int) -> int:
    if int(d) != d or d < 2:
        raise DomainError(f"dimension must be an integer >= 2, got {d}")
    return int(d)


def ball_log_volume(r: float, d: int) -> float:
    return d * (LOG_SQRT_PI + math.log(r)) - log_gamma(d / 2 + 1)


def probability_for_radius(r: float, d: int) -> float:
    """Edge probability ``(sqrt(pi) r)^d / Gamma(d/2 + 1)`` for radius ``r <= 1/2``."""
    d = _check_dimension(d)
    if not 0.0 < r <= 0.5:
        raise DomainError(f"radius must lie in (0, 1/2], got {r}")
    return math.exp(ball_log_volume(r, d))


def radius_for_probability(p: float, d: int) -> float:
    """Inverse of :func:`probability_for_radius`.

    Raises :class:`RadiusTooLargeError` when the ball of probability ``p``
    would need a radius above 1/2.
    """
    d = _check_dimension(d)
    if not 0.0 < p < 1.0:
        raise DomainError(f"edge probability must lie in (0, 1), got {p}")
    r = math.exp((math.log(p) + log_gamma(d / 2 + 1)) / d - LOG_SQRT_PI)
    if r > 0.5:
        # tolerate rounding at the boundary p == p(1/2)
        if r <= 0.5 * (1 + 1e-12):
            return 0.5
        raise RadiusTooLargeError(f"radius {r:.6g} exceeds 1/2 for p={p}, d={d}")
    return r


def max_probability(d: int) -> float:
    """Largest edge probability representable on the torus in dimension ``d``."""
    return probability_for_radius(0.5, d)


@dataclass(frozen=True)
class KissingTable:
    exact_or_best_upper: dict[int, int] = field(default_factory=dict)
    cutoff: int = 24

    def __getitem__(self, d: int) -> int:
        d = _check_dimension(d)
        if d > self.cutoff:
            return math.ceil(KISSING_GROWTH**d)
        return self.exact_or_best_upper[d]

    @classmethod
    def from_text(cls, text: str) -> "KissingTable":
        values: dict[int, int] = {}
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 2:
                raise ValueError(f"kissing table line {lineno}: expected 'd value', got {line!r}")
            values[int(parts[0])] = int(parts[1])
        cutoff = max(values)
        missing = set(range(2, cutoff + 1)) - set(values)
        if missing:
            raise ValueError(f"kissing table has gaps at dimensions {sorted(missing)}")
        return cls(values, cutoff)


@lru_cache(maxsize=1)
def kissing_table() -> KissingTable:
    text = resources.files("botnet_rgg.data").joinpath("kissing_numbers.txt").read_text("utf-8")
    return KissingTable.from_text(text)


def kissing_number(d: int) -> int:
    """Kissing number (or best known upper bound) in dimension ``d``.

    Beyond the tabulated range the exponential bound ``ceil(1.3233^d)`` is used.
    """
    return kissing_table()[d]
