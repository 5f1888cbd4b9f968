"""Identify botnet vertices with the inflated isolated-star threshold and score
estimates by the normalised symmetric difference."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from botnet_rgg.detection import DEFAULT_EXACT_CAP, IsolatedStarProfile, StarMethod, isolated_star_profile
from botnet_rgg.geometry import kissing_number
from botnet_rgg.graph import Graph
from botnet_rgg.numerics import DomainError, lambert_w0

DEFAULT_EPSILON = 0.1


def xi_threshold(n: int, k: int, p: float, epsilon: float = DEFAULT_EPSILON) -> float:
    """Threshold inflation ``(1 + eps) L / W0(L / (k p e))`` with ``L = ln(n / k)``."""
    if not 1 <= k < n:
        raise DomainError(f"need 1 <= k < n, got k={k}, n={n}")
    if not 0.0 < p < 1.0:
        raise DomainError(f"p must lie in (0, 1), got {p}")
    if not epsilon > 0:
        raise DomainError(f"epsilon must be positive, got {epsilon}")
    L = math.log(n / k)
    return (1.0 + epsilon) * L / lambert_w0(L / (k * p * math.e))


@dataclass(frozen=True)
class BotnetEstimate:
    suspects: frozenset[int]
    threshold_used: float
    xi: float
    epsilon: float
    topk_suspects: tuple[int, ...] = ()
    star_method: str = "auto"
    greedy_vertices: int = 0
    notes: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "threshold_used": self.threshold_used,
            "xi": self.xi,
            "epsilon": self.epsilon,
            "suspects": sorted(self.suspects),
            "topk_suspects": list(self.topk_suspects),
            "star_method": self.star_method,
            "greedy_vertices": self.greedy_vertices,
            **({"notes": self.notes} if self.notes else {}),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def top_k_by_star(sizes: np.ndarray, k: int) -> tuple[int, ...]:
    """The ``k`` vertices with largest star size, ties to the lower id."""
    order = np.lexsort((np.arange(len(sizes)), -np.asarray(sizes)))
    return tuple(int(v) for v in order[:k])


def identify_botnet(
    g: Graph,
    d: int,
    k: int,
    p: float,
    epsilon: float = DEFAULT_EPSILON,
    *,
    method: StarMethod = "auto",
    cap: int = DEFAULT_EXACT_CAP,
    profile: IsolatedStarProfile | None = None,
) -> BotnetEstimate:
    """Vertices whose isolated star exceeds ``kissing_number(d) + xi``.

    Also reports the ``k`` largest stars, since the threshold set need not
    have exactly ``k`` members.
    """
    xi = max(0.0, xi_threshold(g.n, k, p, epsilon))
    threshold = kissing_number(d) + xi
    if profile is None:
        profile = isolated_star_profile(g, method, cap)
    sizes = profile.per_vertex_star_size
    suspects = frozenset(int(v) for v in np.flatnonzero(sizes > threshold))
    return BotnetEstimate(
        suspects,
        threshold,
        xi,
        float(epsilon),
        top_k_by_star(sizes, k),
        profile.method,
        profile.greedy_count,
    )


@dataclass(frozen=True)
class RiskScore:
    value: float
    missed: int
    false_positive: int


def identification_risk(estimate: Iterable[int], truth: Iterable[int]) -> RiskScore:
    """``|estimate ^ truth| / (2 |truth|)`` for a single sample (not clamped)."""
    est = set(int(v) for v in estimate)
    tru = set(int(v) for v in truth)
    if not tru:
        raise ValueError("true botnet must be nonempty")
    missed = len(tru - est)
    false_pos = len(est - tru)
    return RiskScore((missed + false_pos) / (2 * len(tru)), missed, false_pos)
