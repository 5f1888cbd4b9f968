"""Scalar special functions: Lambert-W (principal branch), the regularized
incomplete beta function and log-gamma."""

from __future__ import annotations

import math
from dataclasses import dataclass

_INV_E = math.exp(-1.0)
_BRANCH_TOL = 1e-12
_MAX_ITER = 100


class DomainError(ValueError):
    """Argument outside the domain of a special function."""


@dataclass(frozen=True)
class RealInterval:
    lo: float
    hi: float

    def __post_init__(self):
        if not self.lo <= self.hi:
            raise ValueError(f"empty interval [{self.lo}, {self.hi}]")

    def __contains__(self, x: float) -> bool:
        return self.lo <= x <= self.hi

    def midpoint(self) -> float:
        return 0.5 * (self.lo + self.hi)


def log_gamma(x: float) -> float:
    """Natural log of the gamma function for ``x > 0``."""
    if not x > 0:
        raise DomainError(f"log_gamma requires x > 0, got {x}")
    return math.lgamma(x)


def _w0_initial(x: float) -> float:
    if x < -0.25:
        # branch-point series in q = sqrt(2(ex + 1))
        q = math.sqrt(max(0.0, 2.0 * (math.e * x + 1.0)))
        return -1.0 + q - q * q / 3.0 + 11.0 / 72.0 * q**3
    if x < 3.0:
        return math.log1p(x) * (1.0 - math.log1p(math.log1p(x)) / (2.0 + math.log1p(x)))
    lx = math.log(x)
    return lx - math.log(lx)


def lambert_w0(x: float) -> float:
    """Principal branch of the Lambert-W function.

    Returns the unique ``w >= -1`` with ``w * exp(w) == x``. Halley iteration
    from a series/logarithmic start; an iterate that leaves the bracket
    ``[-1, max(1, log1p(x))]`` is replaced by the bracket midpoint.
    """
    x = float(x)
    if math.isnan(x):
        raise DomainError("lambert_w0 of NaN")
    if x < -_INV_E - _BRANCH_TOL:
        raise DomainError(f"lambert_w0 requires x >= -1/e, got {x}")
    if x <= -_INV_E:
        return -1.0
    if x == 0.0:
        return 0.0
    if math.isinf(x):
        return math.inf

    bracket = RealInterval(-1.0, max(1.0, math.log1p(x)))
    w = min(max(_w0_initial(x), bracket.lo), bracket.hi)
    for _ in range(_MAX_ITER):
        ew = math.exp(w)
        f = w * ew - x
        if f == 0.0:
            return w
        # shrink the bracket: w*e^w is increasing on [-1, inf)
        if f > 0:
            bracket = RealInterval(bracket.lo, w)
        else:
            bracket = RealInterval(w, bracket.hi)
        wp1 = w + 1.0
        denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1) if wp1 != 0.0 else 0.0
        w_new = w - f / denom if denom != 0.0 else bracket.midpoint()
        if not (bracket.lo <= w_new <= bracket.hi) or math.isnan(w_new):
            w_new = bracket.midpoint()
        if abs(w_new - w) <= 1e-15 * (1.0 + abs(w_new)):
            return w_new
        w = w_new
    return w


def _beta_continued_fraction(a: float, b: float, x: float) -> float:
    # modified Lentz evaluation of the incomplete beta continued fraction
    tiny = 1e-300
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < tiny:
        d = tiny
    d = 1.0 / d
    h = d
    for m in range(1, 10_000):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        d = tiny if abs(d) < tiny else d
        c = 1.0 + aa / c
        c = tiny if abs(c) < tiny else c
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        d = tiny if abs(d) < tiny else d
        c = 1.0 + aa / c
        c = tiny if abs(c) < tiny else c
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 1e-16:
            return h
    raise ArithmeticError(f"incomplete beta continued fraction did not converge (a={a}, b={b}, x={x})")


def regularized_incomplete_beta(a: float, b: float, x: float) -> float:
    """``P(Beta(a, b) <= x)`` via the continued fraction, flipping to the
    complementary tail when ``x > (a + 1) / (a + b + 2)``."""
    if not (a > 0 and b > 0):
        raise DomainError(f"shape parameters must be positive, got a={a}, b={b}")
    if not 0.0 <= x <= 1.0:
        raise DomainError(f"x must lie in [0, 1], got {x}")
    if x == 0.0:
        return 0.0
    if x == 1.0:
        return 1.0
    if a == b and x == 0.5:
        return 0.5

    log_front = (
        log_gamma(a + b) - log_gamma(a) - log_gamma(b) + a * math.log(x) + b * math.log1p(-x)
    )
    front = math.exp(log_front)
    if x <= (a + 1.0) / (a + b + 2.0):
        value = front * _beta_continued_fraction(a, b, x) / a
    else:
        value = 1.0 - front * _beta_continued_fraction(b, a, 1.0 - x) / b
    return min(1.0, max(0.0, value))
