"""Brute-force references used to cross-check the main code paths.

None of these reuse the quadrature or the adaptive kernel summation: the
log-Gamma is a Stirling series of its own, the pure-weight norms come from
the Gamma integral, and the exhaustive kernel adds every mode.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .errors import DomainError
from .kernel import KernelContext
from .weight import log_h0

__all__ = ["OracleConfig", "log_gamma", "pure_J_exact", "exhaustive_kernel"]

_SHIFT = 30.0


@dataclass(frozen=True)
class OracleConfig:
    points: int = 10**6
    stirling_terms: int = 8

    def __post_init__(self):
        if self.points < 10**4:
            raise ValueError("points must be >= 1e4")
        if not 3 <= self.stirling_terms <= 10:
            raise ValueError("stirling_terms must lie in [3, 10]")


def _bernoulli(n: int) -> list[Fraction]:
    b = [Fraction(1)]
    for m in range(1, n + 1):
        b.append(-sum(math.comb(m + 1, j) * b[j] for j in range(m)) / (m + 1))
    return b


_B = _bernoulli(20)


def log_gamma(x: float, stirling_terms: int = 8) -> float:
    """``log Gamma(x)`` for ``x >= 1``.

    Arguments below 30 are pushed up with ``Gamma(x+1) = x Gamma(x)``; the
    Stirling series is then summed to ``stirling_terms`` corrections, whose
    first omitted term is below 1e-30 there.
    """
    if x < 1:
        raise DomainError(f"log_gamma oracle needs x >= 1, got {x}")
    shift = []
    while x < _SHIFT:
        shift.append(math.log(x))
        x += 1.0
    series = [(x - 0.5) * math.log(x), -x, 0.5 * math.log(2.0 * math.pi)]
    for m in range(1, stirling_terms + 1):
        series.append(float(_B[2 * m]) / (2 * m * (2 * m - 1) * x ** (2 * m - 1)))
    return math.fsum(series) - math.fsum(shift)


def pure_J_exact(k: int, a: float) -> float:
    """``log J_a`` for ``h0 = t^2``: ``log Gamma(2k+1) - (2k+1) log a``.

    The part of the Gamma integral below ``k^(1/3)`` is dropped; the
    precondition keeps it far below double precision.
    """
    if a * k ** (1.0 / 3.0) > k:
        raise DomainError("pure_J_exact needs a * k^(1/3) <= k")
    return log_gamma(2.0 * k + 1.0) - (2.0 * k + 1.0) * math.log(a)


def exhaustive_kernel(ctx: KernelContext, t: float) -> float:
    """``log B_{k+1}(t)`` summing every mode ``1..i_max`` with no cutoff."""
    ctx.check_kernel_t(t)
    base = (ctx.k + 1) * log_h0(ctx.weight, t)
    logs = sorted(base - i * t - ctx.log_J(i) for i in range(1, ctx.i_max + 1))
    top = logs[-1]
    return top + math.log(math.fsum(math.exp(v - top) for v in logs))
