"""Model Bergman kernel on the disk ``t = -log|w|^2 > k^(1/3)``.

With ``Lambda_i(t) = h0(t)^k exp(-i t) / J_i`` the kernel is

    B_{k+1}(t) = h0(t) * sum_{i >= 1} Lambda_i(t),

and the truncations ``B_{k+1,a}`` keep only ``i >= a``.  The angular
``2 pi`` of the monomial norms is absorbed into the measure, so that
``B_{k+1}(t_a) ~ 2 k^{3/2} / (sqrt(pi) a)`` on the shells.

Summation starts from the dominant index (the per-term exponent is concave
in ``i``) and walks outward until terms fall 90 log-units below the
maximum; the discarded tails are bounded by geometric series.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field

from .errors import ConvergenceError, DomainError
from .logdomain import logsumexp
from .quadrature import integrate_J, lower_limit
from .weight import ModelWeight, find_peak, log_h0

__all__ = [
    "KernelContext",
    "KernelValue",
    "log_lambda",
    "iota",
    "iota_second_difference",
    "bergman",
    "bergman_truncated",
    "mode_fraction",
]

CUTOFF_LOG_UNITS = 90.0
MAX_TRUNCATION_REL = 1e-30


def _index_key(i):
    f = float(i)
    return int(f) if f.is_integer() else f


class KernelContext:
    """``(k, weight)`` plus thread-safe caches of ``log J_i`` and ``t_i``."""

    def __init__(self, k: int, weight: ModelWeight | None = None, rel_tol: float = 1e-10):
        if int(k) != k or k < 100:
            raise DomainError(f"k must be an integer >= 100, got {k}")
        self.k = int(k)
        self.weight = weight if weight is not None else ModelWeight()
        self.rel_tol = rel_tol
        self.i_max = math.ceil(2.0 * math.sqrt(self.k) * math.log(self.k))
        self.t_lower = lower_limit(self.k)
        if self.t_lower < self.weight.t_min:
            raise DomainError(
                f"h0 is not positive on [k^(1/3), inf) for k={self.k} (t_min = {self.weight.t_min:.6g})"
            )
        self._logJ: dict = {}
        self._peaks: dict = {}
        self._lock = threading.Lock()
        self._key_locks: dict = {}
        self._t_domain = None

    def __repr__(self):
        return f"KernelContext(k={self.k}, weight={self.weight!r})"

    @property
    def dominance_limit(self) -> int:
        """Index ``ceil(sqrt(k) log k)`` whose peak bounds the kernel domain."""
        return math.ceil(math.sqrt(self.k) * math.log(self.k))

    @property
    def t_domain(self) -> float:
        """Smallest ``t`` at which the kernel is evaluated.

        Beyond the peak of mode ``ceil(sqrt(k) log k)`` the modes above
        ``i_max`` are negligible, so the sum may stop there.
        """
        if self._t_domain is None:
            self._t_domain = max(self.t_lower, find_peak(self.weight, self.k, self.dominance_limit))
        return self._t_domain

    def log_J(self, i) -> float:
        key = _index_key(i)
        try:
            return self._logJ[key]
        except KeyError:
            pass
        with self._lock:
            lock = self._key_locks.setdefault(key, threading.Lock())
        with lock:
            if key not in self._logJ:
                res = integrate_J(self.weight, self.k, key, self.rel_tol)
                self._peaks[key] = res.peak
                self._logJ[key] = res.log_value
        return self._logJ[key]

    def peak(self, i) -> float:
        key = _index_key(i)
        if key not in self._peaks:
            self.log_J(key)
        return self._peaks[key]

    def check_t(self, t: float) -> None:
        if not t >= self.t_lower:
            raise DomainError(f"t = {t:.6g} lies below the disk boundary k^(1/3) = {self.t_lower:.6g}")

    def check_kernel_t(self, t: float) -> None:
        self.check_t(t)
        if t < self.t_domain:
            raise DomainError(
                f"t = {t:.6g} lies below t_(sqrt(k) log k) = {self.t_domain:.6g}; "
                "the i_max cutoff of the kernel sum is not justified there"
            )


@dataclass(frozen=True)
class KernelValue:
    log_total: float
    dominant_index: int
    terms_used: int
    truncation_rel_bound: float
    included: tuple[int, int] = (0, 0)
    log_terms: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def value(self) -> float:
        return math.exp(self.log_total)


def log_lambda(ctx: KernelContext, i: int, t: float) -> float:
    """``log Lambda_i(t) = k log h0(t) - i t - log J_i``."""
    if not 1 <= i <= ctx.i_max:
        raise DomainError(f"index {i} outside [1, {ctx.i_max}]")
    ctx.check_t(t)
    return ctx.k * log_h0(ctx.weight, t) - i * t - ctx.log_J(i)


def iota(ctx: KernelContext, i: float, t: float) -> float:
    """The exponent ``-i t - log J_i``; real ``i >= 1`` allowed."""
    if not 1 <= i <= ctx.i_max:
        raise DomainError(f"index {i} outside [1, {ctx.i_max}]")
    return -i * t - ctx.log_J(i)


def iota_second_difference(ctx: KernelContext, a: float, h: float = 0.5) -> float:
    """Central second difference of ``iota`` in the index (independent of t)."""
    if a - h < 1:
        raise DomainError("stencil reaches below index 1")
    return -(ctx.log_J(a + h) - 2.0 * ctx.log_J(a) + ctx.log_J(a - h)) / (h * h)


def _tail_bound(edge: float, neighbour: float, count: int) -> float:
    """Log bound on ``count`` terms continuing a concave run from ``edge``."""
    step = edge - neighbour
    by_count = edge + math.log(count)
    if step < 0:
        return min(by_count, edge - math.log(-math.expm1(step)))
    return by_count


def _sum_from(ctx: KernelContext, t: float, first: int) -> KernelValue:
    ctx.check_kernel_t(t)
    k, top = ctx.k, ctx.i_max
    lh = log_h0(ctx.weight, t)
    base = (k + 1) * lh
    cache: dict[int, float] = {}

    def term(i: int) -> float:
        if i not in cache:
            cache[i] = base - i * t - ctx.log_J(i)
        return cache[i]

    # unconstrained argmax by hill climbing; concavity makes it global
    i = min(max(int(round(2.0 * k / t)), 1), top)
    while i < top and term(i + 1) > term(i):
        i += 1
    while i > 1 and term(i - 1) > term(i):
        i -= 1
    star = max(i, first)
    peak = term(star)
    logs = [peak]
    tails = []

    j = star + 1
    while j <= top:
        v = term(j)
        if v < peak - CUTOFF_LOG_UNITS:
            tails.append(_tail_bound(v, term(j - 1), top - j + 1))
            break
        logs.append(v)
        j += 1
    else:
        raise ConvergenceError(f"modes up to i_max = {top} are not negligible at t = {t:.6g}")
    hi = j - 1
    j = star - 1
    while j >= first:
        v = term(j)
        if v < peak - CUTOFF_LOG_UNITS:
            tails.append(_tail_bound(v, term(j + 1), j - first + 1))
            break
        logs.append(v)
        j -= 1
    lo = j + 1

    log_total = logsumexp(logs)
    rel = math.exp(logsumexp(tails) - log_total) if tails else 0.0
    if rel > MAX_TRUNCATION_REL:
        raise ConvergenceError(f"truncation bound {rel:.3g} exceeds {MAX_TRUNCATION_REL:g} at t = {t:.6g}")
    return KernelValue(log_total, star, len(logs), rel, (lo, hi), cache)


def bergman(ctx: KernelContext, t: float) -> KernelValue:
    """``log B_{k+1}(t)`` with the dominant mode and a truncation certificate."""
    return _sum_from(ctx, t, 1)


def bergman_truncated(ctx: KernelContext, t: float, a: int) -> KernelValue:
    """Kernel of the modes ``i >= a`` only."""
    if int(a) != a or not 1 <= a <= ctx.i_max:
        raise DomainError(f"a must be an integer in [1, {ctx.i_max}], got {a}")
    return _sum_from(ctx, t, int(a))


def mode_fraction(ctx: KernelContext, t: float, a: int) -> float:
    """Share ``Lambda_a(t) h0(t) / B_{k+1}(t)`` of mode ``a`` in the kernel."""
    total = bergman(ctx, t)
    # reuse the summed logs so that a dominant mode gives exactly 1.0
    term = total.log_terms.get(a)
    if term is None:
        term = log_lambda(ctx, a, t) + log_h0(ctx.weight, t)
    return min(math.exp(term - total.log_total), 1.0)
