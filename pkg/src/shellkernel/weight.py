"""The model weight ``h0(t) = t**2 (1 + B log t / t + A / t + kappa(t))``.

Also the exponent ``g_a(t) = k log h0(t) - a t`` of the monomial norm
integrals, its first two derivatives, the location ``t_a`` of its unique
maximum and the closed-form expansion of ``t_a`` in ``2k/a``.  The overall
constant in front of ``h0`` is normalised to one; it cancels from every
ratio computed downstream.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import phgseries
from .errors import ConvergenceError, DomainError
from .phgseries import PhgSeries

__all__ = [
    "ModelWeight",
    "BAlphaInput",
    "b_alpha",
    "log_h0",
    "g_a",
    "dg_a",
    "d2g_a",
    "relative_g",
    "find_peak",
    "t_a_asymptotic",
]

_TMIN_BRACKET = (2.0, 1e6)
MAX_PEAK_ITER = 80


@dataclass(frozen=True)
class BAlphaInput:
    n: int
    ratio: float

    def __post_init__(self):
        if self.n < 2:
            raise ValueError(f"complex dimension must be >= 2, got {self.n}")


def b_alpha(inp: BAlphaInput) -> float:
    """The log-coefficient ``B = 4(n-1)/3 * [D].K^(n-2) / K^(n-1)``."""
    return 4.0 * (inp.n - 1) * inp.ratio / 3.0


@dataclass(frozen=True)
class ModelWeight:
    """Parameters ``(A, B, kappa)`` of the model weight.

    ``kappa`` holds the corrections beyond ``1/t``; its exponents must lie
    in ``(1, 6]``.  ``t_min`` is the point beyond which ``h0 > 0``; it is
    located once, at construction.
    """

    A: float = 0.0
    B: float = 0.0
    kappa: PhgSeries = field(default_factory=PhgSeries)
    t_min: float = field(init=False, repr=False)
    _tail: PhgSeries = field(init=False, repr=False, compare=False)
    _dtail: PhgSeries = field(init=False, repr=False, compare=False)
    _d2tail: PhgSeries = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not (math.isfinite(self.A) and math.isfinite(self.B)):
            raise ValueError("A and B must be finite")
        if not self.kappa.is_empty():
            if self.kappa.min_expo() <= 1:
                raise ValueError(f"kappa exponents must exceed 1, found t^-{self.kappa.min_expo()}")
            if self.kappa.max_expo() > 6:
                raise ValueError(f"kappa exponents must not exceed 6, found t^-{self.kappa.max_expo()}")
        order = max(phgseries.DEFAULT_ORDER, self.kappa.order)
        tail = PhgSeries({(1, 1): self.B, (1, 0): self.A}, order=order) + self.kappa.truncate(order)
        dtail = phgseries.derivative(tail)
        object.__setattr__(self, "_tail", tail)
        object.__setattr__(self, "_dtail", dtail)
        object.__setattr__(self, "_d2tail", phgseries.derivative(dtail))
        object.__setattr__(self, "t_min", self._locate_t_min())

    @property
    def is_pure(self) -> bool:
        return self._tail.is_empty()

    @property
    def tail(self) -> PhgSeries:
        """``h0(t)/t**2 - 1`` as a series."""
        return self._tail

    def _locate_t_min(self) -> float:
        if self.is_pure:
            return _TMIN_BRACKET[0]
        grid = np.geomspace(*_TMIN_BRACKET, 4000)
        vals = 1.0 + phgseries.evaluate_array(self._tail, grid)
        bad = np.nonzero(vals <= 0)[0]
        if bad.size == 0:
            return _TMIN_BRACKET[0]
        j = int(bad[-1])
        if j == grid.size - 1:
            raise ValueError("h0 is not positive anywhere below t = 1e6")
        lo, hi = float(grid[j]), float(grid[j + 1])
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if 1.0 + phgseries.evaluate(self._tail, mid) <= 0:
                lo = mid
            else:
                hi = mid
            if hi - lo <= 1e-14 * hi:
                break
        return hi * (1 + 1e-12)

    def u(self, t):
        return self._tail(t)

    def du(self, t):
        return self._dtail(t)

    def d2u(self, t):
        return self._d2tail(t)

    def kappa_prime(self, t: float) -> float:
        return phgseries.evaluate(phgseries.derivative(self.kappa), t) if not self.kappa.is_empty() else 0.0

    def check_domain(self, t) -> None:
        if np.any(np.asarray(t) < self.t_min):
            raise DomainError(f"t must be >= t_min = {self.t_min:.6g} for this weight")


def log_h0(w: ModelWeight, t):
    """``2 log t + log(1 + u(t))``; scalar or array ``t``."""
    w.check_domain(t)
    u = w.u(t)
    if np.any(u <= -1.0):
        raise DomainError("h0 is not positive at the requested t")
    if np.ndim(t):
        return 2.0 * np.log(t) + np.log1p(u)
    return 2.0 * math.log(t) + math.log1p(u)


def g_a(w: ModelWeight, k: int, a: float, t):
    return k * log_h0(w, t) - a * t


def dg_a(w: ModelWeight, k: int, a: float, t):
    """First derivative of ``g_a``, differentiated analytically."""
    w.check_domain(t)
    return k * (2.0 / t + w.du(t) / (1.0 + w.u(t))) - a


def d2g_a(w: ModelWeight, k: int, a: float, t):
    w.check_domain(t)
    one_plus = 1.0 + w.u(t)
    q = w.du(t) / one_plus
    return k * (-2.0 / t**2 + w.d2u(t) / one_plus - q * q)


def relative_g(w: ModelWeight, k: int, a: float, t, t0: float):
    """``g_a(t) - g_a(t0)`` without forming the two O(k log k) values."""
    w.check_domain(t)
    t = np.asarray(t, dtype=float)
    if w.is_pure:
        log_ratio = 2.0 * np.log(t / t0)
    else:
        u0 = w.u(t0)
        log_ratio = 2.0 * np.log(t / t0) + np.log1p((w.u(t) - u0) / (1.0 + u0))
    out = k * log_ratio - a * (t - t0)
    return float(out) if out.ndim == 0 else out


def find_peak(w: ModelWeight, k: int, a: float) -> float:
    """Unique maximiser ``t_a`` of ``g_a``.

    Newton iteration started at ``2k/a``, safeguarded by bisection on a
    bracket where ``g_a'`` changes sign.
    """
    if k < 1:
        raise DomainError(f"k must be >= 1, got {k}")
    if not a > 0:
        raise DomainError(f"a must be positive, got {a}")
    lo = max(w.t_min, k / a)
    hi = 4.0 * k / a
    while hi <= lo:
        hi *= 2.0
    flo, fhi = dg_a(w, k, a, lo), dg_a(w, k, a, hi)
    if flo <= 0 or fhi >= 0:
        raise ConvergenceError(
            f"no sign change of g_a' on [{lo:.6g}, {hi:.6g}] for k={k}, a={a}; "
            "weight outside the validity regime"
        )
    tol = 1e-10 * a
    x = min(max(2.0 * k / a, lo), hi)
    for _ in range(MAX_PEAK_ITER):
        f = dg_a(w, k, a, x)
        if abs(f) <= tol:
            return x
        if f > 0:
            lo = x
        else:
            hi = x
        d2 = d2g_a(w, k, a, x)
        step_ok = d2 < 0
        if step_ok:
            nx = x - f / d2
            step_ok = lo < nx < hi
        x = nx if step_ok else 0.5 * (lo + hi)
        if hi - lo <= 4 * np.finfo(float).eps * hi:
            f = dg_a(w, k, a, x)
            if abs(f) <= tol:
                return x
            break
    raise ConvergenceError(f"peak search did not converge for k={k}, a={a}")


def t_a_asymptotic(w: ModelWeight, k: int, a: float) -> float:
    """``2k/a - (B/2) log(2k/a) + (B-A)/2 + (2k^2/a^2) kappa'(2k/a)``."""
    s = 2.0 * k / a
    out = s - 0.5 * w.B * math.log(s) + 0.5 * (w.B - w.A)
    if not w.kappa.is_empty():
        out += 2.0 * k * k / (a * a) * w.kappa_prime(s)
    return out
