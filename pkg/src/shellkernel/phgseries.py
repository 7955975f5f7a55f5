"""Finite polyhomogeneous series ``sum c_ij (log t)**j / t**i``.

Exponents ``i`` are exact :class:`fractions.Fraction` values so that terms
merge without any tolerance on the keys.  A series carries a truncation
order ``N``: terms with exponent above ``N`` are discarded by every
operation and the series is understood modulo ``o(t**-N)`` up to logs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Union

import numpy as np

__all__ = [
    "PhgTerm",
    "PhgSeries",
    "DEFAULT_ORDER",
    "add",
    "mul",
    "log1p",
    "exp",
    "shift_substitute",
    "derivative",
    "evaluate",
]

DEFAULT_ORDER = Fraction(6)

Rational = Union[int, Fraction, str]


def _frac(x: Rational) -> Fraction:
    if isinstance(x, float):
        raise TypeError("exponents must be exact rationals (int, Fraction or 'p/q' string)")
    return Fraction(x)


@dataclass(frozen=True)
class PhgTerm:
    """``coeff * (log t)**logpow / t**expo``."""

    expo: Fraction
    logpow: int
    coeff: float

    def __post_init__(self):
        object.__setattr__(self, "expo", _frac(self.expo))
        if self.expo < 0:
            raise ValueError(f"exponent must be >= 0, got {self.expo}")
        if int(self.logpow) != self.logpow or self.logpow < 0:
            raise ValueError(f"log power must be a nonnegative integer, got {self.logpow}")
        object.__setattr__(self, "logpow", int(self.logpow))
        if self.coeff == 0:
            raise ValueError("zero terms are never stored")


class PhgSeries:
    """Immutable finite polyhomogeneous series in canonical (sorted) form."""

    __slots__ = ("_terms", "_order")

    def __init__(self, terms: Iterable[PhgTerm] | Mapping | None = None, order: Rational = DEFAULT_ORDER):
        self._order = _frac(order)
        acc: dict[tuple[Fraction, int], float] = {}
        if terms is None:
            terms = ()
        if isinstance(terms, Mapping):
            items = (((_frac(i), int(j)), float(c)) for (i, j), c in terms.items())
        else:
            items = (((t.expo, t.logpow), float(t.coeff)) for t in terms)
        for key, c in items:
            if key[0] < 0 or key[1] < 0:
                raise ValueError(f"invalid term key {key}")
            if key[0] > self._order:
                continue
            acc[key] = acc.get(key, 0.0) + c
        self._terms = tuple(
            PhgTerm(i, j, c) for (i, j), c in sorted(acc.items()) if c != 0.0
        )

    @classmethod
    def monomial(cls, coeff: float, expo: Rational, logpow: int = 0, order: Rational = DEFAULT_ORDER) -> PhgSeries:
        return cls({(expo, logpow): coeff}, order=order)

    @classmethod
    def _from_dict(cls, acc: dict, order: Fraction) -> PhgSeries:
        return cls(acc, order=order)

    @property
    def terms(self) -> tuple[PhgTerm, ...]:
        return self._terms

    @property
    def order(self) -> Fraction:
        return self._order

    def as_dict(self) -> dict[tuple[Fraction, int], float]:
        return {(t.expo, t.logpow): t.coeff for t in self._terms}

    def is_empty(self) -> bool:
        return not self._terms

    def min_expo(self) -> Fraction | None:
        return self._terms[0].expo if self._terms else None

    def max_expo(self) -> Fraction | None:
        return max(t.expo for t in self._terms) if self._terms else None

    def truncate(self, order: Rational) -> PhgSeries:
        return PhgSeries(self._terms, order=order)

    def scale(self, c: float) -> PhgSeries:
        return PhgSeries({k: c * v for k, v in self.as_dict().items()}, order=self._order)

    def __len__(self):
        return len(self._terms)

    def __iter__(self):
        return iter(self._terms)

    def __neg__(self) -> PhgSeries:
        return self.scale(-1.0)

    def __add__(self, other: PhgSeries) -> PhgSeries:
        return add(self, other)

    def __sub__(self, other: PhgSeries) -> PhgSeries:
        return add(self, -other)

    def __mul__(self, other) -> PhgSeries:
        if isinstance(other, PhgSeries):
            return mul(self, other)
        return self.scale(float(other))

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        if not isinstance(other, PhgSeries):
            return NotImplemented
        return self._order == other._order and self._terms == other._terms

    def __hash__(self):
        return hash((self._order, self._terms))

    def __call__(self, t):
        if np.ndim(t) == 0:
            return evaluate(self, float(t))
        return evaluate_array(self, t)

    def __repr__(self):
        body = " + ".join(f"{t.coeff!r}*log(t)^{t.logpow}/t^{t.expo}" for t in self._terms) or "0"
        return f"PhgSeries({body}; order={self._order})"

    def to_text(self) -> str:
        """Canonical text form: ``order N/D`` then one ``coeff i_num/i_den j`` per line."""
        lines = [f"order {self._order.numerator}/{self._order.denominator}"]
        for t in self._terms:
            lines.append(f"{t.coeff!r} {t.expo.numerator}/{t.expo.denominator} {t.logpow}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> PhgSeries:
        order = DEFAULT_ORDER
        acc: dict[tuple[Fraction, int], float] = {}
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if parts[0] == "order":
                if len(parts) != 2:
                    raise ValueError(f"line {lineno}: malformed order header {raw!r}")
                order = Fraction(parts[1])
                continue
            if len(parts) != 3:
                raise ValueError(f"line {lineno}: expected 'coeff i_num/i_den j', got {raw!r}")
            c, i, j = float(parts[0]), Fraction(parts[1]), int(parts[2])
            acc[(i, j)] = acc.get((i, j), 0.0) + c
        return cls(acc, order=order)


def add(a: PhgSeries, b: PhgSeries) -> PhgSeries:
    acc = a.as_dict()
    for t in b:
        key = (t.expo, t.logpow)
        acc[key] = acc.get(key, 0.0) + t.coeff
    return PhgSeries(acc, order=min(a.order, b.order))


def mul(a: PhgSeries, b: PhgSeries, order: Rational | None = None) -> PhgSeries:
    order = min(a.order, b.order) if order is None else _frac(order)
    acc: dict[tuple[Fraction, int], float] = {}
    for x in a:
        for y in b:
            i = x.expo + y.expo
            if i > order:
                continue
            key = (i, x.logpow + y.logpow)
            acc[key] = acc.get(key, 0.0) + x.coeff * y.coeff
    return PhgSeries(acc, order=order)


def _check_small(s: PhgSeries, what: str) -> None:
    m = s.min_expo()
    if m is not None and m <= 0:
        raise ValueError(f"{what} needs a series with strictly positive exponents; found a term at t^-{m}")


def _power_count(s: PhgSeries, order: Fraction) -> int:
    m = s.min_expo()
    return int(math.floor(order / m)) if m is not None else 0


def log1p(s: PhgSeries, order: Rational | None = None) -> PhgSeries:
    """Mercator series of ``log(1 + s)`` truncated at ``order``."""
    order = s.order if order is None else _frac(order)
    _check_small(s, "log1p")
    out = PhgSeries(order=order)
    power = PhgSeries({(0, 0): 1.0}, order=order)
    for m in range(1, _power_count(s, order) + 1):
        power = mul(power, s, order)
        out = add(out, power.scale((-1.0) ** (m + 1) / m))
    return out


def exp(s: PhgSeries, order: Rational | None = None) -> PhgSeries:
    """``exp(s) = sum s**m / m!`` truncated at ``order`` (constant term 1 included)."""
    order = s.order if order is None else _frac(order)
    _check_small(s, "exp")
    power = PhgSeries({(0, 0): 1.0}, order=order)
    out = power
    for m in range(1, _power_count(s, order) + 1):
        power = mul(power, s, order).scale(1.0 / m)
        out = add(out, power)
    return out


def _binom(alpha: Fraction, m: int) -> Fraction:
    out = Fraction(1)
    for r in range(m):
        out = out * (alpha - r) / (r + 1)
    return out


def shift_substitute(s: PhgSeries, c: float, order: Rational | None = None) -> PhgSeries:
    """Re-expand ``s(sigma)`` with ``sigma = t + c`` as a series in ``t``.

    Uses ``sigma**-i = t**-i * sum binom(-i, m) (c/t)**m`` and
    ``log sigma = log t + log(1 + c/t)``.
    """
    order = s.order if order is None else _frac(order)
    if c == 0:
        return s.truncate(order)
    c = float(c)
    # log(sigma) as a series: log t + sum (-1)^(m+1) (c/t)^m / m
    log_sigma = {(Fraction(0), 1): 1.0}
    m = 1
    while m <= order:
        log_sigma[(Fraction(m), 0)] = (-1.0) ** (m + 1) * c**m / m
        m += 1
    log_sigma = PhgSeries(log_sigma, order=order)
    log_powers = [PhgSeries({(0, 0): 1.0}, order=order)]
    out = PhgSeries(order=order)
    for term in s:
        if term.expo > order:
            continue
        while len(log_powers) <= term.logpow:
            log_powers.append(mul(log_powers[-1], log_sigma, order))
        inv = {}
        m = 0
        while term.expo + m <= order:
            inv[(term.expo + m, 0)] = float(_binom(-term.expo, m)) * c**m
            m += 1
        piece = mul(PhgSeries(inv, order=order), log_powers[term.logpow], order)
        out = add(out, piece.scale(term.coeff))
    return out


def derivative(s: PhgSeries) -> PhgSeries:
    """Term-wise ``d/dt``; the truncation order moves up by one."""
    order = s.order + 1
    acc: dict[tuple[Fraction, int], float] = {}
    for t in s:
        i, j, c = t.expo, t.logpow, t.coeff
        if j:
            key = (i + 1, j - 1)
            acc[key] = acc.get(key, 0.0) + c * j
        if i:
            key = (i + 1, j)
            acc[key] = acc.get(key, 0.0) - c * float(i)
    return PhgSeries(acc, order=order)


def evaluate(s: PhgSeries, t: float) -> float:
    if not t > 1:
        raise ValueError(f"series evaluation needs t > 1, got {t}")
    lt = math.log(t)
    return math.fsum(term.coeff * lt**term.logpow * t ** (-float(term.expo)) for term in s)


def evaluate_array(s: PhgSeries, t) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    if np.any(t <= 1):
        raise ValueError("series evaluation needs t > 1")
    out = np.zeros_like(t)
    if s.is_empty():
        return out
    lt = np.log(t)
    for term in s:
        out += term.coeff * lt**term.logpow * t ** (-float(term.expo))
    return out
